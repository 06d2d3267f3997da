import math

import numpy as np
import pytest
from scipy import stats

from covert_photon import bounds, fock, metrics, oracles, sim
from covert_photon.errors import DegenerateMask, RejectionBudgetExceeded
from covert_photon.fock import ChannelParams

DESK = ChannelParams(eta=0.5, n_b=1.0)


def within(sample_mean, target, sample_std, count, k=5.0):
    return abs(sample_mean - target) <= k * sample_std / math.sqrt(count)


class TestStreams:
    def test_independent_tags(self):
        a = sim.stream(1, "x").random(4)
        b = sim.stream(1, "y").random(4)
        assert not np.allclose(a, b)
        np.testing.assert_array_equal(a, sim.stream(1, "x").random(4))

    def test_worker_count_irrelevant(self):
        a = sim.willie_lrt_error(DESK, 0.02, 256, 5000, seed=9, workers=1)
        b = sim.willie_lrt_error(DESK, 0.02, 256, 5000, seed=9, workers=3)
        assert a == b


class TestEstimate:
    def test_interval_contains_estimate(self):
        for k, n in [(0, 100), (3, 100), (50, 100), (100, 100)]:
            e = sim.estimate_from_counts(k, n, 0)
            assert e.ci_low <= e.estimate <= e.ci_high

    def test_interval_shrinks(self):
        w = []
        for n in (4000, 8000, 16000):
            e = sim.estimate_from_counts(n // 4, n, 0)
            w.append(e.ci_high - e.ci_low)
        assert w[0] / w[1] == pytest.approx(math.sqrt(2), rel=0.2)
        assert w[1] / w[2] == pytest.approx(math.sqrt(2), rel=0.2)

    def test_wilson_calibration(self):
        mu0, mu1, n = 0.5, 0.6, 64
        link = ChannelParams(eta=0.5, n_b=1.0)
        nbar = (mu1 - mu0) / link.gamma
        exact = sim.exact_count_test_error(mu0, mu1, n)
        cover = 0
        for rep in range(200):
            e = sim.willie_lrt_error(link, nbar, n, 400, seed=1000 + rep)
            cover += e.ci_low <= exact <= e.ci_high
        assert cover >= 180


class TestCodebooks:
    def test_gaussian_reproducible(self):
        a = sim.gen_gaussian_codebook(4, 50, 0.3, seed=5)
        b = sim.gen_gaussian_codebook(4, 50, 0.3, seed=5)
        np.testing.assert_array_equal(a.codewords, b.codewords)

    def test_gaussian_statistics(self):
        nbar = 0.7
        cb = sim.gen_gaussian_codebook(100, 10_000, nbar, seed=2)
        p = np.abs(cb.codewords) ** 2
        # |alpha|^2 is exponential with mean and standard deviation nbar
        assert within(p.mean(), nbar, nbar, p.size)
        for part in (cb.codewords.real, cb.codewords.imag):
            v = part.ravel() ** 2
            assert within(v.mean(), nbar / 2, math.sqrt(2) * nbar / 2, v.size)

    def test_ook_structure(self):
        n, c = 10_000, 2.0
        cb = sim.gen_ook_codebook(8, n, c / math.sqrt(n), 0.1, 0.5, 1e-3, seed=4)
        off = ~cb.slot_mask
        assert np.all(cb.codewords[:, off] == 0)
        on = np.abs(cb.codewords[:, cb.slot_mask])
        assert set(np.unique(np.round(on ** 2, 15))) <= {0.0, round(cb.alpha_sq, 15)}

    def test_ook_slot_count(self):
        n, c = 10_000, 3.0
        taus = [sim.gen_ook_codebook(2, n, c / math.sqrt(n), 0.1, 0.5, 1e-3, seed=s).slot_mask.sum()
                for s in range(200)]
        p = c / math.sqrt(n)
        assert within(np.mean(taus), c * math.sqrt(n), math.sqrt(n * p * (1 - p)), len(taus))

    def test_ook_total_photons(self):
        n, c, q = 10_000, 3.0, 0.5
        cb = sim.gen_ook_codebook(4000, n, c / math.sqrt(n), 0.1, 0.5, 1e-3, seed=8, q=q)
        per_codeword = np.sum(np.abs(cb.codewords) ** 2, axis=1)
        target = q * n * bounds.covert_nbar_darkcount(0.1, 0.5, 1e-3, n)
        assert within(per_codeword.mean(), target, per_codeword.std(), per_codeword.size)

    def test_ook_degenerate(self):
        with pytest.raises(DegenerateMask):
            sim.gen_ook_codebook(2, 10, 1e-9, 0.1, 0.5, 1e-3, seed=0)


class TestWillieCounts:
    def test_h0_mean_and_zero_mass(self):
        x = sim.sample_willie_counts("H0", DESK, 0.0, 1_000_000, seed=3)
        mu = DESK.willie_noise
        assert within(x.mean(), mu, math.sqrt(mu * (1 + mu)), x.size)
        p0 = 1 / (1 + mu)
        assert within((x == 0).mean(), p0, math.sqrt(p0 * (1 - p0)), x.size)

    def test_h1_without_signal_matches_h0(self):
        a = sim.sample_willie_counts("H0", DESK, 0.0, 100_000, seed=1)
        b = sim.sample_willie_counts("H1", DESK, 0.0, 100_000, seed=2)
        ks = stats.ks_2samp(a, b).statistic
        assert ks < 0.01

    def test_reproducible(self):
        a = sim.sample_willie_counts("H1", DESK, 0.1, 100, seed=7)
        np.testing.assert_array_equal(a, sim.sample_willie_counts("H1", DESK, 0.1, 100, seed=7))


class TestWillieLRT:
    def test_null(self):
        e = sim.willie_lrt_error(DESK, 0.0, 1024, 20_000, seed=1)
        assert e.ci_low <= 0.5 <= e.ci_high

    def test_exact_matches_enumeration(self):
        for n in (16, 100, 400):
            mu0, mu1 = 0.5, 0.58
            kmax = 4000
            ref = oracles.optimal_count_error_enumerated(oracles.geometric_total_pmf(mu0, n, kmax),
                                                         oracles.geometric_total_pmf(mu1, n, kmax))
            assert sim.exact_count_test_error(mu0, mu1, n) == pytest.approx(ref, abs=1e-12)

    def test_desk_point(self):
        n = 1024
        nbar = bounds.covert_nbar_thermal(0.1, 0.5, 1.0, n)
        assert nbar == pytest.approx(0.69282 / math.sqrt(1024), rel=1e-5)
        e = sim.willie_lrt_error(DESK, nbar, n, 20_000, seed=4)
        assert e.estimate >= 0.4 - 3 * e.sigma

    @pytest.mark.parametrize("n,nbar", [(64, 0.2), (256, 0.05), (1024, 0.03)])
    def test_above_pinsker(self, n, nbar):
        e = sim.willie_lrt_error(DESK, nbar, n, 20_000, seed=n)
        lb = metrics.pinsker_quantum_lb(n * bounds.qre_thermal_closed(nbar, 0.5, 1.0)).lower
        assert e.estimate >= lb - 3 * e.sigma
        mu0, mu1 = sim.willie_means(DESK, nbar)
        assert abs(e.estimate - sim.exact_count_test_error(mu0, mu1, n)) <= 3 * e.sigma


class TestHeterodyne:
    def test_vacuum_mean(self):
        y = sim.sample_heterodyne(np.zeros(200_000), 0.5, 1.0, seed=1)
        p = np.abs(y) ** 2
        assert within(p.mean(), 1.5, p.std(), p.size)

    def test_coherent_variance(self):
        y = sim.sample_heterodyne(np.full(1_000_000, math.sqrt(2.0)), 0.5, 1.0, seed=2)
        p = np.abs(y) ** 2
        m = bounds.heterodyne_moments(2.0, 2.0, 0.5, 1.0)
        se = math.sqrt((np.mean((p - p.mean()) ** 4) - p.var() ** 2) / p.size)
        assert abs(p.var() - m.variance) <= 5 * se

    def test_number_state_through_thermal_channel(self):
        rho_w = fock.beamsplitter_willie_output(fock.number_state(3, 3), 0.5)
        y = sim.sample_husimi(rho_w, 400_000, seed=3, extra_noise=0.5)
        p = np.abs(y) ** 2
        m = bounds.heterodyne_moments(3.0, 0.0, 0.5, 1.0)
        assert within(p.mean(), m.mean, p.std(), p.size)
        se = math.sqrt((np.mean((p - p.mean()) ** 4) - p.var() ** 2) / p.size)
        assert abs(p.var() - m.variance) <= 5 * se

    def test_reproducible(self):
        a = sim.sample_heterodyne(np.ones(10), 0.3, 0.2, seed=5)
        np.testing.assert_array_equal(a, sim.sample_heterodyne(np.ones(10), 0.3, 0.2, seed=5))

    def test_rejection_budget(self, monkeypatch):
        # the |3> envelope constant is about 2.2
        monkeypatch.setattr(sim, "REJECTION_BUDGET", 2.0)
        with pytest.raises(RejectionBudgetExceeded):
            sim.sample_husimi(fock.number_state(3, 3).projector(), 10, seed=0)


class TestRadiometer:
    def test_zero_readings(self):
        assert sim.willie_radiometer(np.zeros(10), 1.5) is False

    def test_false_alarm_below_target(self):
        d, t = bounds.radiometer_threshold(0.05, 10_000, 0.5, 1.0)
        e = sim.radiometer_false_alarm(10_000, 0.5, 1.0, t, 20_000, seed=1)
        assert e.estimate <= 0.05 + 3 * e.sigma

    def test_chi_square_statistic_matches_readings(self):
        # the sufficient-statistic shortcut agrees with explicit readings
        n, t = 50, 0.4
        cb = sim.gen_gaussian_codebook(4, n, 0.3, seed=3)
        rng = np.random.default_rng(0)
        misses = 0
        for _ in range(4000):
            w = cb.codewords[rng.integers(4)]
            y = sim.sample_heterodyne(w, 0.5, 1.0, 0, rng=rng)
            misses += not sim.willie_radiometer(y, 1.5 + t)
        direct = misses / 4000
        e = sim.radiometer_miss(cb, 0.5, 1.0, t, 4000, seed=6)
        assert abs(direct - e.estimate) <= 4 * math.sqrt(2 * e.estimate * (1 - e.estimate) / 4000)

    def test_miss_below_bound(self):
        n = 10_000
        d, t = bounds.radiometer_threshold(0.05, n, 0.5, 1.0)
        cb = sim.gen_gaussian_codebook(32, n, 0.2, seed=2)
        e = sim.radiometer_miss(cb, 0.5, 1.0, t, 20_000, seed=3)
        assert e.estimate <= sim.radiometer_miss_bound(cb, 0.5, 1.0, d) + 3 * e.sigma


class TestBobHomodyne:
    def test_noiseless_decodes(self):
        cb = sim.gen_gaussian_codebook(16, 64, 0.01, seed=1)
        for msg in range(16):
            assert sim.bob_homodyne_trial(cb, DESK, msg, seed=msg, noise_scale=1e-12) == msg

    def test_reproducible(self):
        cb = sim.gen_gaussian_codebook(16, 64, 0.05, seed=1)
        assert sim.bob_homodyne_trial(cb, DESK, 3, seed=2) == sim.bob_homodyne_trial(cb, DESK, 3, seed=2)

    def test_error_below_bound(self):
        sigma_sq = bounds.homodyne_noise_power(0.5, 1.0)
        nbar = bounds.homodyne_nbar_for_error(4, 2048, 0.1, sigma_sq)
        e = sim.bob_homodyne_error(DESK, nbar, 2048, 16, 1000, seed=3)
        assert e.estimate <= 0.1 + 3 * e.sigma

    def test_bound_not_loose_by_orders(self):
        # at 4x less power than the bound needs for delta = 0.1 the decoder fails often
        sigma_sq = bounds.homodyne_noise_power(0.5, 1.0)
        nbar = bounds.homodyne_nbar_for_error(4, 2048, 0.1, sigma_sq) / 4
        e = sim.bob_homodyne_error(DESK, nbar, 2048, 16, 500, seed=4)
        assert e.estimate > 0.05


class TestDarkCount:
    def test_no_signal(self):
        assert sim.exact_binomial_error(1000, 1e-3, 1e-3) == 0.5

    def test_theorem_point(self):
        a = bounds.covert_nbar_darkcount(0.1, 0.5, 1e-3, 1000)
        p1 = bounds.darkcount_click_prob(1.0, a, 0.5, 1e-3)
        assert sim.exact_binomial_error(1000, 1e-3, p1) >= 0.4

    @pytest.mark.parametrize("n", [100, 1000, 10_000])
    @pytest.mark.parametrize("a", [1e-4, 1e-3, 1e-2])
    def test_exact_above_pinsker(self, n, a):
        p_d, q, eta = 1e-3, 1.0, 0.5
        p1 = bounds.darkcount_click_prob(q, a, eta, p_d)
        lb = 0.5 - math.sqrt(n * bounds.cre_darkcount_ub(q, a, eta, p_d) / 8)
        assert sim.exact_binomial_error(n, p_d, p1) >= lb - 1e-9

    def test_simulation_matches_exact(self):
        a = 0.005
        p1 = bounds.darkcount_click_prob(1.0, a, 0.5, 1e-3)
        e = sim.willie_darkcount_test(1.0, a, 0.5, 1e-3, 1000, 20_000, seed=5)
        assert abs(e.estimate - sim.exact_binomial_error(1000, 1e-3, p1)) <= 3 * e.sigma


class TestBobBAC:
    def test_noiseless(self):
        cb = sim.gen_ook_codebook(8, 400, 0.5, 0.1, 0.5, 1e-3, seed=2)
        cb = sim.Codebook(cb.kind, np.where(np.abs(cb.codewords) > 0, 30.0, 0.0), cb.nbar_target, cb.seed,
                          cb.slot_mask, 900.0, cb.q)
        for msg in range(8):
            if np.any(cb.codewords[msg] != 0):
                assert sim.bob_bac_trial(cb, 0.5, 0.0, msg, seed=msg) == msg

    def test_reproducible(self):
        cb = sim.gen_ook_codebook(8, 400, 0.5, 0.1, 0.5, 1e-3, seed=2)
        assert sim.bob_bac_trial(cb, 0.5, 0.1, 1, seed=3) == sim.bob_bac_trial(cb, 0.5, 0.1, 1, seed=3)

    @pytest.mark.slow
    def test_error_below_gallager(self):
        n, m = 10_000, 256
        bound, _ = bounds.ook_error_bound(n, math.log(m) / n, 0.5, 0.5, 0.07, 0.1)
        e = sim.bob_bac_error(n, m, 0.5, 0.5, 0.07, 0.1, 200, seed=1)
        assert e.estimate <= bound + 3 * e.sigma
