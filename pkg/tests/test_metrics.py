import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covert_photon import bounds, fock, metrics
from covert_photon.errors import CutoffMismatch, DomainError, SupportViolation


def thermal_diag(nbar, cutoff=200):
    p = fock.thermal_probabilities(nbar, cutoff)
    return p / p.sum()


class TestTraceDistance:
    def test_identical(self):
        rho = fock.thermal_state(0.3, 30)
        assert metrics.trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal(self):
        a = fock.number_state(0, 1).projector()
        b = fock.number_state(1, 1).projector()
        assert metrics.trace_distance(a, b) == pytest.approx(1.0)

    def test_vacuum_vs_thermal(self):
        assert metrics.trace_distance(fock.vacuum(40), fock.thermal_state(1.0, 40)) == pytest.approx(0.5, abs=1e-9)

    def test_cutoff_mismatch(self):
        with pytest.raises(CutoffMismatch):
            metrics.trace_distance(fock.vacuum(2), fock.vacuum(3))


class TestFidelityHelstrom:
    def test_fidelity_examples(self):
        psi = fock.coherent_state(0.4, 20)
        assert metrics.fidelity_pure(psi, psi) == pytest.approx(1.0)
        assert metrics.fidelity_pure(fock.number_state(0, 1), fock.number_state(1, 1)) == 0.0
        vac = fock.number_state(0, 20)
        assert metrics.fidelity_pure(vac, fock.coherent_state(1.0, 20)) == pytest.approx(math.exp(-1), rel=1e-9)

    @pytest.mark.parametrize("f,expected", [(0.0, 0.0), (1.0, 0.5), (0.64, 0.2)])
    def test_helstrom_pure(self, f, expected):
        assert metrics.helstrom_pure(f) == pytest.approx(expected, abs=1e-15)

    def test_helstrom_exact(self):
        rho = fock.thermal_state(0.2, 30)
        assert metrics.helstrom_exact(rho, rho) == pytest.approx(0.5)
        a = fock.number_state(0, 1).projector()
        b = fock.number_state(1, 1).projector()
        assert metrics.helstrom_exact(a, b) == pytest.approx(0.0, abs=1e-15)
        assert metrics.helstrom_exact(fock.vacuum(40), fock.thermal_state(1.0, 40)) == pytest.approx(0.25, abs=1e-9)

    def test_helstrom_priors(self):
        assert metrics.helstrom_pure(1.0, 0.2, 0.8) == pytest.approx(0.2)


class TestQRE:
    def test_self(self):
        p = thermal_diag(0.4, 50)
        assert metrics.qre_diagonal(p, p) == 0.0

    def test_matches_closed_form(self):
        # eta*N_B = 0.5 against 0.55
        val = metrics.qre_diagonal(thermal_diag(0.5), thermal_diag(0.55))
        assert val == pytest.approx(bounds.qre_thermal_closed(0.1, 0.5, 1.0), rel=1e-9)

    def test_support_violation(self):
        with pytest.raises(SupportViolation):
            metrics.qre_diagonal([1, 0], [0, 1])

    def test_not_a_distribution(self):
        with pytest.raises(DomainError):
            metrics.qre_diagonal([0.5, 0.6], [0.5, 0.5])

    def test_underflowing_ratios(self):
        # p/q underflows to zero in the far tail
        assert math.isfinite(metrics.qre_diagonal(thermal_diag(1e-3, 120), thermal_diag(1.0, 120)))

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 5.0), st.floats(0.05, 5.0))
    def test_nonnegative_and_gibbs(self, a, b):
        d = metrics.qre_diagonal(thermal_diag(a, 150), thermal_diag(b, 150))
        assert d >= 0.0
        if a == b:
            assert d == 0.0

    @pytest.mark.parametrize("x", [1e-9, 1e-5, -0.05, 0.0999, 0.5, 3.0, -0.9])
    def test_log1p_minus_x(self, x):
        import mpmath
        ref = float(mpmath.log1p(mpmath.mpf(x)) - mpmath.mpf(x))
        assert metrics.log1p_minus_x(x) == pytest.approx(ref, rel=1e-13)


class TestPinsker:
    @pytest.mark.parametrize("fn", [metrics.pinsker_quantum_lb, metrics.pinsker_classical_lb])
    def test_examples(self, fn):
        assert fn(0.0).lower == 0.5
        assert fn(0.02).lower == pytest.approx(0.45)
        r = fn(2.0)
        assert r.lower == 0.0 and r.clamped

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            metrics.pinsker_quantum_lb(-1e-3)

    def test_chain_on_thermal_grid(self):
        for eta, n_b, nbar in itertools.product((0.1, 0.5, 0.9), (0.01, 1.0), (1e-3, 0.1, 0.5)):
            m0 = eta * n_b
            m1 = m0 + (1 - eta) * nbar
            p, q = thermal_diag(m0), thermal_diag(m1)
            d = metrics.qre_diagonal(p, q)
            r0 = fock.DensityOperator(np.diag(p).astype(complex))
            r1 = fock.DensityOperator(np.diag(q).astype(complex))
            t = metrics.trace_distance(r0, r1)
            assert t <= math.sqrt(2 * d) + 1e-9
            assert metrics.helstrom_exact(r0, r1) >= metrics.pinsker_quantum_lb(d).lower - 1e-9


class TestBernoulli:
    def test_self(self):
        assert metrics.cre_bernoulli(0.3, 0.3) == 0.0

    def test_below_darkcount_bound(self):
        p_d, p1 = 1e-3, 1.39972e-3
        # q(1-eta)|alpha|^2 reproducing p1
        x = -math.log1p(-(p1 - p_d) / (1 - p_d))
        assert metrics.cre_bernoulli(p_d, p1) <= bounds.cre_darkcount_ub(1.0, x, 0.0, p_d)

    def test_domain(self):
        with pytest.raises(DomainError):
            metrics.cre_bernoulli(0.0, 0.5)

    def test_bits(self):
        assert metrics.nats_to_bits(math.log(2)) == pytest.approx(1.0)
