"""Seeded Monte Carlo for Alice's codebooks, Willie's detectors and Bob's decoders.

Every random draw comes from a stream keyed by (master seed, operation tag,
block index). Trials are grouped in fixed-size blocks that do not depend on
the worker count, so results are identical for any pool size.
"""
from __future__ import annotations

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Literal

import numpy as np
from scipy import stats
from scipy.special import gammaln, xlogy

from . import bounds
from .errors import DegenerateMask, DomainError, RejectionBudgetExceeded
from .fock import ChannelParams, DensityOperator, husimi_q_grid

BLOCK = 1024
REJECTION_BUDGET = 1000


# ---------------------------------------------------------------------------
# seeding, aggregation
# ---------------------------------------------------------------------------

def _tag(name: str) -> int:
    return zlib.crc32(name.encode())


def stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent generator for (seed, tag, index)."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2 ** 64 - 1), spawn_key=(_tag(tag), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class SimEstimate:
    """Empirical error rate with a 95% Wilson interval."""

    estimate: float
    trials: int
    ci_low: float
    ci_high: float
    seed: int
    errors: int = 0

    @property
    def sigma(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.trials)


def wilson_interval(k: int, n: int) -> tuple[float, float]:
    ci = stats.binomtest(int(k), int(n)).proportion_ci(0.95, method="wilson")
    return float(ci.low), float(ci.high)


def estimate_from_counts(k: int, n: int, seed: int) -> SimEstimate:
    lo, hi = wilson_interval(k, n)
    p = k / n
    return SimEstimate(p, n, min(lo, p), max(hi, p), seed, int(k))


def _blocks(trials: int, block: int = BLOCK) -> list[tuple[int, int]]:
    return [(i, min(block, trials - i * block)) for i in range((trials + block - 1) // block)]


def run_blocks(fn: Callable[[int, int, int], int], trials: int, seed: int, workers: int = 1) -> int:
    """Sum ``fn(seed, block_index, block_size)`` over the fixed block partition."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    blocks = _blocks(trials)
    args = [(seed, i, size) for i, size in blocks]
    if workers <= 1 or len(blocks) == 1:
        return int(sum(fn(*a) for a in args))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return int(sum(pool.map(_star, [(fn, a) for a in args])))


def _star(job):
    fn, a = job
    return fn(*a)


# ---------------------------------------------------------------------------
# codebooks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Codebook:
    kind: Literal["gaussian_coherent", "ook_twostage"]
    codewords: np.ndarray
    nbar_target: float
    seed: int
    slot_mask: np.ndarray | None = None
    alpha_sq: float = 0.0
    q: float = 0.0

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]


def _complex_normal(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    s = math.sqrt(var / 2.0)
    return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def gen_gaussian_codebook(m_codewords: int, n: int, nbar: float, seed: int) -> Codebook:
    """i.i.d. circular complex Gaussian amplitudes with E|alpha|^2 = nbar."""
    if m_codewords < 2 or n < 1 or nbar <= 0:
        raise DomainError("need m >= 2, n >= 1, nbar > 0")
    cw = _complex_normal(stream(seed, "codebook/gaussian"), (m_codewords, n), nbar)
    return Codebook("gaussian_coherent", cw, nbar, seed)


def gen_ook_codebook(m: int, n: int, slot_prob: float, epsilon: float, eta: float, p_d: float,
                     seed: int, q: float = 0.5, resample: bool = False) -> Codebook:
    """Two-stage OOK codebook: pick slots with prob ``slot_prob``, then Bernoulli(q) symbols.

    |alpha|^2 comes from :func:`bounds.ook_twostage_alpha` at the realized
    slot count tau. Off-slot symbols are exactly zero.
    """
    if not 0.0 < slot_prob < 1.0:
        raise DomainError(f"slot probability {slot_prob} must lie in (0, 1)")
    rng = stream(seed, "codebook/ook")
    for _ in range(100 if resample else 1):
        mask = rng.random(n) < slot_prob
        tau = int(mask.sum())
        if tau:
            break
    else:
        raise DegenerateMask(f"no slots selected out of n={n} at p={slot_prob}")
    alpha_sq = bounds.ook_twostage_alpha(n, tau, epsilon, eta, p_d)
    on = (rng.random((m, n)) < q) & mask[None, :]
    cw = np.where(on, math.sqrt(alpha_sq), 0.0).astype(complex)
    nbar = bounds.covert_nbar_darkcount(epsilon, eta, p_d, n)
    return Codebook("ook_twostage", cw, nbar, seed, mask, alpha_sq, q)


# ---------------------------------------------------------------------------
# Willie: photon counting on the thermal channel
# ---------------------------------------------------------------------------

def willie_means(params: ChannelParams, nbar: float) -> tuple[float, float]:
    """Mean counts per mode at Willie under H0 and H1."""
    mu0 = params.willie_noise
    return mu0, mu0 + params.gamma * nbar


def sample_willie_counts(hypothesis: Literal["H0", "H1"], params: ChannelParams, nbar: float,
                         n: int, seed: int) -> np.ndarray:
    """i.i.d. Bose-Einstein photon counts for one observation window."""
    mu0, mu1 = willie_means(params, nbar)
    mu = {"H0": mu0, "H1": mu1}[hypothesis]
    rng = stream(seed, f"willie/counts/{hypothesis}")
    return rng.geometric(1.0 / (1.0 + mu), size=n) - 1


def _llr_threshold(mu0: float, mu1: float, n: int) -> int:
    """Smallest total count at which the likelihood ratio favours H1."""
    if mu0 == 0.0:
        return 1
    slope = math.log(mu1 * (1.0 + mu0) / (mu0 * (1.0 + mu1)))
    cut = n * math.log((1.0 + mu1) / (1.0 + mu0)) / slope
    return int(math.floor(cut)) + 1


def exact_count_test_error(mu0: float, mu1: float, n: int) -> float:
    """Exact equal-prior error of the optimal test on n geometric counts."""
    if mu1 <= mu0:
        return 0.5
    k = _llr_threshold(mu0, mu1, n)
    p_fa = stats.nbinom.sf(k - 1, n, 1.0 / (1.0 + mu0)) if mu0 > 0 else 0.0
    p_md = stats.nbinom.cdf(k - 1, n, 1.0 / (1.0 + mu1))
    return 0.5 * float(p_fa + p_md)


def _lrt_block(seed, index, size, *, mu0, mu1, n):
    rng = stream(seed, "willie/lrt", index)
    h1 = rng.random(size) < 0.5
    p = np.where(h1, 1.0 / (1.0 + mu1), 1.0 / (1.0 + mu0))
    total = rng.negative_binomial(n, p)
    decide = total >= _llr_threshold(mu0, mu1, n) if mu1 > mu0 else np.zeros(size, bool)
    return int(np.sum(decide != h1))


def willie_lrt_error(params: ChannelParams, nbar: float, n: int, trials: int, seed: int,
                     workers: int = 1) -> SimEstimate:
    """Monte Carlo error of Willie's optimal count test, equal priors.

    The test uses the total count, which is sufficient for i.i.d. geometric
    counts and is drawn directly as a negative binomial variate.
    """
    mu0, mu1 = willie_means(params, nbar)
    k = run_blocks(partial(_lrt_block, mu0=mu0, mu1=mu1, n=n), trials, seed, workers)
    return estimate_from_counts(k, trials, seed)


# ---------------------------------------------------------------------------
# Willie: heterodyne radiometer
# ---------------------------------------------------------------------------

def sample_heterodyne(symbols: np.ndarray, gamma: float, n_b: float, seed: int,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """Heterodyne readings for coherent-state symbols through the thermal channel.

    Each reading is CN(sqrt(gamma) alpha, 1 + (1 - gamma) N_B).
    """
    rng = rng or stream(seed, "willie/heterodyne")
    symbols = np.asarray(symbols, dtype=complex)
    v = 1.0 + (1.0 - gamma) * n_b
    return math.sqrt(gamma) * symbols + _complex_normal(rng, symbols.shape, v)


def _q_envelope(rho: DensityOperator) -> tuple[float, float]:
    """(width, M) with Q(alpha) <= M g(alpha) for the proposal g = CN(0, width).

    Uses the radial majorant |<alpha|rho|alpha>| <= sum_kl |rho_kl| |c_k| |c_l|,
    which is exact for number-diagonal states, maximized on a fine radial grid
    and padded by 5%.
    """
    mean = float(np.sum(np.arange(rho.cutoff + 1) * rho.diagonal()))
    r2 = np.linspace(0.0, 60.0 * (1.0 + rho.cutoff), 40001)
    mag = np.abs(_radial_majorant(rho, np.sqrt(r2)))
    best = (math.inf, 1.0)
    for width in (1.0 + mean) * np.linspace(1.0, 3.0, 21):
        ratio = mag * np.pi * width * np.exp(r2 / width)
        best = min(best, (float(ratio.max()), float(width)))
    return best[1], 1.05 * best[0]


def _radial_majorant(rho: DensityOperator, r: np.ndarray) -> np.ndarray:
    k = np.arange(rho.cutoff + 1)
    c = np.exp(-0.5 * r[:, None] ** 2 + xlogy(k[None, :], r[:, None]) - 0.5 * gammaln(k + 1)[None, :])
    return np.sum((c @ np.abs(rho.matrix)) * c, axis=1) / np.pi


def sample_husimi(rho: DensityOperator, size: int, seed: int, extra_noise: float = 0.0,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw heterodyne outcomes from Q of ``rho`` by rejection, plus CN(0, extra_noise).

    ``extra_noise`` = (1 - gamma) N_B turns a pure-loss output into the
    thermal-channel output, since thermal loss is pure loss followed by
    classical Gaussian noise.
    """
    rng = rng or stream(seed, "willie/husimi")
    width, env = _q_envelope(rho)
    if env > REJECTION_BUDGET:
        raise RejectionBudgetExceeded(f"envelope constant {env:.1f} exceeds {REJECTION_BUDGET}")
    out = np.empty(size, dtype=complex)
    filled = 0
    while filled < size:
        batch = min(int((size - filled) * env * 1.2) + 64, 1 << 16)
        prop = _complex_normal(rng, batch, width)
        g = np.exp(-np.abs(prop) ** 2 / width) / (np.pi * width)
        keep = prop[rng.random(batch) * env * g < husimi_q_grid(rho, prop)]
        take = min(keep.size, size - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    if extra_noise > 0:
        out = out + _complex_normal(rng, size, extra_noise)
    return out


def willie_radiometer(readings: np.ndarray, threshold_mean: float) -> bool:
    """True (declare H1) iff the mean of |y|^2 reaches ``threshold_mean``."""
    s = float(np.mean(np.abs(np.asarray(readings)) ** 2))
    return s >= threshold_mean


def _radiometer_block(seed, index, size, *, n, gamma, n_b, t, powers):
    """Count radiometer errors; ``powers`` None means H0 (false alarms)."""
    rng = stream(seed, "willie/radiometer/" + ("fa" if powers is None else "md"), index)
    v = 1.0 + (1.0 - gamma) * n_b
    if powers is None:
        s = v / (2 * n) * rng.chisquare(2 * n, size)
        return int(np.sum(s >= v + t))
    p = powers[rng.integers(0, powers.size, size)]
    # sum_i |y_i|^2 * 2 / v is noncentral chi-square(2n, 2 gamma P / v)
    s = v / (2 * n) * rng.noncentral_chisquare(2 * n, 2.0 * gamma * p / v)
    return int(np.sum(s < v + t))


def radiometer_false_alarm(n: int, gamma: float, n_b: float, t: float, trials: int, seed: int,
                           workers: int = 1) -> SimEstimate:
    fn = partial(_radiometer_block, n=n, gamma=gamma, n_b=n_b, t=t, powers=None)
    return estimate_from_counts(run_blocks(fn, trials, seed, workers), trials, seed)


def radiometer_miss(codebook: Codebook, gamma: float, n_b: float, t: float, trials: int, seed: int,
                    workers: int = 1) -> SimEstimate:
    """Miss rate over uniformly chosen codewords of a coherent-state codebook.

    Draws the sufficient statistic (noncentral chi-square) per trial; exact in
    distribution for coherent inputs.
    """
    powers = np.sum(np.abs(codebook.codewords) ** 2, axis=1)
    fn = partial(_radiometer_block, n=codebook.n, gamma=gamma, n_b=n_b, t=t, powers=powers)
    return estimate_from_counts(run_blocks(fn, trials, seed, workers), trials, seed)


def radiometer_miss_bound(codebook: Codebook, gamma: float, n_b: float, d: float) -> float:
    """Codebook-average of the per-codeword Chebyshev miss bound (coherent inputs)."""
    nbar_a = np.mean(np.abs(codebook.codewords) ** 2, axis=1)
    return float(np.mean([bounds.radiometer_md_ub(x, x, codebook.n, gamma, n_b, d).value
                          for x in nbar_a]))


# ---------------------------------------------------------------------------
# Bob: homodyne over the induced AWGN channel
# ---------------------------------------------------------------------------

HOMODYNE_GAIN = math.sqrt(2.0)


def _homodyne_decode(cw_real: np.ndarray, r: np.ndarray) -> int:
    dist = np.sum(cw_real * cw_real, axis=1) - 2.0 * cw_real @ r
    return int(np.argmin(dist))


def bob_homodyne_trial(codebook: Codebook, params: ChannelParams, message: int, seed: int,
                       noise_scale: float = 1.0, rng: np.random.Generator | None = None) -> int:
    """One transmission and minimum-distance decode; returns the decoded index.

    The measured quadrature sample is HOMODYNE_GAIN * Re(alpha) plus N(0, sigma_b^2),
    i.e. the real symbol carries power nbar against noise sigma_b^2.
    """
    rng = rng or stream(seed, "bob/homodyne")
    sigma_sq = bounds.homodyne_noise_power(params.eta, params.n_b) * noise_scale
    x = HOMODYNE_GAIN * codebook.codewords.real
    r = x[message] + math.sqrt(sigma_sq) * rng.standard_normal(codebook.n)
    return _homodyne_decode(x, r)


def _homodyne_block(seed, index, size, *, eta, n_b, nbar, n, m):
    rng = stream(seed, "bob/homodyne/error", index)
    sigma = math.sqrt(bounds.homodyne_noise_power(eta, n_b))
    errs = 0
    for _ in range(size):
        x = HOMODYNE_GAIN * math.sqrt(nbar / 2.0) * rng.standard_normal((m, n))
        msg = int(rng.integers(m))
        r = x[msg] + sigma * rng.standard_normal(n)
        errs += _homodyne_decode(x, r) != msg
    return errs


def bob_homodyne_error(params: ChannelParams, nbar: float, n: int, m: int, trials: int, seed: int,
                       workers: int = 1) -> SimEstimate:
    """Bob's block error averaged over fresh Gaussian codebooks and messages."""
    fn = partial(_homodyne_block, eta=params.eta, n_b=params.n_b, nbar=nbar, n=n, m=m)
    return estimate_from_counts(run_blocks(fn, trials, seed, workers), trials, seed)


# ---------------------------------------------------------------------------
# dark-count channel: Willie's click test, Bob's BAC decoder
# ---------------------------------------------------------------------------

def _binomial_threshold(n: int, p0: float, p1: float) -> int:
    slope = math.log(p1 * (1.0 - p0) / (p0 * (1.0 - p1)))
    cut = n * math.log((1.0 - p0) / (1.0 - p1)) / slope
    return int(math.floor(cut)) + 1


def exact_binomial_error(n: int, p0: float, p1: float) -> float:
    """Exact equal-prior error of the likelihood-ratio test on the click count."""
    if n > 10 ** 6:
        raise DomainError("exact evaluation limited to n <= 1e6")
    if p1 <= p0:
        return 0.5
    k = _binomial_threshold(n, p0, p1)
    return 0.5 * float(stats.binom.sf(k - 1, n, p0) + stats.binom.cdf(k - 1, n, p1))


def _click_block(seed, index, size, *, n, p0, p1):
    rng = stream(seed, "willie/darkcount", index)
    h1 = rng.random(size) < 0.5
    clicks = rng.binomial(n, np.where(h1, p1, p0))
    decide = clicks >= _binomial_threshold(n, p0, p1) if p1 > p0 else np.zeros(size, bool)
    return int(np.sum(decide != h1))


def willie_darkcount_test(q: float, alpha_sq: float, eta: float, p_d: float, n: int, trials: int,
                          seed: int, workers: int = 1) -> SimEstimate:
    p1 = bounds.darkcount_click_prob(q, alpha_sq, eta, p_d)
    fn = partial(_click_block, n=n, p0=p_d, p1=p1)
    return estimate_from_counts(run_blocks(fn, trials, seed, workers), trials, seed)


def _bac_loglik(eta: float, alpha_sq: float, p_b: float) -> tuple[np.ndarray, np.ndarray]:
    """log P(y | off) and log P(y | on) for y in {0, 1}."""
    miss = math.exp(-eta * alpha_sq) * (1.0 - p_b)
    off = np.log(np.maximum([1.0 - p_b, p_b], 1e-300))
    on = np.log(np.maximum([miss, 1.0 - miss], 1e-300))
    return off, on


def _bac_decode(on_mask: np.ndarray, y: np.ndarray, off_ll, on_ll) -> int:
    gain = on_ll[y] - off_ll[y]
    return int(np.argmax(on_mask.astype(float) @ gain))


def bob_bac_trial(codebook: Codebook, eta: float, p_b: float, message: int, seed: int,
                  rng: np.random.Generator | None = None) -> int:
    """Send one OOK codeword through Bob's binary asymmetric channel; ML-decode it."""
    rng = rng or stream(seed, "bob/bac")
    on = np.abs(codebook.codewords) > 0
    alpha_sq = float(np.max(np.abs(codebook.codewords)) ** 2) if on.any() else 0.0
    off_ll, on_ll = _bac_loglik(eta, alpha_sq, p_b)
    miss = math.exp(-eta * alpha_sq) * (1.0 - p_b)
    u = rng.random(codebook.n)
    y = np.where(on[message], u >= miss, u < p_b).astype(int)
    return _bac_decode(on, y, off_ll, on_ll)


def _bac_block(seed, index, size, *, n, m, q, eta, alpha_sq, p_b):
    rng = stream(seed, "bob/bac/error", index)
    off_ll, on_ll = _bac_loglik(eta, alpha_sq, p_b)
    miss = math.exp(-eta * alpha_sq) * (1.0 - p_b)
    errs = 0
    for _ in range(size):
        on = rng.random((m, n)) < q
        msg = int(rng.integers(m))
        u = rng.random(n)
        y = np.where(on[msg], u >= miss, u < p_b).astype(int)
        errs += _bac_decode(on, y, off_ll, on_ll) != msg
    return errs


def bob_bac_error(n: int, m: int, q: float, eta: float, alpha_sq: float, p_b: float, trials: int,
                  seed: int, workers: int = 1) -> SimEstimate:
    """Bob's ML block error over fresh i.i.d. OOK codebooks (random-coding average)."""
    fn = partial(_bac_block, n=n, m=m, q=q, eta=eta, alpha_sq=alpha_sq, p_b=p_b)
    return estimate_from_counts(run_blocks(fn, trials, seed, workers), trials, seed)
