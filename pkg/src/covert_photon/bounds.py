"""Closed-form covertness budgets, throughput and converse bounds.

Relative entropies are in nats, throughputs in bits. Results that are
probability bounds are clamped to [0, 1]; the returned records say so
when clamping happened.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError
from .metrics import log1p_minus_x

LN2 = math.log(2.0)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _thermal_domain(eta: float, n_b: float) -> None:
    _require(0.0 <= eta < 1.0, f"eta={eta} must lie in [0, 1)")
    _require(n_b > 0.0, "n_b=0 is the pure-loss regime: the thermal QRE diverges "
                        "and no covert budget exists against an ideal detector")


# ---------------------------------------------------------------------------
# Thermal channel: Willie's relative entropy and the covert budget
# ---------------------------------------------------------------------------

def qre_thermal_closed(nbar: float, eta: float, n_b: float) -> float:
    """D(rho0 || rho1) for thermal states of mean eta*N_B vs (1-eta)*nbar + eta*N_B.

    Uses the equivalent form (1+a) f(u/(1+a)) - a f(u/a) with
    f(x) = log(1+x) - x, a = eta*N_B and u = (1-eta)*nbar; the first-order
    terms cancel analytically instead of numerically.
    """
    _thermal_domain(eta, n_b)
    _require(nbar >= 0.0, f"nbar={nbar} is negative")
    if nbar == 0.0:
        return 0.0
    a = eta * n_b
    u = (1.0 - eta) * nbar
    if a == 0.0:  # eta = 0: vacuum against thermal
        return math.log1p(u)
    val = (1.0 + a) * log1p_minus_x(u / (1.0 + a)) - a * log1p_minus_x(u / a)
    return max(0.0, float(val))


def qre_thermal_taylor_ub(nbar: float, eta: float, n_b: float) -> float:
    """Second-order upper bound (1-eta)^2 nbar^2 / (2 a (1 + a)), a = eta*N_B."""
    _thermal_domain(eta, n_b)
    a = eta * n_b
    _require(a > 0.0, "eta*N_B must be positive for the Taylor bound")
    return (1.0 - eta) ** 2 * nbar ** 2 / (2.0 * a * (1.0 + a))


def covert_nbar_thermal(epsilon: float, eta: float, n_b: float, n: float) -> float:
    """Mean photons per symbol that keep Willie's Pinsker bound at 1/2 - epsilon."""
    _thermal_domain(eta, n_b)
    _require(0.0 <= epsilon < 0.5, f"epsilon={epsilon} must lie in [0, 1/2)")
    _require(n >= 1, f"n={n} must be at least 1")
    a = eta * n_b
    return 4.0 * epsilon * math.sqrt(a * (1.0 + a)) / (math.sqrt(n) * (1.0 - eta))


@dataclass(frozen=True)
class CovertBudget:
    epsilon: float
    delta: float
    n: float
    nbar: float

    @classmethod
    def thermal(cls, epsilon: float, delta: float, n: float, eta: float, n_b: float):
        _require(0.0 < delta < 1.0, f"delta={delta} must lie in (0, 1)")
        return cls(epsilon, delta, n, covert_nbar_thermal(epsilon, eta, n_b, n))


# ---------------------------------------------------------------------------
# Bob: homodyne reception and throughput
# ---------------------------------------------------------------------------

def homodyne_noise_power(eta: float, n_b: float) -> float:
    """AWGN variance (2(1-eta) N_B + 1) / (4 eta) seen by a homodyne Bob."""
    _require(0.0 < eta <= 1.0, f"eta={eta} must lie in (0, 1]")
    _require(n_b >= 0.0, f"n_b={n_b} is negative")
    return (2.0 * (1.0 - eta) * n_b + 1.0) / (4.0 * eta)


def _channel_bits(n: float, nbar: float, sigma_sq: float) -> float:
    return 0.5 * n * math.log1p(nbar / (2.0 * sigma_sq)) / LN2


def bob_error_ub_homodyne(bits: float, n: float, nbar: float, sigma_sq: float) -> float:
    """2^(B - (n/2) log2(1 + nbar / (2 sigma^2))); not clamped."""
    return 2.0 ** (bits - _channel_bits(n, nbar, sigma_sq))


def homodyne_nbar_for_error(bits: float, n: float, delta: float, sigma_sq: float) -> float:
    """Smallest nbar at which the homodyne error bound for ``bits`` equals ``delta``."""
    _require(0.0 < delta < 1.0, f"delta={delta} must lie in (0, 1)")
    _require(n >= 1 and sigma_sq > 0.0, "need n >= 1 and sigma_sq > 0")
    return 2.0 * sigma_sq * math.expm1(2.0 * LN2 * (bits - math.log2(delta)) / n)


@dataclass(frozen=True)
class ThroughputReport:
    """Covert bits over a homodyne link.

    ``bits_exact`` inverts the error bound exactly. ``c_c`` is the literal
    coefficient of sqrt(n) as usually quoted; the exact small-SNR coefficient
    is ``c_c_exact = c_c / ln 2``. ``o1_term`` is whatever is left over.
    """

    bits_exact: float
    c_d: float
    c_c: float
    c_c_exact: float
    sqrt_n_term: float
    o1_term: float
    nbar: float
    sigma_sq: float


def bits_homodyne(n: float, epsilon: float, delta: float, eta: float, n_b: float) -> ThroughputReport:
    _require(0.0 < delta < 1.0, f"delta={delta} must lie in (0, 1)")
    nbar = covert_nbar_thermal(epsilon, eta, n_b, n)
    sigma_sq = homodyne_noise_power(eta, n_b)
    c_d = math.log2(delta)
    bits = c_d + _channel_bits(n, nbar, sigma_sq)
    a = eta * n_b
    c_c = (epsilon * math.sqrt(a * (1.0 + a)) / (1.0 - eta)
           * 4.0 * eta / (2.0 * (1.0 - eta) * n_b + 1.0))
    c_c_exact = c_c / LN2
    sqrt_term = math.sqrt(n) * c_c_exact
    return ThroughputReport(bits, c_d, c_c, c_c_exact, sqrt_term,
                            bits - c_d - sqrt_term, nbar, sigma_sq)


# ---------------------------------------------------------------------------
# Converse: heterodyne radiometer and Holevo/Fano
# ---------------------------------------------------------------------------

class HeterodyneMoments(NamedTuple):
    mean: float
    variance: float
    variance_display: float


def heterodyne_c1(gamma: float, n_b: float) -> float:
    """Coefficient of the mean photon number in Var|y|^2 (exact antinormal moments)."""
    v = 1.0 + (1.0 - gamma) * n_b
    return 2.0 * gamma * v - gamma ** 2


def heterodyne_c1_display(gamma: float, n_b: float) -> float:
    """The commonly printed 2 gamma((2 + N_B)(1 - gamma) - 1); short by gamma^2 * 3."""
    return 2.0 * gamma * ((2.0 + n_b) * (1.0 - gamma) - 1.0)


def heterodyne_moments(nbar_i: float, var_i: float, gamma: float, n_b: float) -> HeterodyneMoments:
    """Mean and variance of |y|^2 for one heterodyne reading at Willie.

    ``nbar_i`` and ``var_i`` are the photon-number mean and variance of the
    input state; the channel has transmissivity ``gamma`` and thermal
    background ``n_b``. ``variance`` follows from the fourth antinormal
    moment <w^2 w^dag^2> and matches sampling; ``variance_display`` uses the
    printed c1 and does not.
    """
    _require(nbar_i >= 0.0 and var_i >= 0.0, "photon-number mean and variance must be >= 0")
    v = 1.0 + (1.0 - gamma) * n_b
    mean = v + gamma * nbar_i
    c2 = v * v
    var = gamma ** 2 * var_i + heterodyne_c1(gamma, n_b) * nbar_i + c2
    disp = gamma ** 2 * var_i + heterodyne_c1_display(gamma, n_b) * nbar_i + c2
    return HeterodyneMoments(mean, var, disp)


def radiometer_threshold(p_fa_target: float, n: float, gamma: float, n_b: float) -> tuple[float, float]:
    """(d, t): Chebyshev threshold for a target false-alarm rate, t = d / sqrt(n)."""
    _require(0.0 < p_fa_target <= 1.0, f"p_fa_target={p_fa_target} must lie in (0, 1]")
    d = (1.0 + (1.0 - gamma) * n_b) / math.sqrt(p_fa_target)
    return d, d / math.sqrt(n)


@dataclass(frozen=True)
class MissBound:
    """Chebyshev bound on the radiometer miss probability for one codeword."""

    value: float
    penultimate_display: float
    display: float
    vacuous: bool


def radiometer_md_ub(nbar_bar: float, var_ub: float, n: float, gamma: float,
                     n_b: float, d: float) -> MissBound:
    """Miss-probability bound for a codeword of average photon number ``nbar_bar``.

    ``value`` is the Chebyshev line (gamma^2 var + c1 nbar + c2) / (n (gamma nbar - t)^2)
    with exact moments; ``var_ub`` may be the codeword-average per-symbol variance
    since the line is linear in it. ``penultimate_display`` repeats the same
    line with the printed c1 and ``display`` is the printed simplification.
    """
    t = d / math.sqrt(n)
    gap = gamma * nbar_bar - t
    if gamma * math.sqrt(n) * nbar_bar <= d:
        return MissBound(1.0, 1.0, 1.0, vacuous=True)
    c2 = (1.0 + (1.0 - gamma) * n_b) ** 2
    exact = (gamma ** 2 * var_ub + heterodyne_c1(gamma, n_b) * nbar_bar + c2) / (n * gap * gap)
    penult = (gamma ** 2 * var_ub + heterodyne_c1_display(gamma, n_b) * nbar_bar + c2) / (n * gap * gap)
    disp = ((gamma * var_ub + heterodyne_c1_display(gamma, n_b) * nbar_bar)
            / (gamma * math.sqrt(n) * nbar_bar - d) ** 2)
    clamp = lambda x: min(1.0, max(0.0, x))
    return MissBound(clamp(exact), clamp(penult), clamp(disp), vacuous=False)


def holevo_coherent(x: float) -> float:
    """Entropy in bits of a thermal state with mean ``x``: log2(1+x) + x log2(1+1/x)."""
    _require(x >= 0.0, f"x={x} is negative")
    if x == 0.0:
        return 0.0
    return (math.log1p(x) + x * math.log1p(1.0 / x)) / LN2


def bob_error_lb_converse(n: float, rate_bits: float, kappa: float, eta: float, nbar_u: float) -> float:
    """Fano/Holevo lower bound on Bob's error over the low-power codeword subset.

    Multiply by ``kappa`` for the bound on the whole codebook.
    """
    _require(0.0 < kappa <= 1.0, f"kappa={kappa} must lie in (0, 1]")
    _require(rate_bits > 0.0, "rate must be positive")
    _require(nbar_u >= 0.0, "nbar_u must be non-negative")
    denom = math.log2(kappa) / n + rate_bits
    _require(denom > 0.0, "log2(kappa)/n + R must be positive")
    num = holevo_coherent(eta * nbar_u) + 1.0 / n
    return max(0.0, 1.0 - num / denom)


@dataclass(frozen=True)
class ConverseReport:
    fa_ub: float
    md_ub: float
    threshold_t: float
    bob_error_lb: float


def converse_report(p_fa_target: float, n: float, gamma: float, n_b: float, nbar_bar: float,
                    var_ub: float, rate_bits: float, kappa: float, eta: float) -> ConverseReport:
    d, t = radiometer_threshold(p_fa_target, n, gamma, n_b)
    md = radiometer_md_ub(nbar_bar, var_ub, n, gamma, n_b, d)
    bob = kappa * bob_error_lb_converse(n, rate_bits, kappa, eta, nbar_bar)
    return ConverseReport(min(1.0, p_fa_target), md.value, t, bob)


# ---------------------------------------------------------------------------
# Pure-loss channel
# ---------------------------------------------------------------------------

def willie_pe_pureloss(vacuum_overlaps: Sequence[float]) -> float:
    """Willie's error with an ideal vacuum detector: half the product of <0|rho_i|0>."""
    ov = np.asarray(vacuum_overlaps, dtype=float)
    _require(bool(np.all((ov >= 0) & (ov <= 1))), "overlaps must lie in [0, 1]")
    return 0.5 * float(np.exp(np.sum(np.log(ov)))) if np.all(ov > 0) else 0.0


def willie_pe_pureloss_ub(c: float, gamma: float) -> float:
    """(1/2) exp(-gamma c) with c = sum_i (1 - |a_0^(i)|^2)."""
    _require(c >= 0.0, "c must be non-negative")
    return 0.5 * math.exp(-gamma * c)


def _helstrom_floor(fid: float, prior_r: float, prior_s: float) -> float:
    tot = prior_r + prior_s
    rad = 1.0 - 4.0 * prior_r * prior_s / tot ** 2 * fid
    _require(rad >= -1e-15, "negative radicand")
    return 0.5 * tot * (1.0 - math.sqrt(max(0.0, rad)))


def _check_pureloss(c_r: float, c_s: float, prior_r: float, prior_s: float) -> None:
    _require(c_r >= 0.0 and c_s >= 0.0, "c_r, c_s must be non-negative")
    _require(prior_r > 0.0 and prior_s > 0.0, "priors must be positive")


def bob_error_lb_pureloss(c_r: float, c_s: float, prior_r: float = 0.5, prior_s: float = 0.5) -> float:
    """Bob's error lower bound as printed: fidelity floor 1 - (T_r + T_s)^2 / 4, T = sqrt(1 - e^-c).

    Not a valid bound: a single-symbol pair sqrt(1-x)|0> +- sqrt(x)|1> has
    Helstrom error below it. See :func:`bob_error_lb_pureloss_triangle`.
    """
    _check_pureloss(c_r, c_s, prior_r, prior_s)
    tr = math.sqrt(-math.expm1(-c_r))
    ts = math.sqrt(-math.expm1(-c_s))
    return _helstrom_floor(max(0.0, 1.0 - 0.25 * (tr + ts) ** 2), prior_r, prior_s)


def bob_error_lb_pureloss_triangle(c_r: float, c_s: float, prior_r: float = 0.5,
                                   prior_s: float = 0.5) -> float:
    """A valid replacement in the same variables.

    A codeword's trace distance from vacuum is sqrt(1 - prod_i |a_0^(i)|^2)
    <= sqrt(min(1, c)), since the product is at least 1 - c. The triangle
    inequality then gives fidelity >= 1 - (T_r + T_s)^2 between codewords.
    """
    _check_pureloss(c_r, c_s, prior_r, prior_s)
    tr = math.sqrt(min(1.0, c_r))
    ts = math.sqrt(min(1.0, c_s))
    return _helstrom_floor(max(0.0, 1.0 - (tr + ts) ** 2), prior_r, prior_s)


# ---------------------------------------------------------------------------
# Dark-count channel and OOK coding
# ---------------------------------------------------------------------------

def _darkcount_domain(eta: float, p_d: float) -> None:
    _require(0.0 <= eta < 1.0, f"eta={eta} must lie in [0, 1)")
    _require(0.0 < p_d < 1.0, f"p_d={p_d} must lie in (0, 1)")


def darkcount_click_prob(q: float, alpha_sq: float, eta: float, p_d: float) -> float:
    """Willie's per-slot click probability while Alice transmits OOK."""
    return p_d + q * (1.0 - p_d) * -math.expm1(-(1.0 - eta) * alpha_sq)


def cre_darkcount_ub(q: float, alpha_sq: float, eta: float, p_d: float) -> float:
    """Second-order upper bound (1-p_d)(q(1-eta)|alpha|^2)^2 / (2 p_d) on the per-slot CRE."""
    _darkcount_domain(eta, p_d)
    _require(0.0 < q <= 1.0 and alpha_sq >= 0.0, "need q in (0, 1] and alpha_sq >= 0")
    return (1.0 - p_d) * (q * (1.0 - eta) * alpha_sq) ** 2 / (2.0 * p_d)


def covert_nbar_darkcount(epsilon: float, eta: float, p_d: float, n: float) -> float:
    _darkcount_domain(eta, p_d)
    _require(0.0 <= epsilon < 0.5, f"epsilon={epsilon} must lie in [0, 1/2)")
    _require(n >= 1, f"n={n} must be at least 1")
    return 4.0 * epsilon / (math.sqrt(n) * (1.0 - eta)) * math.sqrt(p_d / (1.0 - p_d))


def ook_twostage_alpha(n: float, tau: float, epsilon: float, eta: float, p_d: float) -> float:
    """On-slot |alpha|^2 when only ``tau`` of ``n`` slots carry symbols."""
    _require(tau >= 1, "tau must be at least 1")
    _require(tau <= n, "tau cannot exceed n")
    return covert_nbar_darkcount(epsilon, eta, p_d, n) * n / tau


def gallager_e0_bac(s, q: float, eta: float, alpha_sq: float, p_b: float):
    """Gallager E0(s) in nats for OOK over Bob's binary asymmetric channel.

    Inputs |0> (prob 1-q) and |alpha> (prob q); Bob misses an on-symbol with
    prob exp(-eta|alpha|^2)(1-p_b) and dark-clicks with prob p_b.
    """
    s = np.asarray(s, dtype=float)
    _require(bool(np.all((s >= 0) & (s <= 1))), "s must lie in [0, 1]")
    _require(0.0 < q < 1.0 and 0.0 < p_b < 1.0, "q and p_b must lie in (0, 1)")
    e = 1.0 + s
    no_click = (1.0 - p_b) * (1.0 - q * -np.expm1(-eta * alpha_sq / e)) ** e
    on_click = -math.expm1(-eta * alpha_sq) + p_b * math.exp(-eta * alpha_sq)
    click = ((1.0 - q) * p_b ** (1.0 / e) + q * on_click ** (1.0 / e)) ** e
    out = -np.log(no_click + click)
    out = np.where(s == 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def gallager_e0_leading(s: float, q: float, eta: float, alpha_sq: float, p_b: float) -> float:
    """Small-|alpha|^2 leading term (1-q) q (1-p_b) s eta^2 |alpha|^4 / (2 p_b (1+s))."""
    return (1.0 - q) * q * (1.0 - p_b) * s * eta ** 2 * alpha_sq ** 2 / (2.0 * p_b * (1.0 + s))


def bob_error_ub_ook(n: float, rate_nats: float, s: float, e0: float) -> float:
    """exp(-n (E0(s) - s R)) clamped to [0, 1]."""
    _require(0.0 <= s <= 1.0, "s must lie in [0, 1]")
    return min(1.0, math.exp(-n * (e0 - s * rate_nats)))


def ook_error_bound(n: float, rate_nats: float, q: float, eta: float, alpha_sq: float,
                    p_b: float, step: float = 1e-3) -> tuple[float, float]:
    """Best Gallager bound over an s grid; returns (bound, s)."""
    s = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    e0 = gallager_e0_bac(s, q, eta, alpha_sq, p_b)
    expo = n * (e0 - s * rate_nats)
    i = int(np.argmax(expo))
    return min(1.0, math.exp(-expo[i])), float(s[i])
