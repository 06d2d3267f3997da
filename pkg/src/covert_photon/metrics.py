"""Distinguishability and information measures.

All relative entropies are in nats. Use :func:`nats_to_bits` where a
formula is stated in log base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import xlogy

from .errors import CutoffMismatch, DomainError, SupportViolation
from .fock import DensityOperator, FockVector

BoundKind = Literal["pinsker_quantum", "pinsker_classical", "helstrom_exact"]


@dataclass(frozen=True)
class BinaryTestBound:
    """Lower bound on the equal-prior error of a binary test."""

    lower: float
    kind: BoundKind
    clamped: bool = False


def nats_to_bits(x: float) -> float:
    return x / math.log(2.0)


def _same_cutoff(a, b) -> None:
    if a.cutoff != b.cutoff:
        raise CutoffMismatch(f"cutoffs differ: {a.cutoff} vs {b.cutoff}")


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Half the trace norm of rho - sigma."""
    _same_cutoff(rho, sigma)
    d = rho.matrix - sigma.matrix
    d = 0.5 * (d + d.conj().T)
    lam = np.linalg.eigvalsh(d)
    return float(min(1.0, 0.5 * np.sum(np.abs(lam))))


def fidelity_pure(psi: FockVector, phi: FockVector) -> float:
    _same_cutoff(psi, phi)
    return float(min(1.0, abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2))


def log1p_minus_x(x):
    """log(1 + x) - x without cancellation near zero."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.1
    xs = x[small]
    # alternating series -x^2/2 + x^3/3 - ...; 24 terms reach 1e-25 at |x| < 0.1
    acc = np.zeros_like(xs)
    term = -xs * xs
    for k in range(2, 26):
        acc += term / k
        term = -term * xs
    out[small] = acc
    xl = x[~small]
    out[~small] = np.log1p(xl) - xl
    return out if out.ndim else float(out)


def qre_diagonal(p, q) -> float:
    """Relative entropy sum_k p_k ln(p_k / q_k) of two number-diagonal states.

    Evaluated as sum_k q_k g(p_k/q_k) + (sum p - sum q) with
    g(r) = r ln r - r + 1 >= 0, so every term is non-negative and small
    distances do not cancel.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise CutoffMismatch(f"length mismatch {p.shape} vs {q.shape}")
    for name, v in (("p", p), ("q", q)):
        if np.any(v < 0) or abs(v.sum() - 1.0) > 1e-8:
            raise DomainError(f"{name} is not a probability vector (sum={v.sum()!r})")
    if np.any((q == 0) & (p > 1e-15)):
        raise SupportViolation("p has mass outside the support of q")
    mask = q > 0
    r = p[mask] / q[mask]
    # the cancellation-free form only matters near r = 1
    g = xlogy(r, r) - r + 1.0
    near = np.abs(r - 1.0) < 0.5
    d = r[near] - 1.0
    g[near] = (1.0 + d) * log1p_minus_x(d) + d * d
    return float(max(0.0, np.sum(q[mask] * g) + (p.sum() - q.sum())))


def helstrom_pure(fidelity: float, prior_r: float = 0.5, prior_s: float = 0.5) -> float:
    """Optimal error discriminating two pure states with overlap ``fidelity``."""
    if not 0.0 <= fidelity <= 1.0 + 1e-12:
        raise DomainError(f"fidelity={fidelity} outside [0, 1]")
    if prior_r <= 0 or prior_s <= 0:
        raise DomainError("priors must be positive")
    tot = prior_r + prior_s
    pr, ps = prior_r / tot, prior_s / tot
    return 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - 4.0 * pr * ps * min(fidelity, 1.0))))


def helstrom_exact(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """Equal-prior minimum error, (1 - T(rho0, rho1)) / 2."""
    return 0.5 * (1.0 - trace_distance(rho0, rho1))


def _pinsker(total: float, kind: BoundKind) -> BinaryTestBound:
    if total < 0:
        raise DomainError(f"relative entropy {total} is negative")
    raw = 0.5 - math.sqrt(total / 8.0)
    return BinaryTestBound(max(0.0, raw), kind, clamped=raw <= 0.0)


def pinsker_quantum_lb(qre_total: float) -> BinaryTestBound:
    """1/2 - sqrt(D/8) for the n-copy quantum relative entropy D."""
    return _pinsker(qre_total, "pinsker_quantum")


def pinsker_classical_lb(cre_total: float) -> BinaryTestBound:
    return _pinsker(cre_total, "pinsker_classical")


def cre_bernoulli(p0: float, p1: float) -> float:
    """D(Bernoulli(p0) || Bernoulli(p1)) in nats."""
    if not (0.0 < p0 < 1.0 and 0.0 < p1 < 1.0):
        raise DomainError(f"Bernoulli parameters must lie in (0, 1), got {p0}, {p1}")
    return qre_diagonal([p0, 1.0 - p0], [p1, 1.0 - p1])
