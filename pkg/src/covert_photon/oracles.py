"""Independent numerical oracles for cross-checking the closed forms.

Nothing here reuses the code path it is meant to check: the beamsplitter is
propagated with a matrix exponential of the two-mode generator, heterodyne
moments come from antinormal-ordered number-basis expectations, the thermal
relative entropy is summed in extended precision, and count distributions
are built by repeated convolution.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.linalg import expm

from . import fock


def beamsplitter_unitary(cutoff: int, gamma: float) -> np.ndarray:
    """exp(theta (a^dag e - a e^dag)) on two truncated modes, cos^2 theta = gamma.

    Mode a (first tensor factor) is Willie's output port. The generator
    conserves total photon number, so it is exponentiated one fixed-total
    block at a time; blocks with total <= cutoff are exact.
    """
    d = cutoff + 1
    theta = math.acos(math.sqrt(gamma))
    u = np.zeros((d * d, d * d))
    for total in range(2 * cutoff + 1):
        ms = np.arange(max(0, total - cutoff), min(cutoff, total) + 1)
        gen = np.zeros((ms.size, ms.size))
        for i, m in enumerate(ms):
            j = total - m
            if i + 1 < ms.size:  # a^dag e: |m, j> -> |m+1, j-1>
                gen[i + 1, i] += theta * math.sqrt((m + 1) * j)
            if i > 0:  # -a e^dag: |m, j> -> |m-1, j+1>
                gen[i - 1, i] -= theta * math.sqrt(m * (j + 1))
        idx = ms * d + (total - ms)
        u[np.ix_(idx, idx)] = expm(gen)
    return u


def willie_output_unitary(rho_in: np.ndarray, gamma: float, env: np.ndarray | None = None) -> np.ndarray:
    """Tr_B[U (rho_in x env) U^dag] with the beamsplitter unitary above.

    ``rho_in`` enters port a; ``env`` (vacuum by default) enters port e.
    Inputs must have total photon number <= cutoff for the truncation to be exact.
    """
    c = rho_in.shape[0] - 1
    if env is None:
        env = np.zeros_like(rho_in)
        env[0, 0] = 1.0
    # the input sits on the a-port, which couples into Willie with amplitude cos(theta)
    u = beamsplitter_unitary(c, gamma)
    joint = u @ np.kron(rho_in, env) @ u.conj().T
    joint = joint.reshape(c + 1, c + 1, c + 1, c + 1)
    return np.einsum("ijkj->ik", joint)


def antinormal_moments(diag: np.ndarray) -> tuple[float, float]:
    """(E|y|^2, Var|y|^2) of heterodyne readings of a number-diagonal state.

    Uses <a a^dag> = <N + 1> and <a^2 a^dag^2> = <(N + 1)(N + 2)>.
    """
    k = np.arange(diag.size)
    m1 = float(np.sum(diag * (k + 1)))
    m2 = float(np.sum(diag * (k + 1) * (k + 2)))
    return m1, m2 - m1 * m1


def thermal_loss_diagonal(psi: fock.FockVector, gamma: float, n_b: float, env_cutoff: int) -> np.ndarray:
    """Willie's photon-number distribution for input ``psi`` and a thermal environment.

    The environment is diagonal, so each environment number state is
    propagated as a pure two-mode vector and the results are mixed.
    """
    c = psi.cutoff + env_cutoff
    u = beamsplitter_unitary(c, gamma)
    amps = np.zeros(c + 1, dtype=complex)
    amps[: psi.cutoff + 1] = psi.amplitudes
    env_p = fock.thermal_probabilities(n_b, env_cutoff)
    out = np.zeros(c + 1)
    for j, w in enumerate(env_p):
        # u applied to amps (x) |j> only touches the columns (m, j)
        joint = (u[:, np.arange(c + 1) * (c + 1) + j] @ amps).reshape(c + 1, c + 1)
        out += w * np.sum(np.abs(joint) ** 2, axis=1)
    return out / env_p.sum()


def tail_rule_cutoff(*means: float, tail: float = 1e-30) -> int:
    """Smallest c with r^c <= ``tail`` for every mean; the mass beyond c is then r^(c+1)."""
    worst = max(means)
    if worst <= 0:
        return 1
    r = worst / (1.0 + worst)
    return max(1, int(math.ceil(math.log(tail) / math.log(r))))


def thermal_qre_truncated(nbar: float, eta: float, n_b: float, cutoff: int | None = None,
                          dps: int = 50) -> float:
    """QRE between the two number-diagonal thermal states by direct summation.

    Summed in ``dps``-digit arithmetic: at per-symbol values near 1e-11 a
    double-precision sum loses most of its digits to rounding.
    """
    m0 = eta * n_b
    m1 = (1.0 - eta) * nbar + eta * n_b
    if cutoff is None:
        cutoff = tail_rule_cutoff(m0, m1)
    with mpmath.workdps(dps):
        a, b = mpmath.mpf(m0), mpmath.mpf(m1)
        step = mpmath.log(a / b) - mpmath.log((1 + a) / (1 + b))
        base = mpmath.log((1 + b) / (1 + a))
        total = mpmath.mpf(0)
        mass = mpmath.mpf(0)
        for k in range(cutoff + 1):
            p = a ** k / (1 + a) ** (k + 1)
            total += p * (k * step + base)
            mass += p
        return float(total / mass)


def geometric_total_pmf(mu: float, n: int, kmax: int) -> np.ndarray:
    """pmf of the sum of n i.i.d. geometric(mean mu) counts on 0..kmax, by convolution."""
    g = fock.thermal_probabilities(mu, kmax)
    out = np.zeros(kmax + 1)
    out[0] = 1.0
    base, e = g, n
    while e:  # binary exponentiation of the convolution power
        if e & 1:
            out = np.convolve(out, base)[: kmax + 1]
        base = np.convolve(base, base)[: kmax + 1]
        e >>= 1
    return out


def optimal_count_error_enumerated(pmf0: np.ndarray, pmf1: np.ndarray) -> float:
    """Equal-prior minimum error of any test on a discrete statistic: sum min / 2.

    Both pmfs must cover essentially all of their mass.
    """
    return 0.5 * float(np.sum(np.minimum(pmf0, pmf1)))
