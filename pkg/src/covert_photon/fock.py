"""Pure and mixed single-mode states in a truncated photon-number basis.

States are immutable. Constructors that expand an infinite-support state
(coherent, thermal) refuse to build it when more than ``TRUNCATION_TOL`` of
the probability lies above the cutoff; smaller losses are renormalized away
and recorded in ``truncation_mass``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import stats
from scipy.special import gammaln, xlogy

from .errors import CutoffTooSmall, DomainError, InvalidState

TRUNCATION_TOL = 1e-6
NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-8
PSD_TOL = -1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FockVector:
    """Normalized pure state ``sum_k amplitudes[k] |k>`` for k = 0..cutoff."""

    amplitudes: np.ndarray
    truncation_mass: float = 0.0

    def __post_init__(self):
        amps = _frozen(np.atleast_1d(self.amplitudes))
        if amps.ndim != 1 or amps.size == 0:
            raise InvalidState("amplitudes must be a non-empty 1-d sequence")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidState(f"state norm {norm!r} is not 1; use FockVector.normalized")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, truncation_mass: float = 0.0) -> "FockVector":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.sqrt(np.sum(np.abs(amps) ** 2))
        if norm == 0:
            raise InvalidState("zero vector")
        return cls(amps / norm, truncation_mass)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def projector(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()),
                               self.truncation_mass)


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite matrix in the number basis."""

    matrix: np.ndarray
    truncation_mass: float = 0.0

    def __post_init__(self):
        m = _frozen(np.atleast_2d(self.matrix))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidState("density matrix must be square")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise InvalidState(f"matrix not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidState(f"trace {tr!r} differs from 1")
        lam_min = np.linalg.eigvalsh(m)[0]
        if lam_min < PSD_TOL:
            raise InvalidState(f"negative eigenvalue {lam_min:.3g}")
        object.__setattr__(self, "matrix", m)

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0] - 1

    def diagonal(self) -> np.ndarray:
        return np.clip(np.diag(self.matrix).real, 0.0, None)


State = Union[FockVector, DensityOperator]


@dataclass(frozen=True)
class ChannelParams:
    """Link parameters.

    ``eta`` is Alice-to-Bob power transmissivity, ``gamma`` the fraction of
    Alice's power Willie captures (defaults to everything Bob misses),
    ``n_b`` the thermal photons per mode and ``p_d`` Willie's per-slot dark
    click probability.
    """

    eta: float
    n_b: float = 0.0
    gamma: float | None = None
    p_d: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta={self.eta} outside [0, 1]")
        if self.gamma is None:
            object.__setattr__(self, "gamma", 1.0 - self.eta)
        if not 0.0 < self.gamma <= 1.0 - self.eta + 1e-12:
            raise DomainError(f"gamma={self.gamma} outside (0, 1 - eta]")
        if self.n_b < 0:
            raise DomainError(f"n_b={self.n_b} is negative")
        if not 0.0 <= self.p_d < 1.0:
            raise DomainError(f"p_d={self.p_d} outside [0, 1)")

    @property
    def willie_noise(self) -> float:
        """Mean thermal photons reaching Willie per mode, (1 - gamma) N_B."""
        return (1.0 - self.gamma) * self.n_b


def _check_cutoff(cutoff: int) -> None:
    if int(cutoff) != cutoff or cutoff < 0:
        raise DomainError(f"cutoff must be a non-negative integer, got {cutoff}")


def number_state(k: int, cutoff: int) -> FockVector:
    _check_cutoff(cutoff)
    if not 0 <= k <= cutoff:
        raise CutoffTooSmall(f"|{k}> does not fit below cutoff {cutoff}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[k] = 1.0
    return FockVector(amps)


def vacuum(cutoff: int) -> DensityOperator:
    return number_state(0, cutoff).projector()


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Exact, unnormalized <k|alpha> for k = 0..cutoff."""
    k = np.arange(cutoff + 1)
    r = abs(alpha)
    log_mag = -0.5 * r * r + xlogy(k, r) - 0.5 * gammaln(k + 1)
    return np.exp(log_mag) * np.exp(1j * k * np.angle(alpha))


def coherent_state(alpha: complex, cutoff: int) -> FockVector:
    _check_cutoff(cutoff)
    tail = float(stats.poisson.sf(cutoff, abs(alpha) ** 2)) if alpha != 0 else 0.0
    if tail > TRUNCATION_TOL:
        raise CutoffTooSmall(
            f"coherent state |alpha|^2={abs(alpha) ** 2:g} loses {tail:.3g} above cutoff {cutoff}")
    return FockVector.normalized(coherent_amplitudes(alpha, cutoff), tail)


def thermal_probabilities(nbar: float, cutoff: int) -> np.ndarray:
    """Bose-Einstein weights nbar^k / (1 + nbar)^(k+1), not renormalized."""
    if nbar < 0:
        raise DomainError(f"nbar={nbar} is negative")
    k = np.arange(cutoff + 1)
    return np.exp(xlogy(k, nbar) - (k + 1) * np.log1p(nbar))


def thermal_tail(nbar: float, cutoff: int) -> float:
    return (nbar / (1.0 + nbar)) ** (cutoff + 1)


def thermal_state(nbar: float, cutoff: int) -> DensityOperator:
    _check_cutoff(cutoff)
    p = thermal_probabilities(nbar, cutoff)
    tail = thermal_tail(nbar, cutoff)
    if tail > TRUNCATION_TOL:
        raise CutoffTooSmall(f"thermal nbar={nbar:g} loses {tail:.3g} above cutoff {cutoff}")
    return DensityOperator(np.diag(p / p.sum()).astype(complex), tail)


def _splitting_amplitudes(cutoff: int, gamma: float) -> np.ndarray:
    """W[m, j] = sqrt(C(m+j, j) gamma^m (1-gamma)^j), zero where m + j > cutoff.

    Row index m counts photons sent to Willie, column j photons left for Bob.
    """
    m = np.arange(cutoff + 1)[:, None]
    j = np.arange(cutoff + 1)[None, :]
    k = m + j
    log_w = 0.5 * (gammaln(k + 1) - gammaln(m + 1) - gammaln(j + 1)
                   + xlogy(m, gamma) + xlogy(j, 1.0 - gamma))
    w = np.exp(log_w)
    w[k > cutoff] = 0.0
    return w


def beamsplitter_willie_output(psi: FockVector, gamma: float) -> DensityOperator:
    """Willie's reduced state when ``psi`` meets vacuum on a beamsplitter.

    ``gamma`` is the power fraction routed to Willie; Bob's arm is traced out.
    """
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma={gamma} outside [0, 1]")
    c = psi.cutoff
    w = _splitting_amplitudes(c, gamma)
    # joint amplitude Psi[m, j] = a_{m+j} W[m, j]
    idx = np.arange(c + 1)[:, None] + np.arange(c + 1)[None, :]
    a = np.concatenate([psi.amplitudes, np.zeros(c + 1, dtype=complex)])
    joint = a[idx] * w
    rho = joint @ joint.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(rho, psi.truncation_mass)


def output_diagonal(psi: FockVector, gamma: float, s: int) -> float:
    """<s| rho^W |s> = sum_k |a_k|^2 C(k, s) (1-gamma)^(k-s) gamma^s."""
    if not 0 <= s <= psi.cutoff:
        raise DomainError(f"s={s} outside 0..{psi.cutoff}")
    k = np.arange(s, psi.cutoff + 1)
    log_b = (gammaln(k + 1) - gammaln(s + 1) - gammaln(k - s + 1)
             + xlogy(k - s, 1.0 - gamma) + xlogy(s, gamma))
    return float(np.sum(psi.probabilities()[s:] * np.exp(log_b)))


def vacuum_overlap(rho: DensityOperator) -> float:
    return float(min(1.0, max(0.0, rho.matrix[0, 0].real)))


def husimi_q(rho: DensityOperator, alpha: complex, check_probe: bool = True) -> float:
    """Q(alpha) = <alpha|rho|alpha> / pi.

    The probe uses exact (unrenormalized) coefficients <k|alpha>. With
    ``check_probe`` the call fails when the probe itself would lose more than
    ``TRUNCATION_TOL`` above the cutoff.
    """
    if check_probe and alpha != 0:
        tail = float(stats.poisson.sf(rho.cutoff, abs(alpha) ** 2))
        if tail > TRUNCATION_TOL:
            raise CutoffTooSmall(f"probe |{alpha}> truncates {tail:.3g} at cutoff {rho.cutoff}")
    return float(husimi_q_grid(rho, np.asarray([alpha]))[0])


def husimi_q_grid(rho: DensityOperator, alphas: np.ndarray) -> np.ndarray:
    """Vectorized Q over an array of points; no probe truncation check."""
    alphas = np.asarray(alphas, dtype=complex)
    flat = alphas.ravel()
    k = np.arange(rho.cutoff + 1)
    r = np.abs(flat)[:, None]
    log_mag = -0.5 * r * r + xlogy(k[None, :], r) - 0.5 * gammaln(k + 1)[None, :]
    v = np.exp(log_mag) * np.exp(1j * k[None, :] * np.angle(flat)[:, None])
    q = np.sum((v.conj() @ rho.matrix) * v, axis=1).real / np.pi
    return q.reshape(alphas.shape)


def photon_moments(state: State) -> tuple[float, float]:
    """(mean, variance) of the photon-number distribution."""
    p = state.probabilities() if isinstance(state, FockVector) else state.diagonal()
    k = np.arange(p.size)
    mean = float(np.sum(k * p))
    return mean, float(np.sum(k * k * p) - mean * mean)
