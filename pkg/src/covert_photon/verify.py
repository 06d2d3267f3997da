"""Closed-form versus oracle checks behind ``covert-photon verify``."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import bounds, fock, metrics, oracles, sim

QRE_GRID = list(itertools.product((0.1, 0.5, 0.9), (1e-3, 0.1, 1.0), (1e-4, 1e-2, 0.1, 0.5)))
GAMMAS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class Check:
    name: str
    max_dev: float
    tol: float
    passed: bool


def random_fock_vector(rng: np.random.Generator, cutoff: int) -> fock.FockVector:
    z = rng.standard_normal(cutoff + 1) + 1j * rng.standard_normal(cutoff + 1)
    return fock.FockVector.normalized(z)


def qre_oracle_dev() -> float:
    worst = 0.0
    for eta, n_b, nbar in QRE_GRID:
        closed = bounds.qre_thermal_closed(nbar, eta, n_b)
        ref = oracles.thermal_qre_truncated(nbar, eta, n_b)
        worst = max(worst, abs(closed - ref) / ref)
    return worst


def taylor_dominance_dev() -> float:
    """Largest amount by which the closed form exceeds its Taylor bound (0 if never)."""
    worst = 0.0
    for eta, n_b, nbar in QRE_GRID:
        gap = bounds.qre_thermal_closed(nbar, eta, n_b) - bounds.qre_thermal_taylor_ub(nbar, eta, n_b)
        worst = max(worst, gap)
    return worst


def budget_identity_dev() -> float:
    worst = 0.0
    for eps, n, (eta, n_b) in itertools.product((0.01, 0.05, 0.1), (1e4, 1e8, 1e14),
                                                ((0.1, 1e-6), (0.5, 1.0), (0.9, 10.0))):
        nbar = bounds.covert_nbar_thermal(eps, eta, n_b, n)
        total = n * bounds.qre_thermal_taylor_ub(nbar, eta, n_b)
        worst = max(worst, abs(total / (8 * eps * eps) - 1.0))
    return worst


def beamsplitter_dev(states: int = 20, seed: int = 11) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        psi = random_fock_vector(rng, int(rng.integers(1, 13)))
        for g in GAMMAS:
            ours = fock.beamsplitter_willie_output(psi, g).matrix
            ref = oracles.willie_output_unitary(psi.projector().matrix, g)
            worst = max(worst, float(np.abs(ours - ref).max()))
    return worst


def output_diagonal_dev(states: int = 20, seed: int = 12) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        psi = random_fock_vector(rng, int(rng.integers(1, 21)))
        for g in GAMMAS:
            diag = fock.beamsplitter_willie_output(psi, g).diagonal()
            direct = np.array([fock.output_diagonal(psi, g, s) for s in range(psi.cutoff + 1)])
            worst = max(worst, float(np.abs(diag - direct).max()))
    return worst


def mean_scaling_dev(states: int = 20, seed: int = 13) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        psi = random_fock_vector(rng, int(rng.integers(1, 21)))
        m_in = fock.photon_moments(psi)[0]
        for g in GAMMAS:
            m_out = fock.photon_moments(fock.beamsplitter_willie_output(psi, g))[0]
            worst = max(worst, abs(m_out - g * m_in))
    return worst


def heterodyne_variance_dev() -> float:
    """Corrected |y|^2 variance against antinormal moments of the propagated state."""
    inputs = [fock.number_state(3, 3), fock.FockVector.normalized([1, 0, 1]),
              fock.FockVector.normalized([0.3, 0.5j, -0.2, 0.8])]
    worst = 0.0
    for psi, g, n_b in itertools.product(inputs, (0.25, 0.5, 0.9), (0.0, 1.0)):
        env = oracles.tail_rule_cutoff(n_b, tail=1e-14) if n_b else 0
        diag = oracles.thermal_loss_diagonal(psi, g, n_b, env)
        ref_mean, ref_var = oracles.antinormal_moments(diag)
        m_i, v_i = fock.photon_moments(psi)
        mom = bounds.heterodyne_moments(m_i, v_i, g, n_b)
        worst = max(worst, abs(mom.mean - ref_mean), abs(mom.variance - ref_var) / ref_var)
    return worst


def count_test_dev() -> float:
    worst = 0.0
    for n, (mu0, gn) in itertools.product((16, 64, 256), ((0.5, 0.05), (0.1, 0.02), (1.0, 0.3))):
        kmax = int(n * (mu0 + gn) * 8 + 200)
        ref = oracles.optimal_count_error_enumerated(oracles.geometric_total_pmf(mu0, n, kmax),
                                                     oracles.geometric_total_pmf(mu0 + gn, n, kmax))
        worst = max(worst, abs(sim.exact_count_test_error(mu0, mu0 + gn, n) - ref))
    return worst


def binomial_test_dev() -> float:
    worst = 0.0
    for n, p0, p1 in ((1000, 1e-3, 2e-3), (200, 0.05, 0.08), (5000, 1e-2, 1.1e-2)):
        k = np.arange(n + 1)
        ref = 0.5 * float(np.sum(np.minimum(stats.binom.pmf(k, n, p0), stats.binom.pmf(k, n, p1))))
        worst = max(worst, abs(sim.exact_binomial_error(n, p0, p1) - ref))
    return worst


def helstrom_pure_dev(pairs: int = 30, seed: int = 14) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        c = int(rng.integers(1, 9))
        a, b = random_fock_vector(rng, c), random_fock_vector(rng, c)
        exact = metrics.helstrom_exact(a.projector(), b.projector())
        worst = max(worst, abs(metrics.helstrom_pure(metrics.fidelity_pure(a, b)) - exact))
    return worst


def e0_origin_dev() -> float:
    return abs(bounds.gallager_e0_bac(0.0, 0.5, 0.5, 1e-3, 0.1))


CHECKS: list[tuple[str, Callable[[], float], float]] = [
    ("qre_closed_vs_truncated_rel", qre_oracle_dev, 1e-9),
    ("qre_taylor_dominance", taylor_dominance_dev, 0.0),
    ("budget_identity_rel", budget_identity_dev, 1e-12),
    ("beamsplitter_vs_unitary", beamsplitter_dev, 1e-12),
    ("output_diagonal_vs_matrix", output_diagonal_dev, 1e-12),
    ("willie_mean_scaling", mean_scaling_dev, 1e-10),
    ("heterodyne_moments_vs_fock", heterodyne_variance_dev, 1e-9),
    ("count_test_vs_enumeration", count_test_dev, 1e-9),
    ("binomial_test_vs_enumeration", binomial_test_dev, 1e-12),
    ("helstrom_pure_vs_trace", helstrom_pure_dev, 1e-10),
    ("gallager_e0_origin", e0_origin_dev, 0.0),
]


def run_checks(tolerance_scale: float = 1.0) -> list[Check]:
    out = []
    for name, fn, tol in CHECKS:
        dev = float(fn())
        scaled = tol * tolerance_scale
        out.append(Check(name, dev, scaled, bool(math.isfinite(dev) and dev <= scaled)))
    return out
