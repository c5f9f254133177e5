# src/core/services/alpha_analysis.py

"""
The alpha-test: solve the pure power-law circuit f(v) = v**alpha at v_in = 1,
read off the division ratios d_k(alpha) = v_k / v_in and the coefficient
phi(alpha) with F_alpha(v_in) = D * phi(alpha) * v_in**alpha.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from src.core.models.characteristic import Characteristic
from src.core.models.circuit import Circuit
from src.core.services.nodal_solver import input_current_from_potentials, solve_dc

logger = logging.getLogger(__name__)

HARDLIMITER_ALPHA = 64.0
RICHARDSON_ALPHAS = (16.0, 32.0, 64.0)
# alpha outside this window is reached by warm-started continuation from alpha = 1
DIRECT_WINDOW = (0.5, 2.0)
CONTINUATION_RATIO = 2.0


@dataclass(frozen=True)
class AlphaProfile:
    alpha: float
    d: Dict[str, float]
    phi: float


@dataclass(frozen=True)
class DSweep:
    alphas: List[float]
    sequences: Dict[str, List[float]]
    verdicts: Dict[str, str]  # "constant" | "nondecreasing" | "nonincreasing" | "violation"

    @property
    def violations(self) -> List[str]:
        return [node for node, verdict in self.verdicts.items() if verdict == "violation"]


def continuation_path(alpha: float) -> List[float]:
    lo, hi = DIRECT_WINDOW
    if lo <= alpha <= hi:
        return [alpha]
    path: List[float] = []
    current = 1.0
    if alpha > hi:
        while current * CONTINUATION_RATIO < alpha:
            current *= CONTINUATION_RATIO
            path.append(current)
    else:
        while current / CONTINUATION_RATIO > alpha:
            current /= CONTINUATION_RATIO
            path.append(current)
    path.append(alpha)
    return path


def alpha_solve(circuit: Circuit, alpha: float, v_in: float = 1.0) -> AlphaProfile:
    """
    Solve the alpha-circuit (D = 1) at v_in and return d_k and phi. d and phi
    do not depend on v_in or D; v_in is exposed only to check that.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")

    initial = None
    solution = None
    for step in continuation_path(alpha):
        solution = solve_dc(circuit, Characteristic.power_law(step), v_in, initial=initial)
        initial = solution.potentials
    assert solution is not None

    d = solution.d()
    unit = {n: value for n, value in d.items()}
    f = Characteristic.power_law(alpha)
    phi_b = input_current_from_potentials(circuit, f, unit, side="b")
    phi_a = input_current_from_potentials(circuit, f, unit, side="a")
    if abs(phi_a - phi_b) > 1e-9 * phi_b:
        logger.warning("alpha_solve: phi from a-side %.12g differs from b-side %.12g", phi_a, phi_b)
    return AlphaProfile(alpha=alpha, d=d, phi=phi_b)


def phi_closed_form_fig_a1(alpha: float) -> float:
    """phi(alpha) = 1 + (1 + 2^-alpha) / (1 + (1 + 2^-alpha)^(1/alpha))^alpha for fig_a1."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    q = 1.0 + 2.0 ** (-alpha)
    return 1.0 + q / (1.0 + q ** (1.0 / alpha)) ** alpha


def d_o_closed_form_fig_a1(alpha: float) -> float:
    """d_o(alpha) = 1 / (1 + (1 + 2^-alpha)^(1/alpha)); equals 2 / (2 + 9^(1/3)) at alpha = 3."""
    return 1.0 / (1.0 + (1.0 + 2.0 ** (-alpha)) ** (1.0 / alpha))


def _monotonicity(values: Sequence[float], tol: float = 1e-10) -> str:
    diffs = np.diff(np.asarray(values, dtype=float))
    if diffs.size == 0 or np.all(np.abs(diffs) <= tol):
        return "constant"
    if np.all(diffs >= -tol):
        return "nondecreasing"
    if np.all(diffs <= tol):
        return "nonincreasing"
    return "violation"


def d_sweep(circuit: Circuit, alphas: Sequence[float], workers: int = 1) -> DSweep:
    """d_k(alpha) for every internal node over an ascending alpha grid, with a monotonicity verdict per node."""
    alphas = [float(a) for a in alphas]
    if any(a <= 0 for a in alphas):
        raise ValueError("every alpha must be positive")
    if any(later < earlier for earlier, later in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be ascending")

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        profiles = list(pool.map(lambda a: alpha_solve(circuit, a), alphas))

    sequences = {n: [p.d[n] for p in profiles] for n in circuit.internal_nodes}
    verdicts = {n: _monotonicity(seq) for n, seq in sequences.items()}
    for node, verdict in verdicts.items():
        if verdict == "violation":
            logger.warning("d_sweep: d_%s(alpha) is not monotone: %s", node, sequences[node])
    return DSweep(alphas=alphas, sequences=sequences, verdicts=verdicts)


def hardlimiter_limit(circuit: Circuit, extrapolate: bool = False) -> Dict[str, float]:
    """
    lim_{alpha -> inf} d_k, taken as the alpha = 64 solution. With extrapolate,
    Richardson over alpha in {16, 32, 64} assuming an O(1/alpha) error, which is
    how the voltage of a large-alpha element follows its current.
    """
    if not extrapolate:
        return alpha_solve(circuit, HARDLIMITER_ALPHA).d

    profiles = [alpha_solve(circuit, a) for a in RICHARDSON_ALPHAS]
    limit: Dict[str, float] = {}
    for node in circuit.nodes:
        d16, d32, d64 = (p.d[node] for p in profiles)
        # geometric alpha grid: d_inf = 2 d64 - d32 cancels the 1/alpha term
        estimate = 2.0 * d64 - d32
        # fall back to the plain value when the sequence is already flat or erratic
        if not math.isfinite(estimate) or abs(d64 - d32) > abs(d32 - d16) + 1e-12:
            estimate = d64
        limit[node] = min(1.0, max(0.0, estimate))
    return limit
