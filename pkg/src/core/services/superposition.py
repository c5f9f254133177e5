# src/core/services/superposition.py

"""
Analytical superposition: G(v_in) = sum_p D_p * phi(alpha_p) * v_in**alpha_p,
the input current of the alpha_p-circuits simply connected in parallel,
compared with the exact input current F(v_in) of the f-circuit.
"""

import heapq
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import CharacteristicError, FitError
from src.core.models.characteristic import Characteristic
from src.core.models.circuit import Circuit
from src.core.services.alpha_analysis import AlphaProfile, alpha_solve
from src.core.services.nodal_solver import DcSolution, solve_dc

logger = logging.getLogger(__name__)

FIT_POINTS = 16
FIT_SPAN = 100.0
FIT_LATTICE_TERMS = 6
FIT_MAX_CONDITION = 1e12
INSIDE_TOL = 1e-12


@dataclass(frozen=True)
class TermComparison:
    alpha: float
    D: float
    phi: float
    G_term: float


@dataclass(frozen=True)
class SuperpositionReport:
    v_in: float
    F: float
    G: float
    eta: float
    eta_nonlinear: float
    nonlinearity_degree: float
    bound: Optional[float]
    per_term: Tuple[TermComparison, ...]
    bound_normalized: bool = False
    eta_power: float = 0.0
    d: Dict[str, float] = field(default_factory=dict)

    def as_row(self) -> Dict[str, Optional[float]]:
        """Flat CSV row: the scalar fields, then one G_<alpha> and one d_<node> column each."""
        row: Dict[str, Optional[float]] = {
            "v_in": self.v_in,
            "F": self.F,
            "G": self.G,
            "eta": self.eta,
            "eta_nonlinear": self.eta_nonlinear,
            "nonlinearity_degree": self.nonlinearity_degree,
            "bound": self.bound,
        }
        for term in self.per_term:
            row[f"G_{term.alpha:g}"] = term.G_term
        for node, ratio in self.d.items():
            row[f"d_{node}"] = ratio
        return row


@dataclass(frozen=True)
class SmallDriveCheck:
    grid: List[float]
    ratios: List[float]
    deviations: List[float]
    expected_slope: float
    fitted_slope: Optional[float]  # None when F == G on the whole grid (ideal case)

    @property
    def ideal(self) -> bool:
        return self.fitted_slope is None

    def holds(self, slope_tol: float = 0.1) -> bool:
        if self.ideal:
            return True
        shrinking = all(later < earlier for earlier, later in zip(self.deviations, self.deviations[1:]))
        return shrinking and abs(self.fitted_slope - self.expected_slope) <= slope_tol


@dataclass(frozen=True)
class SeriesFit:
    exponents: List[float]
    coefficients: List[float]
    basis: List[float]
    basis_coefficients: List[float]
    condition: float
    grid: List[float]


@dataclass(frozen=True)
class IntermediateCheck:
    grid: List[float]
    d: Dict[str, List[float]]
    bounds: Dict[str, Tuple[float, float]]
    inside: Dict[str, bool]
    monotone: Dict[str, bool]
    growth: Dict[str, float]  # (d_k(v) - d_k(alpha_1)) / v**(alpha_2 - alpha_1) at the smallest v

    @property
    def ok(self) -> bool:
        return all(self.inside.values())


# ---- G itself ---------------------------------------------------------------

def _profiles(circuit: Circuit, f: Characteristic, workers: int = 1) -> List[AlphaProfile]:
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(lambda a: alpha_solve(circuit, a), f.exponents))


def superpose(circuit: Circuit, f: Characteristic, workers: int = 1) -> List[Tuple[float, float]]:
    """Coefficients of G as a quasi-polynomial in v_in: [(alpha_p, D_p * phi(alpha_p))]."""
    profiles = _profiles(circuit, f, workers)
    return [(alpha, coeff * p.phi) for (coeff, alpha), p in zip(f.terms, profiles)]


def evaluate_g(coefficients: Sequence[Tuple[float, float]], v_in: float) -> float:
    return math.fsum(c * v_in ** a for a, c in coefficients)


def split_input_current(circuit: Circuit, f: Characteristic, solution: DcSolution, side: str = "b") -> List[float]:
    """
    Term-wise split F = sum_p F_p^cnct of the exact input current: each branch
    current at the port node separated into its D_p v^alpha_p parts.
    """
    node = circuit.a if side == "a" else circuit.b
    at_port = solution.circuit.incident_branches(node)
    drops = np.array([solution.branch_voltages[s] for s in at_port])
    weights = solution.circuit.weights[at_port]
    return [float(p) for p in f.term_currents(drops) @ weights]


# ---- the report -------------------------------------------------------------

def report(circuit: Circuit, f: Characteristic, v_in: float, workers: int = 1) -> SuperpositionReport:
    """
    1) exact solve and the alpha_p-solves (independent tasks)
    2) G, eta (currents and powers), eta over the nonlinear parts
    3) nonlinearity degree from the a-side term split of the exact current
    4) the error bound for two-term f
    """
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        exact_future = pool.submit(solve_dc, circuit, f, v_in)
        profile_futures = [pool.submit(alpha_solve, circuit, a) for a in f.exponents]
        solution = exact_future.result()
        profiles = [fut.result() for fut in profile_futures]

    F = solution.input_current
    per_term = tuple(
        TermComparison(alpha=alpha, D=coeff, phi=p.phi, G_term=coeff * p.phi * v_in ** alpha)
        for (coeff, alpha), p in zip(f.terms, profiles)
    )
    G = math.fsum(t.G_term for t in per_term)
    eta = abs(F - G) / F
    eta_power = abs(v_in * F - v_in * G) / (v_in * F)

    leading = per_term[0].G_term
    nonlinear_f = F - leading
    eta_nonlinear = abs(F - G) / nonlinear_f if len(f.terms) > 1 and nonlinear_f > 0 else 0.0

    split = split_input_current(circuit, f, solution, side="a")
    nonlinearity_degree = math.fsum(split[1:]) / split[0] if len(split) > 1 and split[0] > 0 else 0.0

    bound: Optional[float] = None
    normalized = False
    if len(f.terms) == 2:
        (d_m, m), (d_n, n) = f.terms
        if d_m == 1.0 and d_n == 1.0:
            bound = error_bound(circuit, m, n, v_in, profiles=profiles)
        else:
            # v = s u, i = c j turns f into u**m + u**n
            s = (d_m / d_n) ** (1.0 / (n - m))
            c = d_m * s ** m
            bound = c * error_bound(circuit, m, n, v_in / s, profiles=profiles)
            normalized = True

    logger.info("report: v_in=%g F=%.10g G=%.10g eta=%.3e", v_in, F, G, eta)
    return SuperpositionReport(
        v_in=v_in,
        F=F,
        G=G,
        eta=eta,
        eta_nonlinear=eta_nonlinear,
        nonlinearity_degree=nonlinearity_degree,
        bound=bound,
        per_term=per_term,
        bound_normalized=normalized,
        eta_power=eta_power,
        d={n: solution.potentials[n] / v_in for n in circuit.internal_nodes},
    )


# ---- small-drive ratio F/G ------------------------------------------------

def statement1_check(circuit: Circuit, f: Characteristic, v_grid: Sequence[float]) -> SmallDriveCheck:
    """F(x)/G(x) on a grid descending toward 0; |ratio - 1| must vanish like x**(alpha_2 - alpha_1)."""
    grid = [float(x) for x in v_grid]
    if any(later >= earlier for earlier, later in zip(grid, grid[1:])):
        raise ValueError("v_grid must be strictly descending")
    if len(f.terms) < 2:
        raise CharacteristicError("statement1_check needs at least two terms")

    coefficients = superpose(circuit, f)
    ratios = [solve_dc(circuit, f, x).input_current / evaluate_g(coefficients, x) for x in grid]
    deviations = [abs(r - 1.0) for r in ratios]
    expected = f.exponents[1] - f.exponents[0]

    usable = [(x, dev) for x, dev in zip(grid, deviations) if dev > 1e-13]
    slope: Optional[float] = None
    if len(usable) >= 2:
        xs, devs = zip(*usable)
        slope = float(np.polyfit(np.log(xs), np.log(devs), 1)[0])
    elif usable:
        slope = math.nan
    return SmallDriveCheck(grid=grid, ratios=ratios, deviations=deviations, expected_slope=expected, fitted_slope=slope)


# ---- the error bound --------------------------------------------------------

def error_bound(
    circuit: Circuit,
    m: float,
    n: float,
    v_in: float,
    profiles: Optional[Sequence[AlphaProfile]] = None,
) -> float:
    """
    Upper bound on |F - G| for f = v**m + v**n from the two alpha-solutions:
    (1/v_in) * ( sum over {s}_1 of [v_s(n)^(n+1) - v_s(m)^(n+1)]
               + sum over {s}_2 of [v_s(m)^(m+1) - v_s(n)^(m+1)] ),
    {s}_1 the branches with v_s(n) >= v_s(m), {s}_2 the rest.
    """
    if m == n:
        return 0.0
    by_alpha = {p.alpha: p for p in (profiles or [])}
    prof_m = by_alpha.get(m) or alpha_solve(circuit, m)
    prof_n = by_alpha.get(n) or alpha_solve(circuit, n)

    total = 0.0
    for br in circuit.branches:
        v_m = abs(prof_m.d[br.start] - prof_m.d[br.end]) * v_in
        v_n = abs(prof_n.d[br.start] - prof_n.d[br.end]) * v_in
        if v_n >= v_m:
            total += br.weight * (v_n ** (n + 1) - v_m ** (n + 1))
        else:
            total += br.weight * (v_m ** (m + 1) - v_n ** (m + 1))
    return total / v_in


# ---- the series coefficients -------------------------------------------------

def _lattice(exponents: Sequence[float], size: int) -> List[float]:
    """The `size` smallest exponents alpha_1 + sum_p k_p (alpha_p - alpha_1), always including f's own."""
    base = exponents[0]
    gaps = sorted({a - base for a in exponents[1:]})
    if not gaps:
        return [base]
    found: List[float] = []
    heap = [0.0]
    seen = {0.0}
    while heap and len(found) < size:
        g = heapq.heappop(heap)
        if found and abs(base + g - found[-1]) <= 1e-9:
            continue
        found.append(base + g)
        for gap in gaps:
            nxt = round(g + gap, 12)
            if nxt not in seen:
                seen.add(nxt)
                heapq.heappush(heap, nxt)
    for a in exponents:
        if all(abs(a - b) > 1e-9 for b in found):
            found.append(a)
    return sorted(found)


def extract_series_coeffs(
    circuit: Circuit,
    f: Characteristic,
    exponents: Optional[Sequence[float]] = None,
    convergence_radius: Optional[float] = None,
    lattice_terms: int = FIT_LATTICE_TERMS,
) -> SeriesFit:
    """
    Numerical coefficients b_p of F(v) = sum b_p v**beta on a small-v grid.

    The grid is 16 log-spaced points over [top/100, top], top = radius/10;
    radius defaults to (D_1/D_2)**(1/(alpha_2 - alpha_1)). The fit basis is the
    exponent lattice so that the truncated tail does not leak into b_p; the
    returned coefficients are those at `exponents` (default: f's exponents).
    """
    exponents = list(exponents) if exponents is not None else list(f.exponents)
    if len(f.terms) > 1:
        (d1, a1), (d2, a2) = f.terms[0], f.terms[1]
        radius = convergence_radius if convergence_radius is not None else (d1 / d2) ** (1.0 / (a2 - a1))
    else:
        radius = convergence_radius if convergence_radius is not None else 1.0
    top = radius / 10.0
    grid = np.geomspace(top / FIT_SPAN, top, FIT_POINTS)

    basis = _lattice(list(f.exponents), lattice_terms) if len(f.terms) > 1 else [f.exponents[0]]
    for a in exponents:
        if all(abs(a - b) > 1e-9 for b in basis):
            raise FitError(f"exponent {a} is not in the fit basis {basis}", math.inf)

    values = np.array([solve_dc(circuit, f, float(v)).input_current for v in grid])
    t = grid / top
    design = np.column_stack([t ** b for b in basis]) / values[:, None]
    target = np.ones_like(values)
    condition = float(np.linalg.cond(design))
    if not np.isfinite(condition) or condition > FIT_MAX_CONDITION:
        raise FitError("series fit is ill-conditioned", condition)
    scaled, *_ = np.linalg.lstsq(design, target, rcond=None)
    coefficients = [float(c / top ** b) for c, b in zip(scaled, basis)]

    picked = [coefficients[min(range(len(basis)), key=lambda j: abs(basis[j] - a))] for a in exponents]
    logger.debug("extract_series_coeffs: basis=%s cond=%.3e coeffs=%s", basis, condition, coefficients)
    return SeriesFit(
        exponents=exponents,
        coefficients=picked,
        basis=basis,
        basis_coefficients=coefficients,
        condition=condition,
        grid=[float(v) for v in grid],
    )


def coefficient_errors(circuit: Circuit, f: Characteristic, **fit_options) -> List[Tuple[float, float, float, float]]:
    """Per exponent: (alpha_p, fitted b_p, G coefficient, |b_p - G_p| / b_p)."""
    fit = extract_series_coeffs(circuit, f, **fit_options)
    g = dict(superpose(circuit, f))
    rows = []
    for alpha, b in zip(fit.exponents, fit.coefficients):
        g_coeff = g[alpha]
        rows.append((alpha, b, g_coeff, abs(b - g_coeff) / abs(b)))
    return rows


# ---- diagnostics of the connected state -------------------------------------------

def sign_cancellation(circuit: Circuit, f: Characteristic, v_in: float) -> Tuple[List[float], bool]:
    """
    F_p^cnct - F_p per term (b-side split of the exact current against the
    alpha_p-circuit alone); for two terms the differences have opposite signs.
    """
    solution = solve_dc(circuit, f, v_in)
    split = split_input_current(circuit, f, solution, side="b")
    g_terms = [c * v_in ** a for a, c in superpose(circuit, f)]
    diffs = [s - g for s, g in zip(split, g_terms)]
    opposite = len(diffs) == 2 and diffs[0] * diffs[1] < 0
    return diffs, opposite


def intermediate_value_check(circuit: Circuit, f: Characteristic, v_grid: Sequence[float]) -> IntermediateCheck:
    """
    d_k(v_in) of the two-term f-circuit must lie between d_k(m) and d_k(n) of the
    separate alpha-circuits; also reports d_k's monotonicity along an ascending
    grid and the small-v growth (d_k - d_k(m)) / v**(n - m) at the smallest v.
    """
    if len(f.terms) != 2:
        raise CharacteristicError("intermediate_value_check needs a two-term characteristic")
    (_, m), (_, n) = f.terms
    grid = [float(v) for v in v_grid]
    prof_m, prof_n = alpha_solve(circuit, m), alpha_solve(circuit, n)

    solutions = [solve_dc(circuit, f, v) for v in grid]
    d = {k: [s.potentials[k] / v for s, v in zip(solutions, grid)] for k in circuit.internal_nodes}
    bounds = {k: (min(prof_m.d[k], prof_n.d[k]), max(prof_m.d[k], prof_n.d[k])) for k in circuit.internal_nodes}
    inside = {
        k: all(bounds[k][0] - INSIDE_TOL <= value <= bounds[k][1] + INSIDE_TOL for value in d[k])
        for k in circuit.internal_nodes
    }
    order = np.argsort(grid)
    monotone = {}
    growth = {}
    for k in circuit.internal_nodes:
        ordered = np.asarray(d[k])[order]
        diffs = np.diff(ordered)
        monotone[k] = bool(np.all(diffs >= -INSIDE_TOL) or np.all(diffs <= INSIDE_TOL))
        v_small = grid[int(order[0])]
        growth[k] = (float(ordered[0]) - prof_m.d[k]) / v_small ** (n - m)
    for k, ok in inside.items():
        if not ok:
            logger.warning("intermediate_value_check: d_%s leaves [%g, %g]", k, *bounds[k])
    return IntermediateCheck(grid=grid, d=d, bounds=bounds, inside=inside, monotone=monotone, growth=growth)
