# src/core/services/nodal_solver.py

"""
Exact DC solution of an f-circuit driven by v_in at the port (a, b).

Unknowns are the internal nodal potentials; equations are internal KCL. The
start point is the all-unit-conductance linear circuit, and the iteration is
the damped Newton of services/newton.py with the co-content as potential.
Potentials are kept in [0, v_in] (they always lie there for monotone f).
"""

import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from config import max_iters as configured_max_iters
from src.core.errors import DomainError
from src.core.models.characteristic import Characteristic
from src.core.models.circuit import Circuit, assert_valid
from src.core.services.newton import DampedNewton, NewtonSystem

logger = logging.getLogger(__name__)

ABS_TOL = 1e-12
REL_TOL = 1e-12
# branch drops below this (relative to v_in) trigger the diagonal regularization
SMALL_DROP = 1e-12
REGULARIZATION = 1e-9
# floating point units of error carried by one branch drop
ROUNDING_ULPS = 4.0


@dataclass(frozen=True)
class DcSolution:
    """
    circuit is the solved circuit with every branch oriented so its drop is
    nonnegative; branch tuples are indexed like circuit.branches.
    """
    circuit: Circuit
    characteristic: Characteristic
    v_in: float
    potentials: Dict[str, float]
    branch_voltages: Tuple[float, ...]
    branch_currents: Tuple[float, ...]
    input_current: float
    residual_norm: float
    iterations: int
    flipped: Tuple[int, ...] = ()

    @property
    def input_power(self) -> float:
        return self.v_in * self.input_current

    @property
    def dissipated_power(self) -> float:
        return float(np.dot(self.branch_voltages, self.branch_currents))

    def d(self) -> Dict[str, float]:
        """Voltage division ratios v_k / v_in."""
        return {node: value / self.v_in for node, value in self.potentials.items()}


class _NodalSystem:
    """Incidence-based KCL system; A is split into internal (K) and port columns."""

    def __init__(self, circuit: Circuit, f: Characteristic, v_in: float):
        self.circuit = circuit
        self.f = f
        self.v_in = v_in
        self.weights = circuit.weights
        incidence = circuit.incidence()
        index = {n: k for k, n in enumerate(circuit.nodes)}
        self.internal = [index[n] for n in circuit.internal_nodes]
        self.a_col = incidence[:, index[circuit.a]]
        self.A = incidence[:, self.internal]
        self.A_abs = np.abs(self.A)
        self.floor = SMALL_DROP * v_in if f.min_exponent < 1 else 0.0

    def drops(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x + self.a_col * self.v_in

    def branch_currents(self, x: np.ndarray) -> np.ndarray:
        return self.weights * self.f.currents(self.drops(x))

    def residual(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        currents = self.branch_currents(x)
        return self.A.T @ currents, self.A_abs.T @ np.abs(currents)

    def noise(self, x: np.ndarray) -> np.ndarray:
        """KCL residual left by rounding: a drop between two potentials near v_in is only known to ~eps * v_in."""
        u = np.abs(self.drops(x))
        delta = ROUNDING_ULPS * np.finfo(float).eps * self.v_in
        jitter = self.weights * (self.f.currents(u + delta) - self.f.currents(u))
        return self.A_abs.T @ jitter

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        u = self.drops(x)
        g = self.weights * self.f.slopes(u, self.floor)
        jac = self.A.T @ (g[:, None] * self.A)
        small = np.abs(u) < SMALL_DROP * self.v_in
        if np.any(small):
            rows = self.A_abs[small].sum(axis=0) > 0
            diag = np.diag(jac)
            reg = REGULARIZATION * max(float(np.max(diag)) if diag.size else 0.0, np.finfo(float).tiny)
            jac[rows, rows] += reg
        return jac

    def potential(self, x: np.ndarray) -> float:
        return float(np.sum(self.weights * self.f.co_contents(self.drops(x))))

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, 0.0, self.v_in)

    def linear_start(self) -> np.ndarray:
        """Potentials of the same graph with unit conductors (times multiplicity)."""
        if not self.internal:
            return np.zeros(0)
        lap = self.A.T @ (self.weights[:, None] * self.A)
        rhs = -self.A.T @ (self.weights * self.a_col * self.v_in)
        return np.linalg.solve(lap, rhs)


def linear_potentials(circuit: Circuit, v_in: float = 1.0) -> Dict[str, float]:
    """Nodal potentials of the linear (alpha = 1, D = 1) circuit."""
    system = _NodalSystem(circuit, Characteristic.power_law(1.0), v_in)
    return _full_potentials(circuit, system, system.linear_start())


def _full_potentials(circuit: Circuit, system: _NodalSystem, x: np.ndarray) -> Dict[str, float]:
    values = {circuit.a: system.v_in, circuit.b: 0.0}
    values.update({n: float(v) for n, v in zip(circuit.internal_nodes, x)})
    return {n: values[n] for n in circuit.nodes}


def solve_dc(
    circuit: Circuit,
    f: Characteristic,
    v_in: float,
    initial: Optional[Mapping[str, float]] = None,
    max_iters: Optional[int] = None,
) -> DcSolution:
    """
    Solve internal KCL for the nodal potentials with potential(a) = v_in and
    potential(b) = 0. `initial` (potentials by node) replaces the linear start.
    """
    if not v_in > 0:
        raise DomainError(f"v_in must be positive, got {v_in}")
    assert_valid(circuit)

    system = _NodalSystem(circuit, f, v_in)
    if initial is not None:
        x0 = np.array([initial[n] for n in circuit.internal_nodes], dtype=float)
    else:
        x0 = system.linear_start()

    newton = DampedNewton(
        NewtonSystem(
            residual=system.residual,
            jacobian=system.jacobian,
            potential=system.potential,
            noise=system.noise,
            abs_tol=ABS_TOL * max(1.0, f.evaluate(v_in)),
            rel_tol=REL_TOL,
            project=system.project,
        ),
        max_iters=max_iters or configured_max_iters(),
    )
    result = newton.solve(x0)
    logger.debug("solve_dc: %d iterations, |r| = %.3e", result.iterations, result.residual_norm)

    # orientation fix-up: stored drops must be nonnegative
    drops = system.drops(result.x)
    flipped = tuple(int(s) for s in np.flatnonzero(drops < -SMALL_DROP * v_in))
    oriented = circuit
    if flipped:
        logger.info("solve_dc: reoriented branches %s to nonnegative drops", list(flipped))
        oriented = circuit.with_flipped(flipped)
    voltages = np.abs(drops)
    currents = system.weights * np.array([f.evaluate(float(v)) for v in voltages])

    potentials = _full_potentials(circuit, system, result.x)
    at_b = input_current_from_potentials(oriented, f, potentials, side="b")
    at_a = input_current_from_potentials(oriented, f, potentials, side="a")
    if abs(at_a - at_b) > 1e-9 * max(abs(at_b), np.finfo(float).tiny):
        logger.warning("solve_dc: input current at a (%.12g) and at b (%.12g) disagree", at_a, at_b)

    return DcSolution(
        circuit=oriented,
        characteristic=f,
        v_in=v_in,
        potentials=potentials,
        branch_voltages=tuple(float(v) for v in voltages),
        branch_currents=tuple(float(i) for i in currents),
        input_current=at_b,
        residual_norm=result.residual_norm,
        iterations=result.iterations,
        flipped=flipped,
    )


def _side_currents(circuit: Circuit, f: Characteristic, potentials: Mapping[str, float], side: str) -> np.ndarray:
    """Per-branch signed currents flowing out of a (side='a') or into b (side='b'); zero elsewhere."""
    node = circuit.a if side == "a" else circuit.b
    out = np.zeros(len(circuit.branches))
    for s, br in enumerate(circuit.branches):
        if node not in (br.start, br.end):
            continue
        drop = potentials[br.start] - potentials[br.end]
        current = br.weight * float(f.currents(np.array([drop]))[0])
        # current leaving a is start->end when a is the start; current into b likewise
        leaves_start = br.start == node
        out[s] = current if (leaves_start == (side == "a")) else -current
    return out


def input_current_from_potentials(
    circuit: Circuit, f: Characteristic, potentials: Mapping[str, float], side: str = "b"
) -> float:
    """F(v_in) = sum of w * f(v_s'') over the branches incident to b (or, equally, to a)."""
    if side not in ("a", "b"):
        raise ValueError(f"side must be 'a' or 'b', got {side!r}")
    return float(np.sum(_side_currents(circuit, f, potentials, side)))


def co_content(circuit: Circuit, f: Characteristic, potentials: Mapping[str, float]) -> float:
    """Sum over branches of w * integral_0^{v_s} f(u) du."""
    drops = np.array([potentials[br.start] - potentials[br.end] for br in circuit.branches])
    return float(np.sum(circuit.weights * f.co_contents(drops)))
