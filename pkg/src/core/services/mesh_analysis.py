# src/core/services/mesh_analysis.py

"""
Resistive dual of the nodal analysis: elements v = f(i) driven by a current
source i_in, unknowns are the mesh currents of an explicit mesh basis, and the
equations are KVL around every mesh except the source mesh. The convex
potential is the content sum_s w * integral_0^{i_s / w} f.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from config import max_iters as configured_max_iters
from src.core.errors import CircuitError, DomainError
from src.core.models.characteristic import Characteristic
from src.core.models.circuit import INPUT_MESH, Circuit, Mesh
from src.core.services.alpha_analysis import alpha_solve, continuation_path
from src.core.services.newton import DampedNewton, NewtonSystem

logger = logging.getLogger(__name__)

ABS_TOL = 1e-12
REL_TOL = 1e-12
SMALL_CURRENT = 1e-12
# floating point units of error carried by one branch current
ROUNDING_ULPS = 4.0


@dataclass(frozen=True)
class MeshSolution:
    mesh_currents: Dict[str, float]
    branch_currents: Tuple[float, ...]
    branch_voltages: Tuple[float, ...]
    input_current: float
    input_voltage: float
    phi_meshes: Optional[float]  # only for a single-term f: v_in = D * phi * i_in^alpha
    residual_norm: float
    iterations: int


def mesh_basis_for(circuit: Circuit) -> Tuple[Mesh, ...]:
    """
    The circuit's mesh basis, checked: a source mesh named "in" closing through
    the port, every other mesh a closed loop, and no branch in more than two meshes.
    """
    if not circuit.meshes:
        raise CircuitError("circuit has no mesh basis (add .mesh lines to the netlist)")
    names = [m.name for m in circuit.meshes]
    if len(set(names)) != len(names):
        raise CircuitError(f"duplicate mesh ids in {names}")
    if INPUT_MESH not in names:
        raise CircuitError(f"mesh basis has no source mesh {INPUT_MESH!r}")

    incidence = circuit.incidence()
    index = {n: k for k, n in enumerate(circuit.nodes)}
    port = np.zeros(len(circuit.nodes))
    port[index[circuit.a]] = 1.0
    port[index[circuit.b]] = -1.0

    usage = np.zeros(len(circuit.branches), dtype=int)
    for mesh in circuit.meshes:
        boundary = np.zeros(len(circuit.nodes))
        for s, sign in mesh.members:
            boundary += sign * incidence[s]
            usage[s] += 1
        expected = port if mesh.name == INPUT_MESH else np.zeros_like(port)
        if not np.allclose(boundary, expected):
            raise CircuitError(f"mesh {mesh.name!r} is not a closed loop")

    overused = [int(s) + 1 for s in np.flatnonzero(usage > 2)]
    if overused:
        raise CircuitError(f"branches {overused} belong to more than two meshes")
    unused = [int(s) + 1 for s in np.flatnonzero(usage == 0)]
    if unused:
        logger.warning("mesh_basis_for: branches %s are in no mesh and carry no current", unused)
    return circuit.meshes


class _MeshSystem:
    """KVL over the non-source meshes; M maps mesh currents to branch currents."""

    def __init__(self, circuit: Circuit, f: Characteristic, i_in: float, meshes: Tuple[Mesh, ...]):
        self.f = f
        self.i_in = i_in
        self.weights = circuit.weights
        self.unknown = [m for m in meshes if m.name != INPUT_MESH]
        source = next(m for m in meshes if m.name == INPUT_MESH)

        self.M = np.zeros((len(circuit.branches), len(self.unknown)))
        for j, mesh in enumerate(self.unknown):
            for s, sign in mesh.members:
                self.M[s, j] += sign
        self.source = np.zeros(len(circuit.branches))
        for s, sign in source.members:
            self.source[s] += sign
        self.M_abs = np.abs(self.M)
        self.floor = SMALL_CURRENT * i_in if f.min_exponent < 1 else 0.0

    def currents(self, x: np.ndarray) -> np.ndarray:
        return self.M @ x + self.source * self.i_in

    def voltages(self, x: np.ndarray) -> np.ndarray:
        return self.f.currents(self.currents(x) / self.weights)

    def residual(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        v = self.voltages(x)
        return self.M.T @ v, self.M_abs.T @ np.abs(v)

    def noise(self, x: np.ndarray) -> np.ndarray:
        i = np.abs(self.currents(x)) / self.weights
        delta = ROUNDING_ULPS * np.finfo(float).eps * self.i_in / self.weights
        return self.M_abs.T @ (self.f.currents(i + delta) - self.f.currents(i))

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        g = self.f.slopes(self.currents(x) / self.weights, self.floor) / self.weights
        return self.M.T @ (g[:, None] * self.M)

    def potential(self, x: np.ndarray) -> float:
        return float(np.sum(self.weights * self.f.co_contents(self.currents(x) / self.weights)))

    def linear_start(self) -> np.ndarray:
        if not self.unknown:
            return np.zeros(0)
        resistance = self.M.T @ (self.M / self.weights[:, None])
        rhs = -self.M.T @ (self.source * self.i_in / self.weights)
        return np.linalg.lstsq(resistance, rhs, rcond=None)[0]


def mesh_solve(
    circuit: Circuit,
    f: Characteristic,
    i_in: float,
    initial: Optional[Mapping[str, float]] = None,
    max_iters: Optional[int] = None,
) -> MeshSolution:
    """
    1) check the mesh basis
    2) damped Newton on KVL, mesh currents limited to i_in per step
    3) v_in is the drop around the source mesh
    """
    if not i_in > 0:
        raise DomainError(f"i_in must be positive, got {i_in}")
    meshes = mesh_basis_for(circuit)
    system = _MeshSystem(circuit, f, i_in, meshes)

    if initial is not None:
        x0 = np.array([initial[m.name] for m in system.unknown], dtype=float)
    else:
        x0 = system.linear_start()

    newton = DampedNewton(
        NewtonSystem(
            residual=system.residual,
            jacobian=system.jacobian,
            potential=system.potential,
            noise=system.noise,
            abs_tol=ABS_TOL * max(1.0, f.evaluate(i_in)),
            rel_tol=REL_TOL,
            max_step=i_in,
        ),
        max_iters=max_iters or configured_max_iters(),
    )
    result = newton.solve(x0)

    currents = system.currents(result.x)
    voltages = system.voltages(result.x)
    input_voltage = float(system.source @ voltages)
    mesh_currents = {INPUT_MESH: i_in}
    mesh_currents.update({m.name: float(v) for m, v in zip(system.unknown, result.x)})

    phi = None
    if len(f.terms) == 1:
        coeff, alpha = f.terms[0]
        phi = input_voltage / (coeff * i_in ** alpha)
    logger.debug("mesh_solve: %d iterations, v_in = %.12g", result.iterations, input_voltage)
    return MeshSolution(
        mesh_currents=mesh_currents,
        branch_currents=tuple(float(i) for i in currents),
        branch_voltages=tuple(float(v) for v in voltages),
        input_current=i_in,
        input_voltage=input_voltage,
        phi_meshes=phi,
        residual_norm=result.residual_norm,
        iterations=result.iterations,
    )


def mesh_alpha_solve(circuit: Circuit, alpha: float, i_in: float = 1.0) -> MeshSolution:
    """Resistive alpha-circuit v = i^alpha, reached through the same alpha-continuation as the nodal side."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    solution = None
    for step in continuation_path(alpha):
        initial = solution.mesh_currents if solution is not None else None
        solution = mesh_solve(circuit, Characteristic.power_law(step), i_in, initial=initial)
    assert solution is not None
    return solution


def phi_meshes_from_nodes(phi_nodes_at: Callable[[float], float], alpha: float) -> float:
    """phi_meshes(alpha) = 1 / phi_nodes(1/alpha)^alpha."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return 1.0 / phi_nodes_at(1.0 / alpha) ** alpha


def phi_b6_closed_form(alpha: float) -> float:
    """
    fig_b1 by direct calculation: i2 = i1 / (1 + 2^(1/alpha)), the a-b element
    takes the rest of i_in, and
    phi = [2 + (1 + r)^alpha] / [1 + r + (2 + (1 + r)^alpha)^(1/alpha)]^alpha,  r = 2^(1/alpha).
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    r = 2.0 ** (1.0 / alpha)
    numerator = 2.0 + (1.0 + r) ** alpha
    return numerator / (1.0 + r + numerator ** (1.0 / alpha)) ** alpha


def fig_b1_mesh_ratios(alpha: float) -> Dict[str, float]:
    """i1 / i_in and i2 / i_in of fig_b1 in closed form."""
    r = 2.0 ** (1.0 / alpha)
    numerator = 2.0 + (1.0 + r) ** alpha
    i1 = (1.0 + r) / (1.0 + r + numerator ** (1.0 / alpha))
    return {"m1": i1, "m2": i1 / (1.0 + r)}


def convert_nodes_to_meshes(alpha: float, coeff: float, phi: float) -> Tuple[float, float, float]:
    """
    i = D phi v^a  <=>  v = D^(-1/a) phi^(-1/a) i^(1/a): with the mesh exponent
    alpha' = 1/a this is (alpha', D^-alpha', phi^-alpha'). Applied twice it is
    the identity, so it also converts meshes back to nodes.
    """
    if not (alpha > 0 and coeff > 0 and phi > 0):
        raise DomainError(f"conversion needs positive alpha, D and phi, got {alpha}, {coeff}, {phi}")
    target = 1.0 / alpha
    return target, coeff ** (-target), phi ** (-target)


convert_meshes_to_nodes = convert_nodes_to_meshes


def duality_gaps(nodal: Circuit, meshed: Circuit, alphas: List[float]) -> List[Dict[str, float]]:
    """Per alpha: phi_meshes from mesh_solve, from the nodal alpha-test at 1/alpha, and their gap."""
    rows = []
    for alpha in alphas:
        direct = mesh_alpha_solve(meshed, alpha).phi_meshes
        converted = phi_meshes_from_nodes(lambda a: alpha_solve(nodal, a).phi, alpha)
        rows.append({"alpha": alpha, "phi_mesh_solve": direct, "phi_from_nodes": converted, "gap": abs(direct - converted)})
    return rows
