# src/core/services/newton.py

"""
Damped Newton iteration shared by the nodal (KCL) and mesh (KVL) solvers.

Both systems are the gradient of a convex potential (co-content for nodes,
content for meshes), so J is symmetric positive semi-definite and the Newton
direction always descends. A step is accepted by halving until the residual
norm decreases; when halving stalls the potential itself drives an Armijo
line search.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from src.core.errors import ConvergenceError

logger = logging.getLogger(__name__)

MAX_HALVINGS = 40
MAX_ARMIJO = 60
ARMIJO_C = 1e-4
# relative residual accepted when the iterate cannot move any more (floating point floor)
STAGNATION_REL_TOL = 1e-8


@dataclass
class NewtonSystem:
    """
    residual(x) -> (r, scale): r is the equation residual, scale the per-equation
    magnitude of the terms it sums (for the relative criterion).
    jacobian(x) -> J.
    potential(x) -> convex objective whose gradient is r.
    noise(x) -> per-equation residual that rounding alone can leave; the
    relative criterion only counts residual above it.
    """
    residual: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
    jacobian: Callable[[np.ndarray], np.ndarray]
    potential: Callable[[np.ndarray], float]
    abs_tol: float
    rel_tol: float = 1e-12
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None
    max_step: Optional[float] = None
    noise: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    iterations: int
    residual_norm: float
    relative_residual: float


def _norm(r: np.ndarray) -> float:
    value = float(np.linalg.norm(r))
    return value if np.isfinite(value) else np.inf


def _relative(r: np.ndarray, scale: np.ndarray, noise: Optional[np.ndarray] = None) -> float:
    if r.size == 0:
        return 0.0
    excess = np.abs(r) if noise is None else np.maximum(np.abs(r) - noise, 0.0)
    return float(np.max(excess / np.maximum(scale, np.finfo(float).tiny)))


class DampedNewton:
    def __init__(self, system: NewtonSystem, max_iters: int):
        self.system = system
        self.max_iters = max_iters

    def _project(self, x: np.ndarray) -> np.ndarray:
        return self.system.project(x) if self.system.project is not None else x

    def _direction(self, x: np.ndarray, r: np.ndarray) -> np.ndarray:
        jac = self.system.jacobian(x)
        try:
            dx = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            logger.debug("singular Jacobian, falling back to least squares")
            dx = np.linalg.lstsq(jac, -r, rcond=None)[0]
        if self.system.max_step is not None:
            biggest = float(np.max(np.abs(dx))) if dx.size else 0.0
            if biggest > self.system.max_step:
                dx *= self.system.max_step / biggest
        return dx

    def _noise(self, x: np.ndarray) -> Optional[np.ndarray]:
        return self.system.noise(x) if self.system.noise is not None else None

    def converged(self, r: np.ndarray, scale: np.ndarray, noise: Optional[np.ndarray] = None) -> bool:
        if r.size == 0:
            return True
        limit = self.system.abs_tol if noise is None else np.maximum(self.system.abs_tol, noise)
        return bool(np.all(np.abs(r) <= limit)) and _relative(r, scale, noise) <= self.system.rel_tol

    def _line_search(self, x: np.ndarray, r: np.ndarray, dx: np.ndarray) -> Optional[np.ndarray]:
        norm0 = _norm(r)
        t = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = self._project(x + t * dx)
            r_new, _ = self.system.residual(candidate)
            n_new = _norm(r_new)
            if n_new < norm0 or n_new <= self.system.abs_tol:
                return candidate
            t *= 0.5

        logger.warning("residual halving stalled; falling back to potential line search")
        phi0 = self.system.potential(x)
        descent = float(r @ dx)
        t = 1.0
        for _ in range(MAX_ARMIJO):
            candidate = self._project(x + t * dx)
            phi = self.system.potential(candidate)
            if np.isfinite(phi) and phi <= phi0 + ARMIJO_C * t * descent:
                return candidate
            t *= 0.5
        return None

    def solve(self, x0: np.ndarray) -> NewtonResult:
        """
        1) Evaluate the residual; stop when both tolerances hold.
        2) Solve J dx = -r.
        3) Damp the step (residual halving, then Armijo on the potential).
        """
        x = self._project(np.array(x0, dtype=float))
        r, scale = self.system.residual(x)
        for iteration in range(self.max_iters + 1):
            if not np.all(np.isfinite(r)):
                raise ConvergenceError("non-finite residual", iteration, float("nan"))
            noise = self._noise(x)
            rel = _relative(r, scale, noise)
            logger.debug("newton iter %d |r|=%.3e rel=%.3e", iteration, _norm(r), rel)
            if self.converged(r, scale, noise):
                return NewtonResult(x, iteration, _norm(r), rel)
            if iteration == self.max_iters:
                break

            dx = self._direction(x, r)
            x_new = self._line_search(x, r, dx)
            if x_new is None or np.max(np.abs(x_new - x)) <= 4 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(x)))):
                # no representable progress: accept only at the floating point floor
                if rel <= STAGNATION_REL_TOL or float(np.max(np.abs(r))) <= self.system.abs_tol:
                    logger.debug("newton stagnated at rel=%.3e; accepting", rel)
                    return NewtonResult(x, iteration, _norm(r), rel)
                raise ConvergenceError("newton iteration stagnated", iteration, _norm(r))
            x = x_new
            r, scale = self.system.residual(x)

        raise ConvergenceError("newton iteration did not converge", self.max_iters, _norm(r))
