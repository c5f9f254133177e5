# src/core/models/characteristic.py

"""
Quasi-polynomial conductor characteristics  i = f(v) = sum_p D_p * v**alpha_p.

Only the positivity convention is modelled: f is evaluated on v >= 0. The
solvers need the odd extension sign(v) * f(|v|) while iterating; it is kept in
the vectorised helpers at the bottom of the class and is not a separate type.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from src.core.errors import CharacteristicError, DomainError, SingularSlopeError

# Exponents closer than this are one exponent (float-parsed netlists).
EXPONENT_MERGE_TOL = 1e-12
INVERT_TOL = 1e-13

Term = Tuple[float, float]


@dataclass(frozen=True)
class Characteristic:
    """
    terms: tuple of (D_p, alpha_p), ascending alpha_p, distinct exponents,
    every D_p > 0 and alpha_p > 0. Build with Characteristic.from_terms().
    """
    terms: Tuple[Term, ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise CharacteristicError("characteristic needs at least one term")
        previous = -math.inf
        for coeff, alpha in self.terms:
            if not (math.isfinite(coeff) and math.isfinite(alpha)):
                raise CharacteristicError(f"non-finite term {coeff}:{alpha}")
            if coeff <= 0 or alpha <= 0:
                raise CharacteristicError(f"term {coeff}:{alpha} is not passive (need D > 0, alpha > 0)")
            if alpha - previous <= EXPONENT_MERGE_TOL:
                raise CharacteristicError("exponents must be strictly increasing; use from_terms() to merge")
            previous = alpha

    @classmethod
    def from_terms(cls, terms: Iterable[Term]) -> "Characteristic":
        """Sort by exponent and merge exponents equal within EXPONENT_MERGE_TOL (their D add up)."""
        merged: List[List[float]] = []
        for coeff, alpha in sorted(((float(d), float(a)) for d, a in terms), key=lambda t: t[1]):
            if merged and abs(alpha - merged[-1][1]) <= EXPONENT_MERGE_TOL:
                merged[-1][0] += coeff
            else:
                merged.append([coeff, alpha])
        return cls(tuple((c, a) for c, a in merged))

    @classmethod
    def power_law(cls, alpha: float, coeff: float = 1.0) -> "Characteristic":
        return cls(((float(coeff), float(alpha)),))

    @property
    def exponents(self) -> Tuple[float, ...]:
        return tuple(a for _, a in self.terms)

    @property
    def coefficients(self) -> Tuple[float, ...]:
        return tuple(d for d, _ in self.terms)

    @property
    def min_exponent(self) -> float:
        return self.terms[0][1]

    def scaled(self, factor: float) -> "Characteristic":
        """Every D_p multiplied by factor (> 0)."""
        if factor <= 0:
            raise CharacteristicError(f"scale factor must be positive, got {factor}")
        return Characteristic(tuple((d * factor, a) for d, a in self.terms))

    # ---- scalar operations -------------------------------------------------

    def evaluate(self, v: float) -> float:
        if v < 0:
            raise DomainError(f"characteristic evaluated at negative voltage {v}")
        if v == 0:
            return 0.0
        return math.fsum(d * v ** a for d, a in self.terms)

    def slope(self, v: float) -> float:
        if v < 0:
            raise DomainError(f"slope requested at negative voltage {v}")
        if v == 0:
            if self.min_exponent < 1:
                raise SingularSlopeError(
                    f"slope is infinite at v = 0 for exponent {self.min_exponent} < 1"
                )
            return math.fsum(d for d, a in self.terms if a == 1.0)
        return math.fsum(d * a * v ** (a - 1) for d, a in self.terms)

    def co_content(self, v: float) -> float:
        """Integral of f from 0 to v."""
        if v < 0:
            raise DomainError(f"co-content requested at negative voltage {v}")
        return math.fsum(d * v ** (a + 1) / (a + 1) for d, a in self.terms)

    def invert(self, i: float) -> float:
        """The unique v >= 0 with f(v) = i."""
        if i < 0:
            raise DomainError(f"cannot invert negative current {i}")
        if i == 0:
            return 0.0
        if len(self.terms) == 1:
            coeff, alpha = self.terms[0]
            return (i / coeff) ** (1.0 / alpha)

        total = sum(self.coefficients)
        hi = max(1.0, (i / total) ** (1.0 / self.min_exponent))
        while self.evaluate(hi) < i:
            hi *= 2.0
        v = brentq(lambda x: self.evaluate(x) - i, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        # one Newton polish; brentq stops on the bracket, not on the residual
        residual = self.evaluate(v) - i
        if abs(residual) > INVERT_TOL * max(1.0, i) and v > 0:
            v -= residual / self.slope(v)
        return v

    # ---- vectorised helpers for the solvers (odd extension) ---------------

    def currents(self, u: np.ndarray) -> np.ndarray:
        """sign(u) * f(|u|) element-wise."""
        magnitude = np.abs(u)
        out = np.zeros_like(magnitude)
        for coeff, alpha in self.terms:
            out += coeff * np.power(magnitude, alpha)
        return np.sign(u) * out

    def term_currents(self, u: np.ndarray) -> np.ndarray:
        """Shape (P, len(u)): the per-term contributions to currents(u)."""
        magnitude = np.abs(u)
        return np.array([np.sign(u) * coeff * np.power(magnitude, alpha) for coeff, alpha in self.terms])

    def slopes(self, u: np.ndarray, floor: float = 0.0) -> np.ndarray:
        """f'(|u|) element-wise; |u| is raised to `floor` first so sublinear terms stay finite."""
        magnitude = np.maximum(np.abs(u), floor)
        out = np.zeros_like(magnitude)
        for coeff, alpha in self.terms:
            if alpha == 1.0:
                out += coeff
            else:
                with np.errstate(divide="ignore"):
                    out += coeff * alpha * np.power(magnitude, alpha - 1.0)
        return out

    def co_contents(self, u: np.ndarray) -> np.ndarray:
        magnitude = np.abs(u)
        out = np.zeros_like(magnitude)
        for coeff, alpha in self.terms:
            out += coeff * np.power(magnitude, alpha + 1.0) / (alpha + 1.0)
        return out


def combine(characteristics: Sequence[Characteristic]) -> Characteristic:
    """
    Additive combination f = f_1 + f_2 + ... + f_P: the analytical side of
    short-circuiting the corresponding nodes of same-topology circuits.
    """
    if not characteristics:
        raise CharacteristicError("combine() needs at least one characteristic")
    return Characteristic.from_terms(t for f in characteristics for t in f.terms)
