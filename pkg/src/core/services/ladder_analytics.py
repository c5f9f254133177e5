# src/core/services/ladder_analytics.py

"""
Infinite ladder in closed form.

With lambda = v_in / v_cd the ratio between consecutive sections, the ladder
repeats itself when (lambda^alpha - 1)(lambda - 1)^alpha = (2 lambda)^alpha,
and phi(alpha) = ((lambda - 1) / (2 lambda))^alpha. The finite ladder(N) built
in models/canonical.py is the independent numerical check.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from src.core.models.canonical import fig_a1, ladder
from src.core.models.characteristic import Characteristic
from src.core.services.alpha_analysis import alpha_solve
from src.core.services.superposition import extract_series_coeffs, report

logger = logging.getLogger(__name__)

BRACKET_LOW = 1.0 + 1e-9
BRACKET_HIGH = 8.0
MAX_EXPANSIONS = 60
NEWTON_POLISH_STEPS = 2

# radius of convergence of the ladder's series in v_in (times D1/D2)
SERIES_RADIUS = 0.574
FIT_SECTIONS = 100


@dataclass(frozen=True)
class LadderResult:
    alpha: float
    lambda_: float
    phi: float  # includes the +1 of the a-b conductor when central
    central: bool = False

    def as_row(self) -> Dict[str, float]:
        return {"alpha": self.alpha, "lambda": self.lambda_, "phi": self.phi}


def _g(lam: float, alpha: float) -> float:
    return math.log(lam ** alpha - 1.0) + alpha * math.log(lam - 1.0) - alpha * math.log(2.0 * lam)


def _g_prime(lam: float, alpha: float) -> float:
    return alpha * lam ** (alpha - 1.0) / (lam ** alpha - 1.0) + alpha / (lam - 1.0) - alpha / lam


def lambda_root(alpha: float) -> float:
    """The largest root > 1 of (lambda^alpha - 1)(lambda - 1)^alpha = (2 lambda)^alpha."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")

    hi = BRACKET_HIGH
    for _ in range(MAX_EXPANSIONS):
        if _g(hi, alpha) > 0:
            break
        hi *= 2.0
    else:
        raise RuntimeError(f"lambda bracket did not close for alpha={alpha}")

    lam = brentq(_g, BRACKET_LOW, hi, args=(alpha,), xtol=1e-13, rtol=4 * np.finfo(float).eps)
    for _ in range(NEWTON_POLISH_STEPS):
        slope = _g_prime(lam, alpha)
        if slope == 0 or not math.isfinite(slope):
            break
        lam -= _g(lam, alpha) / slope
    return lam


def ladder_phi(alpha: float) -> float:
    lam = lambda_root(alpha)
    return ((lam - 1.0) / (2.0 * lam)) ** alpha


def ladder_result(alpha: float, central: bool = False) -> LadderResult:
    lam = lambda_root(alpha)
    phi = ((lam - 1.0) / (2.0 * lam)) ** alpha
    return LadderResult(alpha=alpha, lambda_=lam, phi=phi + (1.0 if central else 0.0), central=central)


def ladder_G_coeffs(f: Characteristic, central: bool = False) -> List[Tuple[float, float]]:
    """[(alpha_p, D_p * (phi(alpha_p) + [central]))]; the a-b conductor adds f(v_in) itself."""
    extra = 1.0 if central else 0.0
    return [(alpha, coeff * (ladder_phi(alpha) + extra)) for coeff, alpha in f.terms]


def truncation_convergence(alpha: float, sections: Sequence[int], central: bool = False) -> List[float]:
    """phi_N of the finite ladder(N) for each N, from the numerical alpha-test."""
    values = []
    for n in sections:
        if n < 1:
            raise ValueError(f"ladder needs N >= 1, got {n}")
        phi = alpha_solve(ladder(n, central), alpha).phi
        logger.info("truncation_convergence: alpha=%g N=%d phi=%.12g", alpha, n, phi)
        values.append(phi)
    return values


def series_nonlinearity_degree(b1: float, b2: float, v_in: float) -> float:
    """Quadratic over linear term of a series b1 v + b2 v^2 + ...: (b2 / b1) * v_in."""
    return b2 / b1 * v_in


def _ladder_quadratic_error(central: bool) -> Tuple[float, float, float]:
    """(fitted b2, G's quadratic coefficient, relative error) for f = v + v^2 on ladder(100)."""
    f = Characteristic.from_terms([(1.0, 1.0), (1.0, 2.0)])
    fit = extract_series_coeffs(ladder(FIT_SECTIONS, central), f, convergence_radius=SERIES_RADIUS)
    b2 = fit.coefficients[1]
    g2 = dict(ladder_G_coeffs(f, central))[2.0]
    return b2, g2, abs(b2 - g2) / b2


def ladder_nonlinearity_degrees(v_in: Optional[float] = None, b2: Optional[float] = None) -> Dict[str, float]:
    """
    Degrees of the plain and central ladders at v_in (default: the edge of the
    series' convergence region). b2 defaults to the quadratic coefficient fitted
    on ladder(FIT_SECTIONS). The central a-b conductor adds 1 to both
    coefficients.
    """
    v = SERIES_RADIUS if v_in is None else v_in
    if b2 is None:
        b2 = _ladder_quadratic_error(central=False)[0]
    b1 = ladder_phi(1.0)
    return {
        "plain": series_nonlinearity_degree(b1, b2, v),
        "central": series_nonlinearity_degree(b1 + 1.0, b2 + 1.0, v),
    }


def summary_rows() -> List[Dict[str, object]]:
    """
    The three reproducible rows of the summary table:
      1) fig_a1 with f = v + v^3 at v_in = 1 (error = eta)
      2) ladder, f = v + v^2 (error of the quadratic coefficient)
      3) ladder with central conductor (error of the nonlinear part)
    """
    rows: List[Dict[str, object]] = []

    f13 = Characteristic.from_terms([(1.0, 1.0), (1.0, 3.0)])
    r = report(fig_a1(), f13, 1.0)
    rows.append({
        "circuit": "fig_a1",
        "exponents": "1,3",
        "nonlinearity_degree": r.nonlinearity_degree,
        "error": r.eta,
    })

    fitted = {central: _ladder_quadratic_error(central) for central in (False, True)}
    degrees = ladder_nonlinearity_degrees(b2=fitted[False][0])
    for central, name in ((False, "ladder"), (True, "ladder_central")):
        b2, g2, error = fitted[central]
        logger.info("summary: %s b2=%.6g G2=%.6g error=%.4g", name, b2, g2, error)
        rows.append({
            "circuit": name,
            "exponents": "1,2",
            "nonlinearity_degree": degrees["central" if central else "plain"],
            "error": error,
        })
    return rows
