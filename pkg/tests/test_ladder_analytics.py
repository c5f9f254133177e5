# tests/test_ladder_analytics.py

import math

import pytest

from src.core.models.canonical import ladder
from src.core.models.characteristic import Characteristic
from src.core.services.alpha_analysis import alpha_solve
from src.core.services.ladder_analytics import (
    ladder_G_coeffs,
    ladder_nonlinearity_degrees,
    ladder_phi,
    ladder_result,
    lambda_root,
    series_nonlinearity_degree,
    summary_rows,
    truncation_convergence,
)
from src.core.services.superposition import coefficient_errors, extract_series_coeffs, report

# quadratic coefficient of the ladder's series for f = v + v^2
LADDER_B2 = 0.1196

SQRT3 = math.sqrt(3.0)


def test_lambda_fixed_points():
    assert lambda_root(1.0) == pytest.approx(2.0 + SQRT3, abs=1e-9)
    assert lambda_root(3.0) == pytest.approx(3.024688, abs=1e-5)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 2.0, 3.0, 7.5, 16.0])
def test_lambda_satisfies_the_ladder_equation(alpha):
    lam = lambda_root(alpha)
    assert lam > 1.0
    lhs = (lam ** alpha - 1.0) * (lam - 1.0) ** alpha
    assert lhs == pytest.approx((2.0 * lam) ** alpha, rel=1e-12)


def test_lambda_decreases_toward_three():
    grid = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 16.0]
    values = [lambda_root(a) for a in grid]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))
    assert values[-1] == pytest.approx(3.0, abs=0.05)
    assert values[-1] > 3.0


def test_ladder_phi_values():
    assert ladder_phi(1.0) == pytest.approx(1.0 / (1.0 + SQRT3), abs=1e-9)
    assert ladder_phi(2.0) == pytest.approx(0.115146, abs=1e-5)
    assert ladder_phi(3.0) == pytest.approx(0.03749, abs=1e-4)


def test_ladder_result_and_central_variant():
    plain = ladder_result(3.0)
    central = ladder_result(3.0, central=True)
    assert central.phi == pytest.approx(plain.phi + 1.0, rel=1e-15)
    assert central.lambda_ == plain.lambda_
    assert plain.as_row() == {"alpha": 3.0, "lambda": plain.lambda_, "phi": plain.phi}


def test_g_coefficients(quadratic, cubic):
    plain = ladder_G_coeffs(quadratic)
    assert plain[0] == (1.0, pytest.approx(0.36603, abs=1e-5))
    assert plain[1] == (2.0, pytest.approx(0.115146, abs=1e-5))
    central = ladder_G_coeffs(quadratic, central=True)
    assert central[0][1] == pytest.approx(1.36603, abs=1e-5)
    assert central[1][1] == pytest.approx(1.115146, abs=1e-5)
    assert ladder_G_coeffs(cubic)[1][1] == pytest.approx(0.03749, abs=1e-4)
    doubled = ladder_G_coeffs(Characteristic.from_terms([(2.0, 1.0)]))
    assert doubled[0][1] == pytest.approx(2.0 / (1.0 + SQRT3), rel=1e-12)


def test_truncated_ladder_converges_to_the_fixed_point():
    assert truncation_convergence(1.0, [100])[0] == pytest.approx(1.0 / (1.0 + SQRT3), abs=1e-8)
    assert truncation_convergence(3.0, [20])[0] == pytest.approx(ladder_phi(3.0), abs=1e-6)

    target = ladder_phi(2.0)
    gaps = [abs(phi - target) for phi in truncation_convergence(2.0, [5, 10, 20, 40])]
    # once the gap reaches round-off it cannot shrink further
    assert all(later < earlier or later < 1e-12 for earlier, later in zip(gaps, gaps[1:]))
    assert gaps[0] > gaps[-1]


def test_truncation_rejects_empty_ladders():
    with pytest.raises(ValueError):
        truncation_convergence(1.0, [0])


def test_central_ladder_alpha_test_adds_one():
    assert alpha_solve(ladder(30, central=True), 2.0).phi == pytest.approx(ladder_phi(2.0) + 1.0, abs=1e-6)


def test_nonlinearity_degrees_use_the_fitted_coefficient():
    degrees = ladder_nonlinearity_degrees()
    assert degrees["plain"] == pytest.approx(0.188, abs=0.002)
    assert degrees["central"] == pytest.approx(0.47, abs=0.01)
    assert series_nonlinearity_degree(2.0, 1.0, 0.5) == 0.25


def test_nonlinearity_degrees_follow_the_given_coefficient():
    b1 = ladder_phi(1.0)
    degrees = ladder_nonlinearity_degrees(b2=LADDER_B2)
    assert degrees["plain"] == pytest.approx(LADDER_B2 / b1 * 0.574, rel=1e-12)
    assert degrees["central"] == pytest.approx((LADDER_B2 + 1.0) / (b1 + 1.0) * 0.574, rel=1e-12)
    assert ladder_nonlinearity_degrees(b2=2 * LADDER_B2)["plain"] == pytest.approx(2 * degrees["plain"], rel=1e-12)


def test_exact_quadratic_coefficient_of_the_ladder(quadratic):
    fit = extract_series_coeffs(ladder(100), quadratic, convergence_radius=0.574)
    assert fit.coefficients[0] == pytest.approx(0.36603, abs=1e-4)
    assert fit.coefficients[1] == pytest.approx(LADDER_B2, abs=0.002)

    rows = coefficient_errors(ladder(100), quadratic, convergence_radius=0.574)
    assert rows[1][3] == pytest.approx(0.037, abs=0.003)


def test_central_ladder_nonlinear_part_error(quadratic):
    fit = extract_series_coeffs(ladder(100, central=True), quadratic, convergence_radius=0.574)
    g2 = dict(ladder_G_coeffs(quadratic, central=True))[2.0]
    assert abs(fit.coefficients[1] - g2) / fit.coefficients[1] == pytest.approx(0.004, abs=0.001)


def test_small_drive_eta_nonlinear_tracks_the_coefficient_error(quadratic):
    plain = report(ladder(100), quadratic, 1e-3)
    central = report(ladder(100, central=True), quadratic, 1e-3)
    assert plain.eta_nonlinear == pytest.approx(0.037, abs=0.003)
    assert central.eta_nonlinear == pytest.approx(0.004, abs=0.001)


def test_summary_rows():
    rows = summary_rows()
    assert [r["circuit"] for r in rows] == ["fig_a1", "ladder", "ladder_central"]
    errors = [r["error"] for r in rows]
    assert errors[0] == pytest.approx(0.0046, abs=3e-4)
    assert errors[1] == pytest.approx(0.037, abs=0.003)
    assert errors[2] == pytest.approx(0.004, abs=0.001)
    assert rows[0]["nonlinearity_degree"] == pytest.approx(0.754, abs=1e-3)
