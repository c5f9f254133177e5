# tests/test_alpha_analysis.py

import pytest

from src.core.models.canonical import build_canonical, fig3, fig4, fig_b1, ladder
from src.core.models.characteristic import Characteristic
from src.core.services.alpha_analysis import (
    alpha_solve,
    continuation_path,
    d_o_closed_form_fig_a1,
    d_sweep,
    hardlimiter_limit,
    phi_closed_form_fig_a1,
)
from src.core.services.nodal_solver import solve_dc

MONOTONICITY_GRID = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0]


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0])
def test_fig_a1_phi_matches_closed_form(fig_a1, alpha):
    profile = alpha_solve(fig_a1, alpha)
    assert profile.phi == pytest.approx(phi_closed_form_fig_a1(alpha), rel=1e-9)
    assert profile.d["o"] == pytest.approx(d_o_closed_form_fig_a1(alpha), rel=1e-9)


def test_fig_a1_reference_values(fig_a1):
    assert alpha_solve(fig_a1, 1.0).phi == pytest.approx(1.6, abs=1e-9)
    assert alpha_solve(fig_a1, 3.0).phi == pytest.approx(1.13252, abs=5e-4)
    assert d_o_closed_form_fig_a1(3.0) == pytest.approx(2.0 / (2.0 + 9.0 ** (1.0 / 3.0)), rel=1e-12)
    assert d_o_closed_form_fig_a1(3.0) == pytest.approx(0.49019, abs=1e-5)


def test_fig4_phi_and_constant_division():
    # every a-b path is three elements in series with equal drops
    for alpha in (1.0, 2.0, 3.0):
        assert alpha_solve(fig4(), alpha).phi == pytest.approx(1.0 + 2.0 / 3.0 ** alpha, rel=1e-10)
    sweep = d_sweep(fig4(), MONOTONICITY_GRID)
    assert set(sweep.verdicts.values()) == {"constant"}


@pytest.mark.parametrize("v_in", [0.01, 7.0])
def test_division_ratios_do_not_depend_on_drive_or_coefficient(fig_a1, v_in):
    reference = alpha_solve(fig_a1, 3.0)
    assert alpha_solve(fig_a1, 3.0, v_in=v_in).d["o"] == pytest.approx(reference.d["o"], rel=1e-10)
    scaled = solve_dc(fig_a1, Characteristic.power_law(3.0, 5.0), v_in).d()
    assert scaled["o"] == pytest.approx(reference.d["o"], rel=1e-10)


def test_continuation_path():
    assert continuation_path(1.5) == [1.5]
    assert continuation_path(64.0) == [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    assert continuation_path(3.0) == [2.0, 3.0]
    assert continuation_path(0.25) == [0.5, 0.25]


def test_alpha_must_be_positive(fig_a1):
    with pytest.raises(ValueError):
        alpha_solve(fig_a1, 0.0)
    with pytest.raises(ValueError):
        d_sweep(fig_a1, [1.0, -2.0])
    with pytest.raises(ValueError):
        d_sweep(fig_a1, [3.0, 1.0])


@pytest.mark.parametrize(
    "circuit",
    [build_canonical("fig_a1"), fig3(), fig4(), ladder(6), ladder(6, central=True), fig_b1()],
    ids=["fig_a1", "fig3", "fig4", "ladder", "ladder_central", "fig_b1"],
)
def test_division_ratios_are_monotone_in_alpha(circuit):
    sweep = d_sweep(circuit, MONOTONICITY_GRID, workers=2)
    assert sweep.violations == []
    assert set(sweep.sequences) == set(circuit.internal_nodes)


def test_sweep_rows_keep_grid_order(fig_a1):
    sweep = d_sweep(fig_a1, MONOTONICITY_GRID, workers=3)
    assert sweep.alphas == MONOTONICITY_GRID
    assert sweep.sequences["o"] == pytest.approx([d_o_closed_form_fig_a1(a) for a in MONOTONICITY_GRID], rel=1e-9)
    assert sweep.verdicts["o"] == "nondecreasing"


def test_hardlimiter_limit_of_the_ladder():
    circuit = ladder(8)
    plain = hardlimiter_limit(circuit)
    refined = hardlimiter_limit(circuit, extrapolate=True)
    assert plain["d1"] == pytest.approx(1.0 / 3.0, abs=0.01)
    assert plain["c1"] == pytest.approx(2.0 / 3.0, abs=0.01)
    assert refined["d1"] == pytest.approx(1.0 / 3.0, abs=0.005)
    assert refined["a"] == 1.0 and refined["b"] == 0.0


def test_hardlimiter_limit_of_fig_a1(fig_a1):
    assert hardlimiter_limit(fig_a1)["o"] == pytest.approx(0.5, abs=0.01)
    assert hardlimiter_limit(fig_a1, extrapolate=True)["o"] == pytest.approx(0.5, abs=0.01)


def test_hardlimiter_keeps_fig4_division():
    limit = hardlimiter_limit(fig4())
    assert [limit[k] for k in ("c", "e")] == pytest.approx([2.0 / 3.0, 2.0 / 3.0], abs=0.01)
    assert [limit[k] for k in ("d", "f")] == pytest.approx([1.0 / 3.0, 1.0 / 3.0], abs=0.01)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
def test_direct_branch_lifts_phi_above_one(random_circuits, fig_a1, alpha):
    circuits = [c.with_direct_branch() for c in random_circuits]
    circuits += [fig_a1, fig3(), fig4(), ladder(6, central=True)]
    for circuit in circuits:
        assert alpha_solve(circuit, alpha).phi > 1.0
