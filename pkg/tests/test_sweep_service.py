# tests/test_sweep_service.py

import pytest

from src.core.models.canonical import fig4
from src.core.services.alpha_analysis import d_o_closed_form_fig_a1, phi_closed_form_fig_a1
from src.core.services.superposition import report
from src.core.services.sweep_service import sweep_alpha, sweep_v

V_GRID = [0.01, 0.1, 1.0, 10.0]


def test_sweep_v_keeps_grid_order_with_several_workers(fig_a1, cubic):
    rows = sweep_v(fig_a1, cubic, V_GRID, workers=3)
    assert [r["v_in"] for r in rows] == V_GRID
    assert rows[2]["F"] == pytest.approx(report(fig_a1, cubic, 1.0).F, rel=1e-12)
    d_o = [r["d_o"] for r in rows]
    assert all(later > earlier for earlier, later in zip(d_o, d_o[1:]))


def test_sweep_v_eta_vanishes_on_the_symmetric_circuit(cubic):
    assert all(r["eta"] <= 1e-10 for r in sweep_v(fig4(), cubic, V_GRID))


def test_sweep_alpha_rows(fig_a1):
    rows = sweep_alpha(fig_a1, [1.0, 2.0, 3.0], workers=2)
    assert list(rows[0]) == ["alpha", "phi", "d_o", "d_x"]
    for row in rows:
        assert row["phi"] == pytest.approx(phi_closed_form_fig_a1(row["alpha"]), rel=1e-9)
        assert row["d_o"] == pytest.approx(d_o_closed_form_fig_a1(row["alpha"]), rel=1e-9)


def test_empty_grids_are_rejected(fig_a1, cubic):
    with pytest.raises(ValueError):
        sweep_v(fig_a1, cubic, [])
    with pytest.raises(ValueError):
        sweep_alpha(fig_a1, [])
