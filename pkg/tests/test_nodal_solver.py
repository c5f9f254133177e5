# tests/test_nodal_solver.py

import numpy as np
import pytest

from src.core.errors import CircuitError, ConvergenceError, DomainError
from src.core.models.canonical import fig4, ladder
from src.core.models.characteristic import Characteristic
from src.core.models.circuit import Branch, Circuit
from src.core.services.alpha_analysis import alpha_solve
from src.core.services.ladder_analytics import ladder_phi
from src.core.services.nodal_solver import co_content, input_current_from_potentials, linear_potentials, solve_dc
from tests.conftest import random_characteristic, random_circuit


def _kcl_residuals(solution):
    c = solution.circuit
    net = {n: 0.0 for n in c.internal_nodes}
    for br, current in zip(c.branches, solution.branch_currents):
        if br.start in net:
            net[br.start] -= current
        if br.end in net:
            net[br.end] += current
    return net


def test_fig_a1_exact_solution(fig_a1, cubic):
    s = solve_dc(fig_a1, cubic, 1.0)
    assert s.potentials["o"] == pytest.approx(0.4350635, abs=1e-6)
    assert s.potentials["x"] == pytest.approx(s.potentials["o"] / 2, rel=1e-12)
    assert s.input_current == pytest.approx(2.7452378, abs=1e-6)
    assert all(abs(r) < 1e-11 for r in _kcl_residuals(s).values())


def test_linear_fig_a1_conductance_is_1_6(fig_a1):
    s = solve_dc(fig_a1, Characteristic.power_law(1.0), 1.0)
    assert s.input_current == pytest.approx(1.6, abs=1e-12)
    assert linear_potentials(fig_a1)["o"] == pytest.approx(0.4)


def test_both_port_sides_give_the_same_input_current(fig_a1, cubic):
    s = solve_dc(fig_a1, cubic, 2.0)
    at_a = input_current_from_potentials(s.circuit, cubic, s.potentials, side="a")
    at_b = input_current_from_potentials(s.circuit, cubic, s.potentials, side="b")
    assert at_a == pytest.approx(at_b, rel=1e-10)
    with pytest.raises(ValueError):
        input_current_from_potentials(s.circuit, cubic, s.potentials, side="c")


def test_reversed_branches_are_reoriented(cubic):
    c = Circuit.build(("a", "b"), [Branch("b", "a"), Branch("o", "a"), Branch("o", "b"), Branch("o", "x"), Branch("b", "x")])
    s = solve_dc(c, cubic, 1.0)
    assert set(s.flipped) == {0, 1, 4}
    assert all(v >= 0 for v in s.branch_voltages)
    assert s.circuit.branches[1] == Branch("a", "o")
    assert s.potentials["o"] == pytest.approx(0.4350635, abs=1e-6)


def test_sublinear_characteristic_converges(fig_a1):
    s = solve_dc(fig_a1, Characteristic.from_terms([(1.0, 0.5), (1.0, 2.0)]), 0.7)
    assert all(abs(r) < 1e-10 for r in _kcl_residuals(s).values())
    assert 0 < s.potentials["x"] < s.potentials["o"] < 0.7


def test_symmetric_cross_links_carry_no_current(cubic):
    s = solve_dc(fig4(), cubic, 3.0)
    assert s.potentials["c"] == pytest.approx(s.potentials["e"], abs=1e-12)
    assert s.potentials["d"] == pytest.approx(s.potentials["f"], abs=1e-12)
    assert s.potentials["c"] == pytest.approx(2.0, abs=1e-12)


def test_power_balance(fig_a1, cubic):
    s = solve_dc(fig_a1, cubic, 1.5)
    assert s.input_power == pytest.approx(s.dissipated_power, rel=1e-9)


@pytest.mark.parametrize("f, v_s, expected", [(Characteristic.power_law(1.0), 1.0, 0.5), (Characteristic.power_law(3.0), 2.0, 4.0)])
def test_co_content_of_a_single_conductor(f, v_s, expected):
    c = Circuit.build(("a", "b"), [Branch("a", "b")])
    assert co_content(c, f, {"a": v_s, "b": 0.0}) == pytest.approx(expected, rel=1e-15)


def test_solution_minimises_the_co_content(fig_a1, cubic):
    s = solve_dc(fig_a1, cubic, 1.0)
    at_solution = co_content(fig_a1, cubic, s.potentials)
    grid = np.linspace(0.0, 1.0, 41)
    worst = min(
        co_content(fig_a1, cubic, {"a": 1.0, "b": 0.0, "o": float(o), "x": float(x)})
        for o in grid
        for x in grid
    )
    assert at_solution <= worst + 1e-12


def test_random_restarts_reach_the_same_solution():
    rng = np.random.default_rng(5)
    for _ in range(5):
        circuit = random_circuit(rng)
        f = random_characteristic(rng)
        currents = [solve_dc(circuit, f, 1.5).input_current]
        for _ in range(4):
            start = {n: float(rng.uniform(0.0, 1.5)) for n in circuit.internal_nodes}
            currents.append(solve_dc(circuit, f, 1.5, initial=start).input_current)
        assert max(currents) - min(currents) <= 1e-9 * max(currents)


def test_warm_start_reaches_the_same_solution(fig_a1, cubic):
    cold = solve_dc(fig_a1, cubic, 1.0)
    warm = solve_dc(fig_a1, cubic, 1.0, initial={"o": 0.9, "x": 0.1})
    assert warm.potentials["o"] == pytest.approx(cold.potentials["o"], abs=1e-12)


@pytest.mark.parametrize("v_in", [0.0, -1.0])
def test_nonpositive_drive_is_a_domain_error(fig_a1, cubic, v_in):
    with pytest.raises(DomainError):
        solve_dc(fig_a1, cubic, v_in)


def test_invalid_circuit_is_rejected(cubic):
    c = Circuit.build(("a", "b"), [Branch("a", "o")])
    with pytest.raises(CircuitError):
        solve_dc(c, cubic, 1.0)


def test_iteration_cap_from_environment(monkeypatch, fig_a1, cubic):
    monkeypatch.setenv("ALPHAPORT_MAX_ITERS", "1")
    with pytest.raises(ConvergenceError) as err:
        solve_dc(fig_a1, cubic, 10.0)
    assert err.value.iterations == 1


@pytest.mark.parametrize("v_in", [10.0, 30.0, 100.0, 1000.0])
def test_large_ladder_with_high_drive(cubic, v_in):
    s = solve_dc(ladder(20), cubic, v_in)
    assert s.input_power == pytest.approx(s.dissipated_power, rel=1e-9)
    # the tail drops are far below the rounding of the rail potentials
    assert s.potentials["c20"] - s.potentials["d20"] < 1e-6 * v_in


def test_deep_ladder_converges(cubic, quadratic):
    for f in (cubic, quadratic):
        s = solve_dc(ladder(100), f, 1.0)
        assert s.input_power == pytest.approx(s.dissipated_power, rel=1e-9)
        assert s.potentials["c1"] > s.potentials["c2"] > 0.5
        # the rails meet halfway once the drops fall below rounding
        assert s.potentials["c100"] == pytest.approx(0.5, abs=1e-9)
        assert s.potentials["d100"] == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3, 0.4])
def test_sublinear_ladder_converges(alpha):
    # the tail drops fall below the rounding of the rail potentials within a few sections
    profile = alpha_solve(ladder(10), alpha)
    assert profile.d["c1"] > profile.d["c2"] > 0.5 > profile.d["d2"] > profile.d["d1"]
    assert profile.phi == pytest.approx(ladder_phi(alpha), rel=0.02)


def test_d_linearity_and_power_balance_on_random_circuits():
    rng = np.random.default_rng(11)
    for _ in range(50):
        circuit = random_circuit(rng)
        f = random_characteristic(rng)
        scale = float(rng.choice([2.0, 4.0, 8.0]))
        base = solve_dc(circuit, f, 1.0)
        scaled = solve_dc(circuit, f.scaled(scale), 1.0)
        assert scaled.input_current == pytest.approx(scale * base.input_current, rel=1e-12)
        assert base.input_power == pytest.approx(base.dissipated_power, rel=1e-9)
