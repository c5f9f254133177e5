# src/core/services/sweep_service.py

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Sequence

from src.core.models.characteristic import Characteristic
from src.core.models.circuit import Circuit
from src.core.services.alpha_analysis import alpha_solve
from src.core.services.superposition import report


def _check_grid(grid: Sequence[float], name: str) -> List[float]:
    values = [float(x) for x in grid]
    if not values:
        raise ValueError(f"{name} grid is empty")
    return values


def sweep_v(
        circuit: Circuit,
        f: Characteristic,
        v_grid: Sequence[float],
        workers: int = 1
) -> List[Dict[str, Any]]:
    """
    Run the superposition report at every v_in of the grid.
    Returns one row per grid point, in grid order, with the report's CSV columns.
    """
    grid = _check_grid(v_grid, "v_in")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        reports = list(pool.map(lambda v: report(circuit, f, v), grid))
    return [r.as_row() for r in reports]


def sweep_alpha(
        circuit: Circuit,
        alphas: Sequence[float],
        workers: int = 1
) -> List[Dict[str, Any]]:
    """
    Run the alpha-test at every alpha of the grid.
    Returns rows with keys: alpha, phi, d_<node> for each internal node.
    """
    grid = _check_grid(alphas, "alpha")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        profiles = list(pool.map(lambda a: alpha_solve(circuit, a), grid))

    result: List[Dict[str, Any]] = []
    for profile in profiles:
        row: Dict[str, Any] = {"alpha": profile.alpha, "phi": profile.phi}
        for node in circuit.internal_nodes:
            row[f"d_{node}"] = profile.d[node]
        result.append(row)
    return result
