# src/core/models/canonical.py

"""
Builders for the named topologies used throughout the analysis.

ladder(N) is N sections of {top series, bottom series, shunt}. Top-rail nodes
are c1..cN, bottom-rail nodes d1..dN, so the first shunt is c1-d1 and the
ladder's voltage ratio is lambda = v_in / (v_c1 - v_d1). This section pattern
is the one whose alpha -> infinity limit is three series elements and whose
linear input conductance is 1/(1 + sqrt(3)) (2g^2 + 2g - 1 = 0).
"""

from typing import Any, Callable, Dict, List, Mapping, Optional

from src.core.errors import CircuitError
from src.core.models.circuit import INPUT_MESH, Branch, Circuit, Mesh

CANONICAL_NAMES = ("fig_a1", "fig3", "fig4", "ladder", "fig_b1")

# fig_a1 / fig_b1 branch order: 0 a-b, 1 a-o, 2 o-b, 3 o-x, 4 x-b
_FIG_A1_EDGES = [("a", "b"), ("a", "o"), ("o", "b"), ("o", "x"), ("x", "b")]

# Loops of fig_b1: the source mesh closes through the a-b element; m1 = a-o-b-a, m2 = o-x-b-o.
FIG_B1_MESHES = (
    Mesh(INPUT_MESH, ((0, 1),)),
    Mesh("m1", ((1, 1), (2, 1), (0, -1))),
    Mesh("m2", ((3, 1), (4, 1), (2, -1))),
)


def _chain(edges: List[tuple]) -> List[Branch]:
    return [Branch(start, end) for start, end in edges]


def fig_a1() -> Circuit:
    return Circuit.build(("a", "b"), _chain(_FIG_A1_EDGES))


def fig3() -> Circuit:
    """Two separated series branches in parallel to a-b (a-b, a-p-b) plus fig_a1's subcircuit without a-b."""
    edges = [("a", "b"), ("a", "p"), ("p", "b")] + _FIG_A1_EDGES[1:]
    return Circuit.build(("a", "b"), _chain(edges))


def fig4() -> Circuit:
    edges = [
        ("a", "b"),
        ("a", "c"), ("c", "d"), ("d", "b"),
        ("a", "e"), ("e", "f"), ("f", "b"),
        ("c", "e"), ("d", "f"),
    ]
    return Circuit.build(("a", "b"), _chain(edges))


def ladder(sections: int, central: bool = False) -> Circuit:
    if isinstance(sections, bool) or not isinstance(sections, int) or sections < 1:
        raise CircuitError(f"ladder needs an integer number of sections N >= 1, got {sections!r}")
    edges = [("a", "b")] if central else []
    top, bottom = "a", "b"
    for k in range(1, sections + 1):
        c, d = f"c{k}", f"d{k}"
        edges += [(top, c), (c, d), (d, bottom)]
        top, bottom = c, d
    return Circuit.build(("a", "b"), _chain(edges))


def fig_b1() -> Circuit:
    """fig_a1's graph with its two-mesh basis; the resistive reading lives in mesh_analysis."""
    return Circuit.build(("a", "b"), _chain(_FIG_A1_EDGES), meshes=FIG_B1_MESHES)


def _ladder_from_params(params: Mapping[str, Any]) -> Circuit:
    sections = params.get("sections", params.get("N"))
    if sections is None:
        raise CircuitError("ladder needs the 'sections' parameter")
    return ladder(sections, bool(params.get("central", False)))


_BUILDERS: Dict[str, Callable[[Mapping[str, Any]], Circuit]] = {
    "fig_a1": lambda params: fig_a1(),
    "fig3": lambda params: fig3(),
    "fig4": lambda params: fig4(),
    "ladder": _ladder_from_params,
    "fig_b1": lambda params: fig_b1(),
}


def build_canonical(name: str, params: Optional[Mapping[str, Any]] = None) -> Circuit:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise CircuitError(f"unknown canonical circuit {name!r}; expected one of {CANONICAL_NAMES}")
    return builder(params or {})
