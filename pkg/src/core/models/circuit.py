# src/core/models/circuit.py

"""
One-port circuit graph: unit-conductor branches between named nodes, a
designated input port (a, b) with b as the ground reference, and optional
metadata carried from the netlist (global characteristic, mesh basis).
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from src.core.errors import CircuitError
from src.core.models.characteristic import Characteristic

logger = logging.getLogger(__name__)

INPUT_MESH = "in"


@dataclass(frozen=True)
class Branch:
    start: str
    end: str
    weight: int = 1

    def __post_init__(self) -> None:
        if self.start == self.end:
            raise CircuitError(f"branch {self.start}-{self.end} joins a node to itself")
        if not isinstance(self.weight, int) or isinstance(self.weight, bool) or self.weight < 1:
            raise CircuitError(f"branch {self.start}-{self.end}: multiplicity must be an integer >= 1, got {self.weight!r}")

    def reversed(self) -> "Branch":
        return Branch(self.end, self.start, self.weight)


@dataclass(frozen=True)
class Mesh:
    """A loop of the mesh basis: (branch index, +1/-1 orientation relative to the branch)."""
    name: str
    members: Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class Circuit:
    nodes: Tuple[str, ...]
    branches: Tuple[Branch, ...]
    input_port: Tuple[str, str]
    characteristic: Optional[Characteristic] = None
    meshes: Tuple[Mesh, ...] = field(default=())

    def __post_init__(self) -> None:
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise CircuitError("duplicate node identifiers")
        for node in self.input_port:
            if node not in known:
                raise CircuitError(f"input port node {node!r} is not a circuit node")
        for branch in self.branches:
            for node in (branch.start, branch.end):
                if node not in known:
                    raise CircuitError(f"branch {branch.start}-{branch.end} uses unknown node {node!r}")
        for mesh in self.meshes:
            for index, sign in mesh.members:
                if not 0 <= index < len(self.branches) or sign not in (1, -1):
                    raise CircuitError(f"mesh {mesh.name!r} has invalid member ({index}, {sign})")

    @classmethod
    def build(
        cls,
        input_port: Tuple[str, str],
        branches: Iterable[Branch],
        characteristic: Optional[Characteristic] = None,
        meshes: Sequence[Mesh] = (),
    ) -> "Circuit":
        """Node order: the port nodes, then every other node in order of first use."""
        branches = tuple(branches)
        nodes: List[str] = []
        for node in list(input_port) + [n for b in branches for n in (b.start, b.end)]:
            if node not in nodes:
                nodes.append(node)
        return cls(tuple(nodes), branches, tuple(input_port), characteristic, tuple(meshes))

    @property
    def a(self) -> str:
        return self.input_port[0]

    @property
    def b(self) -> str:
        return self.input_port[1]

    @property
    def internal_nodes(self) -> Tuple[str, ...]:
        return tuple(n for n in self.nodes if n not in self.input_port)

    @property
    def weights(self) -> np.ndarray:
        return np.array([br.weight for br in self.branches], dtype=float)

    def incidence(self) -> np.ndarray:
        """Branch-node incidence (len(branches) x len(nodes)): +1 at start, -1 at end."""
        index = {n: k for k, n in enumerate(self.nodes)}
        matrix = np.zeros((len(self.branches), len(self.nodes)))
        for s, branch in enumerate(self.branches):
            matrix[s, index[branch.start]] = 1.0
            matrix[s, index[branch.end]] = -1.0
        return matrix

    def incident_branches(self, node: str) -> List[int]:
        return [s for s, br in enumerate(self.branches) if node in (br.start, br.end)]

    def with_direct_branch(self) -> "Circuit":
        """The same circuit with an a-b conductor prepended (the 'central' conductor)."""
        branches = (Branch(self.a, self.b),) + self.branches
        meshes = tuple(Mesh(m.name, tuple((i + 1, s) for i, s in m.members)) for m in self.meshes)
        return replace(self, branches=branches, meshes=meshes)

    def with_flipped(self, indices: Iterable[int]) -> "Circuit":
        flip = set(indices)
        branches = tuple(br.reversed() if s in flip else br for s, br in enumerate(self.branches))
        meshes = tuple(
            Mesh(m.name, tuple((i, -s if i in flip else s) for i, s in m.members)) for m in self.meshes
        )
        return replace(self, branches=branches, meshes=meshes)

    def graph(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(self.nodes)
        for s, br in enumerate(self.branches):
            g.add_edge(br.start, br.end, key=s, weight=br.weight)
        return g


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" | "warning"
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: Tuple[Issue, ...]

    @property
    def ok(self) -> bool:
        return not any(issue.severity == "error" for issue in self.issues)

    def errors(self) -> List[str]:
        return [i.message for i in self.issues if i.severity == "error"]

    def warnings(self) -> List[str]:
        return [i.message for i in self.issues if i.severity == "warning"]


def validate(circuit: Circuit) -> ValidationReport:
    """
    Report (never raise) the structural problems of a circuit:
      1) degenerate port (a == b)
      2) nodes disconnected from the port
      3) no a-b path
      4) dangling nodes and nodes no current can reach (warnings)
    """
    issues: List[Issue] = []
    a, b = circuit.input_port
    g = circuit.graph()

    if a == b:
        issues.append(Issue("error", f"degenerate port: a and b are both {a!r}"))

    if not circuit.branches:
        issues.append(Issue("error", "circuit has no branches"))

    port_component = nx.node_connected_component(g, a)
    for node in circuit.nodes:
        if node not in port_component:
            issues.append(Issue("error", f"disconnected node {node!r}"))

    if a != b and b not in port_component:
        issues.append(Issue("error", f"no path joins {a!r} to {b!r}"))

    if not any(i.severity == "error" for i in issues):
        dangling = [n for n in circuit.internal_nodes if g.degree(n) == 1]
        for node in dangling:
            issues.append(Issue("warning", f"dangling node {node!r}"))
        for node in sorted(_dead_nodes(circuit) - set(dangling)):
            issues.append(Issue("warning", f"node {node!r} carries no current (not on any a-b path)"))

    report = ValidationReport(tuple(issues))
    for issue in report.issues:
        logger.debug("validate: %s: %s", issue.severity, issue.message)
    return report


def _dead_nodes(circuit: Circuit) -> set:
    """Nodes outside the biconnected block that holds the port once a-b is closed by the source."""
    simple = nx.Graph(circuit.graph())
    simple.add_edge(circuit.a, circuit.b)
    live = set()
    for block in nx.biconnected_components(simple):
        if circuit.a in block and circuit.b in block:
            live |= block
    return set(circuit.nodes) - live


def assert_valid(circuit: Circuit) -> None:
    report = validate(circuit)
    if not report.ok:
        raise CircuitError("; ".join(report.errors()))


def branch_label(circuit: Circuit, index: int) -> str:
    br = circuit.branches[index]
    return f"{br.start}-{br.end}"

