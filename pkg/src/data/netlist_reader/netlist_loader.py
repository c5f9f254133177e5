# src/data/netlist_reader/netlist_loader.py

"""
Line-oriented netlist format (UTF-8):

    # comment                      blank lines are ignored too
    .input <a> <b>                 exactly once; b is the ground reference
    .branch <n1> <n2> [w=<K>]      K a positive integer, default 1
    .f <D>:<alpha>[,<D>:<alpha>]   optional global characteristic
    .mesh <id> <[+|-]k> ...        optional mesh basis; k is the 1-based
                                   branch number, '-' traverses it end->start;
                                   the source mesh has id "in"
"""

import os
from typing import List, Optional, Tuple

from src.core.errors import CharacteristicError, CircuitError, NetlistSyntaxError
from src.core.models.characteristic import Characteristic
from src.core.models.circuit import Branch, Circuit, Mesh
from src.data.netlist_reader.characteristic_reader import format_characteristic, parse_characteristic

DIRECTIVES = (".input", ".branch", ".f", ".mesh")


def load_netlist(path: str) -> Circuit:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Netlist file not found: {path}")
    with open(path, encoding="utf-8") as f:
        return parse_netlist(f.read())


def _parse_weight(token: str, line_no: int) -> int:
    if not token.startswith("w="):
        raise NetlistSyntaxError(f"unexpected token {token!r} (expected w=<K>)", line_no)
    try:
        weight = int(token[2:])
    except ValueError:
        raise NetlistSyntaxError(f"multiplicity {token[2:]!r} is not an integer", line_no)
    if weight < 1:
        raise NetlistSyntaxError(f"multiplicity must be >= 1, got {weight}", line_no)
    return weight


def _parse_mesh_member(token: str, line_no: int) -> Tuple[int, int]:
    sign = -1 if token.startswith("-") else 1
    digits = token.lstrip("+-")
    if not digits.isdigit() or int(digits) < 1:
        raise NetlistSyntaxError(f"mesh member {token!r} is not a signed branch number", line_no)
    return int(digits) - 1, sign


def parse_netlist(text: str) -> Circuit:
    """
    Parse netlist text into a Circuit, keeping branch order as written.
    Raises NetlistSyntaxError (with the line number) for malformed lines,
    unknown directives, a missing or duplicate .input.
    """
    port: Optional[Tuple[str, str]] = None
    characteristic: Optional[Characteristic] = None
    branches: List[Branch] = []
    meshes: List[Tuple[int, str, List[Tuple[int, int]]]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        directive, args = tokens[0], tokens[1:]

        if not directive.startswith("."):
            raise NetlistSyntaxError(f"expected a directive, got {directive!r}", line_no)
        if directive not in DIRECTIVES:
            raise NetlistSyntaxError(f"unknown directive {directive!r}", line_no)

        if directive == ".input":
            if port is not None:
                raise NetlistSyntaxError("duplicate .input", line_no)
            if len(args) != 2:
                raise NetlistSyntaxError(".input takes exactly two nodes", line_no)
            port = (args[0], args[1])

        elif directive == ".branch":
            if len(args) not in (2, 3):
                raise NetlistSyntaxError(".branch takes two nodes and an optional w=<K>", line_no)
            weight = _parse_weight(args[2], line_no) if len(args) == 3 else 1
            try:
                branches.append(Branch(args[0], args[1], weight))
            except CircuitError as e:
                raise NetlistSyntaxError(str(e), line_no)

        elif directive == ".f":
            if characteristic is not None:
                raise NetlistSyntaxError("duplicate .f", line_no)
            if len(args) != 1:
                raise NetlistSyntaxError(".f takes one D:alpha[,D:alpha...] argument", line_no)
            try:
                characteristic = parse_characteristic(args[0])
            except CharacteristicError as e:
                raise NetlistSyntaxError(str(e), line_no)

        else:  # .mesh
            if len(args) < 2:
                raise NetlistSyntaxError(".mesh takes an id and at least one branch number", line_no)
            meshes.append((line_no, args[0], [_parse_mesh_member(t, line_no) for t in args[1:]]))

    if port is None:
        raise NetlistSyntaxError("missing .input")

    for line_no, _, members in meshes:
        for index, _ in members:
            if index >= len(branches):
                raise NetlistSyntaxError(f"mesh refers to branch {index + 1}, only {len(branches)} declared", line_no)

    return Circuit.build(
        port,
        branches,
        characteristic=characteristic,
        meshes=[Mesh(name, tuple(members)) for _, name, members in meshes],
    )


def render_netlist(circuit: Circuit) -> str:
    """Inverse of parse_netlist for circuits whose node order follows Circuit.build."""
    lines = [f".input {circuit.a} {circuit.b}"]
    if circuit.characteristic is not None:
        lines.append(f".f {format_characteristic(circuit.characteristic)}")
    for br in circuit.branches:
        suffix = f" w={br.weight}" if br.weight != 1 else ""
        lines.append(f".branch {br.start} {br.end}{suffix}")
    for mesh in circuit.meshes:
        members = " ".join(f"{'-' if sign < 0 else ''}{index + 1}" for index, sign in mesh.members)
        lines.append(f".mesh {mesh.name} {members}")
    return "\n".join(lines) + "\n"
