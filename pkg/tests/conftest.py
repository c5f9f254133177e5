# tests/conftest.py

from typing import List

import numpy as np
import pytest

from src.core.models.canonical import fig_a1 as build_fig_a1
from src.core.models.characteristic import Characteristic
from src.core.models.circuit import Branch, Circuit, validate

EXPONENT_CHOICES = (1.0, 1.5, 2.0, 3.0)


def random_circuit(rng: np.random.Generator, max_nodes: int = 8) -> Circuit:
    """
    Random connected one-port with at most max_nodes nodes: a random spanning
    tree plus extra chords, redrawn until validation reports nothing (every
    node carries current).
    """
    while True:
        internal = int(rng.integers(1, max_nodes - 1))
        nodes = ["a", "b"] + [f"n{k}" for k in range(internal)]
        order = [int(k) for k in rng.permutation(len(nodes))]
        edges = []
        for i in range(1, len(order)):
            j = int(rng.integers(0, i))
            edges.append((nodes[order[i]], nodes[order[j]]))
        for _ in range(int(rng.integers(len(nodes) // 2 + 1, 2 * len(nodes) + 1))):
            u, v = (int(k) for k in rng.choice(len(nodes), size=2, replace=False))
            edges.append((nodes[u], nodes[v]))
        branches = [Branch(u, v, int(rng.integers(1, 3))) for u, v in edges]
        circuit = Circuit.build(("a", "b"), branches)
        if not validate(circuit).issues:
            return circuit


def random_characteristic(rng: np.random.Generator) -> Characteristic:
    exponents = rng.choice(EXPONENT_CHOICES, size=2, replace=False)
    coefficients = rng.uniform(0.5, 2.0, size=2)
    return Characteristic.from_terms(zip(coefficients.tolist(), exponents.tolist()))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def fig_a1() -> Circuit:
    return build_fig_a1()


@pytest.fixture
def cubic() -> Characteristic:
    """f(v) = v + v^3."""
    return Characteristic.from_terms([(1.0, 1.0), (1.0, 3.0)])


@pytest.fixture
def quadratic() -> Characteristic:
    """f(v) = v + v^2."""
    return Characteristic.from_terms([(1.0, 1.0), (1.0, 2.0)])


@pytest.fixture(scope="session")
def random_circuits() -> List[Circuit]:
    generator = np.random.default_rng(7)
    return [random_circuit(generator) for _ in range(20)]
