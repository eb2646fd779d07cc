"""Shared fixtures: the small hand-checkable domains and random connected domains."""

from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from src.graphs.domain import split_domain
from src.graphs.weighted_graph import WeightedGraph, path_graph
from src.utils.exceptions import EmptyInteriorError
from src.problems.time_profile import ConstantProfile
from src.problems.wave_problem import Forcing, WaveProblem

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def random_domain(rng: np.random.Generator, size: int, measure=None):
    """A connected weighted graph on ``size`` vertices and a connected Ω with nonempty boundary and interior.

    Ω is grown by breadth-first search from vertex 0 and stops short of the
    whole graph; ``size`` must be at least 5.
    """
    while True:
        base = nx.connected_watts_strogatz_graph(size, 4, 0.3, seed=int(rng.integers(2**31)))
        vertices = [f"x{k}" for k in base.nodes]
        edges = [(f"x{a}", f"x{b}", float(rng.uniform(0.5, 2.0))) for a, b in base.edges]
        graph = WeightedGraph(vertices, edges, measure)
        order = [f"x{k}" for k in nx.bfs_tree(base, 0)]
        omega = order[: max(3, int(len(order) * rng.uniform(0.5, 0.9)))]
        try:
            return split_domain(graph, omega)
        except EmptyInteriorError:
            continue


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def single_interior_domain():
    """P5 with Ω = {v2, v3, v4}: one interior vertex v3 and L = [2]."""
    return split_domain(path_graph(5), ["v2", "v3", "v4"])


@pytest.fixture
def two_interior_domain():
    """P6 with Ω = {v2, ..., v5}: interior v3, v4 and eigenvalues 1, 3."""
    return split_domain(path_graph(6), ["v2", "v3", "v4", "v5"])


@pytest.fixture
def six_interior_domain():
    """P10 with Ω = {v2, ..., v9}: six interior vertices v3, ..., v8."""
    return split_domain(path_graph(10), [f"v{k}" for k in range(2, 10)])


@pytest.fixture
def single_interior_problem(single_interior_domain):
    """g = 1, h = 0, f = 0 on the single interior vertex; u(t) = cos(√2 t)."""
    return WaveProblem.create(single_interior_domain, g={"v3": 1.0}, name="single_interior")


@pytest.fixture
def two_interior_problem(two_interior_domain):
    return WaveProblem.create(two_interior_domain, g={"v3": 1.0, "v4": 0.5}, h={"v4": -0.25}, name="two_interior")


@pytest.fixture
def constant_forcing_problem(six_interior_domain):
    """f ≡ −1 on the interior, zero initial data."""
    forcing = Forcing.from_terms(six_interior_domain, [(np.full(6, -1.0), ConstantProfile(1.0))])
    return WaveProblem.create(six_interior_domain, forcing=forcing, name="constant_forcing")


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def make_random_domain(rng):
    """Factory for random connected domains drawn from the shared generator."""
    return lambda size, measure=None: random_domain(rng, size, measure)
