"""Integration against the vertex measure μ."""

from typing import Iterable, Optional

import numpy as np

from ..graphs.domain import DirichletDomain, VertexData, vertex_values
from ..graphs.weighted_graph import WeightedGraph


def _subset_indices(graph: WeightedGraph, subset: Optional[Iterable[str]]) -> np.ndarray:
    if subset is None:
        return np.arange(len(graph))
    return np.array([graph.index(v) for v in dict.fromkeys(subset)], dtype=np.int64)


def integrate(graph: WeightedGraph, u: VertexData, subset: Optional[Iterable[str]] = None) -> float:
    """∫_subset u dμ = Σ_{x ∈ subset} u(x) μ(x); the whole vertex set by default."""
    idx = _subset_indices(graph, subset)
    values = vertex_values(graph, u)
    return float(np.dot(values[idx], graph.measure[idx]))


def inner_product(graph: WeightedGraph, u: VertexData, v: VertexData, subset: Optional[Iterable[str]] = None) -> float:
    """(u, v) = Σ_{x ∈ subset} u(x) v(x) μ(x)."""
    idx = _subset_indices(graph, subset)
    a, b = vertex_values(graph, u), vertex_values(graph, v)
    return float(np.sum(a[idx] * b[idx] * graph.measure[idx]))


def interior_inner(domain: DirichletDomain, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(u, v)_{L²(Ω°)} for interior-ordered arrays; leading axes are batched."""
    return np.sum(np.asarray(u) * np.asarray(v) * domain.interior_measure, axis=-1)


def interior_norm_sq(domain: DirichletDomain, u: np.ndarray) -> np.ndarray:
    """‖u‖² in L²(Ω°), equal to L²(Ω) for functions vanishing on ∂Ω."""
    return interior_inner(domain, u, u)
