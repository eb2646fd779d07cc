"""Bounded domains Ω ⊆ V with their boundary/interior split, and vertex functions on them."""

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Tuple, Union

import numpy as np
import structlog

from ..utils.exceptions import EmptyInteriorError, GraphValidationError, UnknownVertexError
from .types import Support
from .weighted_graph import WeightedGraph

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class DirichletDomain:
    """Ω split into ∂Ω = {x ∈ Ω : x ~ y for some y ∉ Ω} and Ω° = Ω \\ ∂Ω.

    All three vertex tuples follow the graph's vertex order; the interior
    order x_1, ..., x_N is the row order of every matrix and eigenvector.
    """

    graph: WeightedGraph
    omega: Tuple[str, ...]
    boundary: Tuple[str, ...]
    interior: Tuple[str, ...]
    interior_indices: np.ndarray = field(init=False, repr=False, compare=False)
    omega_indices: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        graph = self.graph
        object.__setattr__(self, "interior_indices", np.array([graph.index(v) for v in self.interior], dtype=np.int64))
        object.__setattr__(self, "omega_indices", np.array([graph.index(v) for v in self.omega], dtype=np.int64))
        self.interior_indices.setflags(write=False)
        self.omega_indices.setflags(write=False)

    @property
    def M(self) -> int:
        return len(self.omega)

    @property
    def N(self) -> int:
        return len(self.interior)

    @property
    def interior_measure(self) -> np.ndarray:
        return self.graph.measure[self.interior_indices]

    def interior_position(self, vertex: str) -> int:
        """Position of ``vertex`` in the interior order x_1, ..., x_N."""
        try:
            return self.interior.index(vertex)
        except ValueError:
            raise UnknownVertexError(f"Vertex {vertex!r} is not an interior vertex")

    def extend(self, values: np.ndarray) -> np.ndarray:
        """Zero-extend interior values (last axis) to all of V."""
        values = np.asarray(values, dtype=float)
        extended = np.zeros(values.shape[:-1] + (len(self.graph),))
        extended[..., self.interior_indices] = values
        return extended

    def on_omega(self, values: np.ndarray) -> np.ndarray:
        """Zero-extend interior values (last axis) to Ω in domain order."""
        return self.extend(values)[..., self.omega_indices]


def split_domain(graph: WeightedGraph, omega: Iterable[str]) -> DirichletDomain:
    """Classify Ω into boundary and interior vertices."""
    members = set(omega)
    if not members:
        raise GraphValidationError("Domain must be a nonempty vertex subset")
    for vertex in members:
        graph.index(vertex)

    ordered = tuple(v for v in graph.vertices if v in members)
    boundary = tuple(
        v for v in ordered
        if any(neighbor not in members for neighbor, _ in graph.neighbors(v))
    )
    boundary_set = set(boundary)
    interior = tuple(v for v in ordered if v not in boundary_set)
    if not interior:
        raise EmptyInteriorError("empty interior")

    logger.debug(f"Split domain: M={len(ordered)}, boundary={len(boundary)}, interior={len(interior)}")
    return DirichletDomain(graph=graph, omega=ordered, boundary=boundary, interior=interior)


ValueSpec = Union[np.ndarray, Sequence[float], Mapping[str, float]]


@dataclass(frozen=True, eq=False)
class VertexFunction:
    """Real values on a declared support; evaluation anywhere else returns 0."""

    vertices: Tuple[str, ...]
    values: np.ndarray
    support: Support

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.vertices),):
            raise GraphValidationError(
                f"Expected {len(self.vertices)} values for support {self.support.value}, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __call__(self, vertex: str) -> float:
        try:
            return float(self.values[self.vertices.index(vertex)])
        except ValueError:
            return 0.0

    def on(self, order: Sequence[str]) -> np.ndarray:
        """Values along ``order``, zero for vertices outside the support."""
        lookup = dict(zip(self.vertices, self.values.tolist()))
        return np.array([lookup.get(v, 0.0) for v in order], dtype=float)

    @staticmethod
    def _values(order: Tuple[str, ...], values: ValueSpec) -> np.ndarray:
        if isinstance(values, Mapping):
            unknown = [v for v in values if v not in order]
            if unknown:
                raise UnknownVertexError(f"Vertices {unknown} are outside the declared support")
            return np.array([float(values.get(v, 0.0)) for v in order])
        return np.asarray(values, dtype=float)

    @classmethod
    def on_interior(cls, domain: DirichletDomain, values: ValueSpec) -> "VertexFunction":
        return cls(domain.interior, cls._values(domain.interior, values), Support.INTERIOR)

    @classmethod
    def on_omega(cls, domain: DirichletDomain, values: ValueSpec) -> "VertexFunction":
        return cls(domain.omega, cls._values(domain.omega, values), Support.OMEGA)

    @classmethod
    def on_vertices(cls, graph: WeightedGraph, values: ValueSpec) -> "VertexFunction":
        return cls(graph.vertices, cls._values(graph.vertices, values), Support.VERTICES)


VertexData = Union[VertexFunction, np.ndarray, Sequence[float]]


def interior_values(domain: DirichletDomain, u: VertexData) -> np.ndarray:
    """Interior-ordered array for ``u``; bare arrays are taken to be in interior order."""
    if isinstance(u, VertexFunction):
        return u.on(domain.interior)
    values = np.asarray(u, dtype=float)
    if values.shape[-1] != domain.N:
        raise GraphValidationError(f"Expected {domain.N} interior values, got {values.shape[-1]}")
    return values


def vertex_values(graph: WeightedGraph, u: VertexData) -> np.ndarray:
    """Array over all of V for ``u``; bare arrays are taken to be in graph order."""
    if isinstance(u, VertexFunction):
        return u.on(graph.vertices)
    values = np.asarray(u, dtype=float)
    if values.shape[-1] != len(graph):
        raise GraphValidationError(f"Expected {len(graph)} vertex values, got {values.shape[-1]}")
    return values
