"""Weighted graphs (V, ω, μ) and the quantities read directly off them."""

import json
import math
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import scipy.sparse as sp
import structlog
from pydantic import ValidationError

from ..utils.exceptions import GraphValidationError, InputFormatError, UnknownVertexError
from .types import MeasureKind

logger = structlog.get_logger(__name__)

Edge = Tuple[str, str, float]
MeasureSpec = Union[None, MeasureKind, str, Mapping[str, float]]


class WeightedGraph:
    """Finite simple graph with symmetric positive edge weights and a positive vertex measure.

    Vertex identifiers are opaque strings; their order is fixed at construction
    and mapped to dense indices. Instances are immutable.
    """

    def __init__(self, vertices: Sequence[str], edges: Iterable[Edge], measure: MeasureSpec = None):
        self.vertices: Tuple[str, ...] = tuple(str(v) for v in vertices)
        self._index: Dict[str, int] = {}
        for position, vertex in enumerate(self.vertices):
            if vertex in self._index:
                raise GraphValidationError(f"Duplicate vertex identifier {vertex!r}")
            self._index[vertex] = position

        self._weights: Dict[Tuple[int, int], float] = {}
        for a, b, w in edges:
            i, j = self.index(str(a)), self.index(str(b))
            if i == j:
                raise GraphValidationError(f"Self-loop at vertex {a!r} is not allowed")
            w = float(w)
            if not math.isfinite(w) or w <= 0:
                raise GraphValidationError(f"Edge {a!r}-{b!r} has non-positive weight {w}")
            key = (min(i, j), max(i, j))
            if key in self._weights:
                raise GraphValidationError(f"Multiple edges between {a!r} and {b!r}")
            self._weights[key] = w

        n = len(self.vertices)
        if self._weights:
            pairs = np.array(sorted(self._weights), dtype=np.int64)
            self.edge_tails = pairs[:, 0]
            self.edge_heads = pairs[:, 1]
            self.edge_weights = np.array([self._weights[tuple(p)] for p in pairs.tolist()], dtype=float)
        else:
            self.edge_tails = np.zeros(0, dtype=np.int64)
            self.edge_heads = np.zeros(0, dtype=np.int64)
            self.edge_weights = np.zeros(0, dtype=float)

        rows = np.concatenate([self.edge_tails, self.edge_heads])
        cols = np.concatenate([self.edge_heads, self.edge_tails])
        data = np.concatenate([self.edge_weights, self.edge_weights])
        self.weight_matrix: sp.csr_matrix = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        self.degree: np.ndarray = np.asarray(self.weight_matrix.sum(axis=1)).ravel()

        self.measure_kind, self.measure = self._resolve_measure(measure)
        for array in (self.edge_tails, self.edge_heads, self.edge_weights, self.degree, self.measure):
            array.setflags(write=False)

    def _resolve_measure(self, measure: MeasureSpec) -> Tuple[MeasureKind, np.ndarray]:
        if measure is None:
            measure = MeasureKind.UNIT
        if isinstance(measure, str):
            try:
                measure = MeasureKind(measure)
            except ValueError:
                raise GraphValidationError(f"Unknown measure kind {measure!r}")

        if measure is MeasureKind.UNIT:
            return MeasureKind.UNIT, np.ones(len(self.vertices))
        if measure is MeasureKind.NORMALIZED:
            isolated = [v for v, m in zip(self.vertices, self.degree) if m <= 0]
            if isolated:
                raise GraphValidationError(f"Normalized measure needs m(x) > 0; isolated vertices: {isolated}")
            return MeasureKind.NORMALIZED, self.degree.copy()
        if isinstance(measure, MeasureKind):
            raise GraphValidationError("Explicit measure requires a value for every vertex")

        values = np.zeros(len(self.vertices))
        for vertex, value in measure.items():
            values[self.index(str(vertex))] = float(value)
        missing = [v for v in self.vertices if v not in measure]
        if missing:
            raise GraphValidationError(f"Explicit measure is missing vertices {missing}")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise GraphValidationError("Vertex measure must be positive everywhere")
        return MeasureKind.EXPLICIT, values

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, vertex: object) -> bool:
        return vertex in self._index

    def __repr__(self) -> str:
        return f"WeightedGraph(|V|={len(self.vertices)}, |E|={len(self._weights)}, measure={self.measure_kind.value})"

    @property
    def edges(self) -> List[Edge]:
        return [
            (self.vertices[i], self.vertices[j], w)
            for i, j, w in zip(self.edge_tails.tolist(), self.edge_heads.tolist(), self.edge_weights.tolist())
        ]

    def index(self, vertex: str) -> int:
        """Dense index of a vertex identifier."""
        try:
            return self._index[vertex]
        except KeyError:
            raise UnknownVertexError(f"Unknown vertex {vertex!r}")

    def weight(self, x: str, y: str) -> float:
        """ω_xy, or 0 when x and y are not adjacent."""
        i, j = self.index(x), self.index(y)
        return self._weights.get((min(i, j), max(i, j)), 0.0)

    def neighbors(self, vertex: str) -> List[Tuple[str, float]]:
        i = self.index(vertex)
        row = self.weight_matrix.getrow(i)
        return [(self.vertices[j], float(w)) for j, w in zip(row.indices.tolist(), row.data.tolist())]

    def mu(self, vertex: str) -> float:
        return float(self.measure[self.index(vertex)])

    def with_measure(self, measure: MeasureSpec) -> "WeightedGraph":
        """Same vertices and edges under a different vertex measure."""
        return WeightedGraph(self.vertices, self.edges, measure)

    @cached_property
    def nx_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_weighted_edges_from(self.edges)
        return graph

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "WeightedGraph":
        """Build a graph from the JSON graph format.

        ``{"vertices": [{"id": str, "mu": number?}], "edges": [{"a": str, "b": str, "w": number}],
        "measure": "unit" | "normalized" | "explicit"}``
        """
        from .schemas import GraphFile

        try:
            spec = GraphFile.model_validate(data)
        except ValidationError as e:
            raise InputFormatError(f"Invalid graph description: {e}")
        vertices = [v.id for v in spec.vertices]
        edges = [(e.a, e.b, e.w) for e in spec.edges]
        measure: MeasureSpec = spec.measure
        if spec.measure is MeasureKind.EXPLICIT:
            measure = {v.id: v.mu for v in spec.vertices}
        return cls(vertices, edges, measure)

    def to_dict(self) -> Dict[str, Any]:
        vertices: List[Dict[str, Any]] = [{"id": v} for v in self.vertices]
        if self.measure_kind is MeasureKind.EXPLICIT:
            for entry, mu in zip(vertices, self.measure.tolist()):
                entry["mu"] = mu
        return {
            "vertices": vertices,
            "edges": [{"a": a, "b": b, "w": w} for a, b, w in self.edges],
            "measure": self.measure_kind.value,
        }


def load_graph(path: Union[str, Path], measure: Optional[MeasureKind] = None) -> WeightedGraph:
    """Read a graph JSON file; ``measure`` overrides the file's measure kind."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputFormatError(f"Malformed graph file {path}: {e.msg}", e.lineno, e.colno)
    except OSError as e:
        raise InputFormatError(f"Cannot read graph file {path}: {e}")
    graph = WeightedGraph.from_dict(data)
    if measure is not None and measure is not graph.measure_kind:
        graph = graph.with_measure(measure)
    logger.info(f"Loaded {graph!r} from {path}")
    return graph


def degree_weight(graph: WeightedGraph, x: str) -> float:
    """m(x) = Σ_{y~x} ω_xy."""
    return float(graph.degree[graph.index(x)])


def compute_d_mu(graph: WeightedGraph) -> float:
    """D_μ = max over vertices of m(x)/μ(x)."""
    if len(graph) == 0:
        raise GraphValidationError("D_mu is undefined on an empty graph")
    return float(np.max(graph.degree / graph.measure))


def _checked_subset(graph: WeightedGraph, subset: Iterable[str]) -> List[str]:
    members = list(dict.fromkeys(subset))
    if not members:
        raise GraphValidationError("Vertex subset must be nonempty")
    for vertex in members:
        graph.index(vertex)
    return members


def is_connected(graph: WeightedGraph, subset: Iterable[str]) -> bool:
    """True iff the subgraph induced on ``subset`` is connected."""
    members = _checked_subset(graph, subset)
    return nx.is_connected(graph.nx_graph.subgraph(members))


def graph_distances(graph: WeightedGraph, subset: Iterable[str], source: str) -> Dict[str, int]:
    """Unweighted breadth-first distances from ``source`` inside the induced subgraph."""
    members = _checked_subset(graph, subset)
    if source not in members:
        raise UnknownVertexError(f"Source {source!r} is not in the subset")
    return dict(nx.single_source_shortest_path_length(graph.nx_graph.subgraph(members), source))


def path_graph(n: int, weight: float = 1.0, measure: MeasureSpec = None, prefix: str = "v") -> WeightedGraph:
    """Path v1 - v2 - ... - vn with a common edge weight."""
    vertices = [f"{prefix}{k}" for k in range(1, n + 1)]
    edges = [(vertices[k], vertices[k + 1], weight) for k in range(n - 1)]
    return WeightedGraph(vertices, edges, measure)


def grid_graph(rows: int, cols: int, weight: float = 1.0, measure: MeasureSpec = None) -> WeightedGraph:
    """rows × cols lattice with 4-neighbour edges; vertex ids are ``"r{i}c{j}"``."""
    name = lambda i, j: f"r{i}c{j}"
    vertices = [name(i, j) for i in range(rows) for j in range(cols)]
    edges = []
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                edges.append((name(i, j), name(i, j + 1), weight))
            if i + 1 < rows:
                edges.append((name(i, j), name(i + 1, j), weight))
    return WeightedGraph(vertices, edges, measure)


def star_graph(leaves: int, weight: float = 1.0, measure: MeasureSpec = None) -> WeightedGraph:
    """Center ``"c"`` joined to leaves ``"l1"`` ... ``"l{leaves}"``."""
    vertices = ["c"] + [f"l{k}" for k in range(1, leaves + 1)]
    edges = [("c", leaf, weight) for leaf in vertices[1:]]
    return WeightedGraph(vertices, edges, measure)
