"""μ-Laplacian, Dirichlet Laplacian and gradient form on weighted graphs."""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import structlog

from ..graphs.domain import DirichletDomain, VertexData, VertexFunction, interior_values, vertex_values
from ..graphs.types import Support
from ..graphs.weighted_graph import WeightedGraph, compute_d_mu
from ..utils.config import get_settings
from ..utils.exceptions import DegenerateSpectrumError
from ..utils.io import format_number
from .integration import interior_inner, interior_norm_sq

logger = structlog.get_logger(__name__)

Matrix = Union[np.ndarray, sp.csr_matrix]

# Eigenvalues at or below this are treated as zero.
ZERO_EIGENVALUE = 1e-12


def mu_laplacian_all(graph: WeightedGraph, u: VertexData) -> np.ndarray:
    """Δu(x) = (1/μ(x)) Σ_{y~x} ω_xy (u(y) − u(x)) at every vertex."""
    values = vertex_values(graph, u)
    return (graph.weight_matrix @ values - graph.degree * values) / graph.measure


def mu_laplacian(graph: WeightedGraph, u: VertexData, x: str) -> float:
    """Δu at a single vertex."""
    values = vertex_values(graph, u)
    i = graph.index(x)
    row = graph.weight_matrix.getrow(i)
    return float(np.dot(row.data, values[row.indices] - values[i]) / graph.measure[i])


def gradient_form_all(graph: WeightedGraph, u: VertexData, v: VertexData) -> np.ndarray:
    """Γ(u, v)(x) = (1/2μ(x)) Σ_{y~x} ω_xy (u(y) − u(x))(v(y) − v(x)) at every vertex."""
    a, b = vertex_values(graph, u), vertex_values(graph, v)
    tails, heads = graph.edge_tails, graph.edge_heads
    terms = graph.edge_weights * (a[heads] - a[tails]) * (b[heads] - b[tails])
    n = len(graph)
    total = np.bincount(tails, weights=terms, minlength=n) + np.bincount(heads, weights=terms, minlength=n)
    return total / (2.0 * graph.measure)


def gradient_form(graph: WeightedGraph, u: VertexData, v: VertexData, x: str) -> float:
    return float(gradient_form_all(graph, u, v)[graph.index(x)])


def gradient_norm(graph: WeightedGraph, u: VertexData, x: str) -> float:
    """|∇u|(x) = √Γ(u, u)(x)."""
    return float(np.sqrt(max(gradient_form(graph, u, u, x), 0.0)))


def _omega_edge_factors(domain: DirichletDomain) -> np.ndarray:
    # ½ ω_e for each endpoint of e lying in Ω
    graph = domain.graph
    in_omega = np.zeros(len(graph), dtype=bool)
    in_omega[domain.omega_indices] = True
    return 0.5 * graph.edge_weights * (in_omega[graph.edge_tails].astype(float) + in_omega[graph.edge_heads])


def gradient_energy(domain: DirichletDomain, u: np.ndarray) -> np.ndarray:
    """∫_Ω |∇u|² dμ for interior-ordered arrays, zero-extended; leading axes are batched."""
    graph = domain.graph
    extended = domain.extend(u)
    diffs = extended[..., graph.edge_heads] - extended[..., graph.edge_tails]
    return (diffs ** 2) @ _omega_edge_factors(domain)


def gradient_inner(domain: DirichletDomain, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(∇u, ∇v) = ∫_Ω Γ(u, v) dμ for interior-ordered arrays."""
    graph = domain.graph
    a, b = domain.extend(u), domain.extend(v)
    da = a[..., graph.edge_heads] - a[..., graph.edge_tails]
    db = b[..., graph.edge_heads] - b[..., graph.edge_tails]
    return (da * db) @ _omega_edge_factors(domain)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """L = −Δ_Ω in the interior order, dense or CSR."""

    domain: DirichletDomain
    matrix: Matrix

    @property
    def N(self) -> int:
        return self.domain.N

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.array(self.matrix)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """L·u along the last axis."""
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            return np.asarray(self.matrix @ u).ravel()
        return np.asarray(self.matrix @ u.reshape(-1, self.N).T).T.reshape(u.shape)

    def to_triplets(self) -> str:
        """``row_id col_id value`` lines for the nonzero entries, row-major."""
        coo = sp.coo_matrix(self.matrix)
        order = np.lexsort((coo.col, coo.row))
        interior = self.domain.interior
        return "\n".join(
            f"{interior[i]} {interior[j]} {format_number(value)}"
            for i, j, value in zip(coo.row[order].tolist(), coo.col[order].tolist(), coo.data[order].tolist())
        )


@dataclass(frozen=True, eq=False)
class SymmetrizedOperator:
    """S = M^{1/2} L M^{-1/2} with M = diag(μ) on Ω°; exactly symmetric."""

    matrix: Matrix
    sqrt_mu: np.ndarray

    @property
    def N(self) -> int:
        return self.sqrt_mu.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.array(self.matrix)

    def shifted(self, sigma: float) -> Matrix:
        """S + σI in the same storage."""
        if sp.issparse(self.matrix):
            return (self.matrix + sigma * sp.identity(self.N, format="csr")).tocsr()
        return self.matrix + sigma * np.eye(self.N)

    def to_symmetric_frame(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u) * self.sqrt_mu

    def from_symmetric_frame(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y) / self.sqrt_mu


def assemble(domain: DirichletDomain, dense_threshold: Optional[int] = None) -> Tuple[OperatorMatrix, SymmetrizedOperator]:
    """Assemble −Δ_Ω and its symmetrized twin.

    Row x_j has m(x_j)/μ(x_j) on the diagonal, including edges leaving Ω°,
    and −ω_{x_j x_k}/μ(x_j) for interior neighbours x_k.
    """
    if dense_threshold is None:
        dense_threshold = get_settings().dense_threshold
    graph = domain.graph
    idx = domain.interior_indices
    mu = domain.interior_measure
    diagonal = graph.degree[idx] / mu

    coupling = graph.weight_matrix[idx][:, idx].tocoo()
    rows, cols, w = coupling.row, coupling.col, coupling.data
    n = domain.N
    L = sp.diags(diagonal) - sp.csr_matrix((w / mu[rows], (rows, cols)), shape=(n, n))
    S = sp.diags(diagonal) - sp.csr_matrix((w / np.sqrt(mu[rows] * mu[cols]), (rows, cols)), shape=(n, n))

    sqrt_mu = np.sqrt(mu)
    sqrt_mu.setflags(write=False)
    if n <= dense_threshold:
        return OperatorMatrix(domain, L.toarray()), SymmetrizedOperator(S.toarray(), sqrt_mu)
    logger.debug(f"Using sparse storage for N={n}")
    return OperatorMatrix(domain, L.tocsr()), SymmetrizedOperator(S.tocsr(), sqrt_mu)


def apply_dirichlet(domain: DirichletDomain, u: VertexData) -> VertexFunction:
    """Δ_Ω u on Ω°, with u extended by zero outside Ω°."""
    extended = domain.extend(interior_values(domain, u))
    values = mu_laplacian_all(domain.graph, extended)[domain.interior_indices]
    return VertexFunction(domain.interior, values, Support.INTERIOR)


def green_residual(domain: DirichletDomain, u: VertexData, v: VertexData) -> float:
    """∫_{Ω°} Δ_Ω u · v dμ + ∫_Ω Γ(u, v) dμ, which vanishes for u, v supported on Ω°."""
    a, b = interior_values(domain, u), interior_values(domain, v)
    laplacian_term = float(interior_inner(domain, apply_dirichlet(domain, a).values, b))
    gamma = gradient_form_all(domain.graph, domain.extend(a), domain.extend(b))
    omega = domain.omega_indices
    gradient_term = float(np.dot(gamma[omega], domain.graph.measure[omega]))
    return laplacian_term + gradient_term


def sobolev_norm(domain: DirichletDomain, u: VertexData) -> float:
    """‖u‖_{W^{1,2}(Ω)} = (∫_Ω |∇u|² dμ + ∫_Ω |u|² dμ)^{1/2}; u is taken as zero outside Ω."""
    graph = domain.graph
    if isinstance(u, VertexFunction):
        values = np.zeros(len(graph))
        values[domain.omega_indices] = u.on(domain.omega)
    else:
        values = domain.extend(interior_values(domain, u))
    omega = domain.omega_indices
    mu = graph.measure[omega]
    gradient_sq = float(np.dot(gradient_form_all(graph, values, values)[omega], mu))
    return float(np.sqrt(gradient_sq + np.dot(values[omega] ** 2, mu)))


def rayleigh_quotient(domain: DirichletDomain, u: VertexData) -> float:
    """∫_Ω |∇u|² dμ / ∫ |u|² dμ for u vanishing outside Ω°."""
    values = interior_values(domain, u)
    return float(gradient_energy(domain, values) / interior_norm_sq(domain, values))


def smallest_eigenvalue(domain: DirichletDomain) -> float:
    """λ₁ of −Δ_Ω."""
    _, symmetrized = assemble(domain)
    lam = float(scipy.linalg.eigvalsh(symmetrized.dense(), subset_by_index=[0, 0])[0])
    if lam <= ZERO_EIGENVALUE:
        raise DegenerateSpectrumError(
            f"lambda_1 = {lam:.3e}: boundary missing or disconnected interior component touching no boundary"
        )
    return lam


def poincare_constant(domain: DirichletDomain) -> float:
    """C = 1/λ₁, the sharp constant in ‖u‖² ≤ C ∫_Ω |∇u|² for u vanishing on ∂Ω."""
    return 1.0 / smallest_eigenvalue(domain)


def laplacian_norm_bound(domain: DirichletDomain) -> float:
    """2M²D_μ², bounding ‖Δ_Ω v‖²/‖v‖² in L²."""
    return 2.0 * domain.M ** 2 * compute_d_mu(domain.graph) ** 2
