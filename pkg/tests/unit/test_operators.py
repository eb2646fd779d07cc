import numpy as np
import pytest

from src.graphs.domain import VertexFunction, split_domain
from src.graphs.weighted_graph import WeightedGraph, path_graph, star_graph
from src.operators.integration import inner_product, integrate, interior_inner, interior_norm_sq
from src.operators.laplacian import (
    apply_dirichlet,
    assemble,
    gradient_energy,
    gradient_form,
    gradient_inner,
    gradient_norm,
    green_residual,
    laplacian_norm_bound,
    mu_laplacian,
    mu_laplacian_all,
    poincare_constant,
    rayleigh_quotient,
    smallest_eigenvalue,
    sobolev_norm,
)
from src.utils.exceptions import DegenerateSpectrumError


def test_integrate_and_inner_product():
    graph = WeightedGraph(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0)], {"a": 1.0, "b": 2.0, "c": 0.5})
    u = np.array([1.0, 2.0, 4.0])
    assert integrate(graph, u) == 1.0 + 4.0 + 2.0
    assert integrate(graph, u, ["b", "c"]) == 6.0
    assert inner_product(graph, u, u) == 1.0 + 8.0 + 8.0


def test_mu_laplacian_of_a_quadratic_on_a_path():
    """Δx² = 2 at the inner vertices of a unit path."""
    graph = path_graph(5)
    u = np.arange(5.0) ** 2
    np.testing.assert_allclose(mu_laplacian_all(graph, u)[1:4], 2.0)
    assert mu_laplacian(graph, u, "v1") == 1.0
    assert mu_laplacian(graph, u, "v3") == 2.0


def test_mu_laplacian_scales_with_measure():
    """Δ carries the factor 1/μ(x)."""
    graph = star_graph(2, measure={"c": 4.0, "l1": 1.0, "l2": 1.0})
    u = VertexFunction.on_vertices(graph, {"l1": 1.0, "l2": 3.0})
    assert mu_laplacian(graph, u, "c") == pytest.approx(1.0)


def test_gradient_form_and_norm():
    graph = path_graph(3)
    u = np.array([0.0, 1.0, 3.0])
    # (1/2)(1² + 2²) at the middle vertex
    assert gradient_form(graph, u, u, "v2") == pytest.approx(2.5)
    assert gradient_norm(graph, u, "v2") == pytest.approx(np.sqrt(2.5))
    assert gradient_form(graph, u, np.ones(3), "v2") == 0.0


def test_assemble_single_interior(single_interior_domain):
    """One interior vertex with two unit edges gives L = [2]."""
    operator, symmetrized = assemble(single_interior_domain)
    np.testing.assert_array_equal(operator.dense(), [[2.0]])
    np.testing.assert_array_equal(symmetrized.dense(), [[2.0]])


def test_assemble_two_interior(two_interior_domain):
    operator, _ = assemble(two_interior_domain)
    np.testing.assert_array_equal(operator.dense(), [[2.0, -1.0], [-1.0, 2.0]])
    assert operator.to_triplets().splitlines() == ["v3 v3 2.0", "v3 v4 -1.0", "v4 v3 -1.0", "v4 v4 2.0"]


def test_operator_matches_apply_dirichlet(make_random_domain, rng):
    """L u = −Δ_Ω u on Ω° for the zero extension of u."""
    domain = make_random_domain(20, "normalized")
    operator, _ = assemble(domain)
    u = rng.standard_normal(domain.N)
    np.testing.assert_allclose(operator.apply(u), -apply_dirichlet(domain, u).values, atol=1e-12)


def test_symmetrized_operator_is_symmetric_and_similar(make_random_domain, rng):
    """S is exactly symmetric and S = M^{1/2} L M^{-1/2}."""
    domain = make_random_domain(20, "normalized")
    operator, symmetrized = assemble(domain)
    S = symmetrized.dense()
    np.testing.assert_array_equal(S, S.T)
    u = rng.standard_normal(domain.N)
    np.testing.assert_allclose(
        symmetrized.from_symmetric_frame(S @ symmetrized.to_symmetric_frame(u)),
        operator.apply(u),
        atol=1e-12,
    )


def test_sparse_storage_agrees_with_dense(make_random_domain, rng):
    domain = make_random_domain(30)
    dense, _ = assemble(domain)
    sparse, sparse_sym = assemble(domain, dense_threshold=1)
    assert sparse.is_sparse and not dense.is_sparse
    u = rng.standard_normal((3, domain.N))
    np.testing.assert_allclose(sparse.apply(u), dense.apply(u), atol=1e-13)
    np.testing.assert_allclose(sparse_sym.shifted(2.0).toarray(), sparse_sym.dense() + 2.0 * np.eye(domain.N))


def test_green_identity_on_random_domains(make_random_domain, rng):
    """∫ Δ_Ω u·v dμ + ∫_Ω Γ(u, v) dμ vanishes for u, v supported on Ω°."""
    for k in range(40):
        domain = make_random_domain(int(rng.integers(6, 64)), "normalized" if k % 2 else None)
        u, v = rng.standard_normal(domain.N), rng.standard_normal(domain.N)
        scale = np.sqrt(gradient_energy(domain, u) * gradient_energy(domain, v))
        assert abs(green_residual(domain, u, v)) <= 1e-12 * scale


def test_gradient_inner_is_the_operator_form(make_random_domain, rng):
    """(∇u, ∇v) = (L u, v) for interior functions."""
    domain = make_random_domain(15)
    operator, _ = assemble(domain)
    u, v = rng.standard_normal(domain.N), rng.standard_normal(domain.N)
    assert gradient_inner(domain, u, v) == pytest.approx(interior_inner(domain, operator.apply(u), v), rel=1e-12)
    assert gradient_energy(domain, u) == pytest.approx(gradient_inner(domain, u, u), rel=1e-14)


def test_sobolev_norm_of_interior_delta(single_interior_domain):
    """δ_{v3}: ∫_Ω |∇u|² = 1 + ½ + ½ and ‖u‖² = 1."""
    u = VertexFunction.on_interior(single_interior_domain, {"v3": 1.0})
    assert sobolev_norm(single_interior_domain, u) == pytest.approx(np.sqrt(3.0), rel=1e-15)


def test_rayleigh_quotient_and_first_eigenvalue(two_interior_domain):
    """The quotient is minimized by the first eigenvector, at λ₁ = 1."""
    assert smallest_eigenvalue(two_interior_domain) == pytest.approx(1.0, rel=1e-12)
    assert rayleigh_quotient(two_interior_domain, [1.0, 1.0]) == pytest.approx(1.0, rel=1e-12)
    assert rayleigh_quotient(two_interior_domain, [1.0, -1.0]) == pytest.approx(3.0, rel=1e-12)
    assert rayleigh_quotient(two_interior_domain, [1.0, 0.3]) > 1.0
    assert poincare_constant(two_interior_domain) == pytest.approx(1.0, rel=1e-12)


def test_poincare_inequality_on_random_domains(make_random_domain, rng):
    """‖u‖² ≤ C ∫_Ω |∇u|² with C = 1/λ₁."""
    for _ in range(10):
        domain = make_random_domain(int(rng.integers(6, 40)))
        C = poincare_constant(domain)
        u = rng.standard_normal(domain.N)
        assert interior_norm_sq(domain, u) <= C * gradient_energy(domain, u) * (1 + 1e-12)


def test_laplacian_norm_bound(single_interior_domain, make_random_domain, rng):
    """2M²D_μ² dominates ‖L v‖²/‖v‖²."""
    assert laplacian_norm_bound(single_interior_domain) == 72.0
    domain = make_random_domain(25)
    operator, _ = assemble(domain)
    bound = laplacian_norm_bound(domain)
    for _ in range(10):
        v = rng.standard_normal(domain.N)
        assert interior_norm_sq(domain, operator.apply(v)) <= bound * interior_norm_sq(domain, v)


def test_degenerate_domain_is_rejected():
    """An interior component cut off from every boundary vertex makes λ₁ vanish."""
    graph = WeightedGraph(["a", "b", "c", "d"], [("a", "b", 1.0), ("c", "d", 1.0)])
    domain = split_domain(graph, ["a", "b", "c"])
    assert domain.interior == ("a", "b")
    with pytest.raises(DegenerateSpectrumError):
        smallest_eigenvalue(domain)
