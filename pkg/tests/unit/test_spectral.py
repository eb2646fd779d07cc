import math

import numpy as np
import pandas as pd
import pytest

from src.analysis.residual import spectral_data_scale, spectral_residual
from src.graphs.domain import split_domain
from src.graphs.weighted_graph import WeightedGraph, path_graph
from src.operators.laplacian import assemble
from src.problems.time_profile import ConstantProfile, PolynomialProfile, SinusoidProfile
from src.problems.wave_problem import Forcing, WaveProblem
from src.solvers.spectral import (
    FormulaVariant,
    duhamel_coefficient,
    eigendecompose,
    energy,
    export_solution,
    export_spectrum,
    paper_coefficient,
    project,
    reconstruct,
    solve_spectral,
)
from src.utils.exceptions import DegenerateSpectrumError, ProblemValidationError


def mu_gram(spectrum):
    phi = spectrum.vectors
    return (phi * spectrum.domain.interior_measure[:, None]).T @ phi


def test_two_interior_spectrum(two_interior_domain):
    """L = [[2, −1], [−1, 2]] has λ = 1, 3 with φ = (1, ±1)/√2."""
    spectrum = eigendecompose(two_interior_domain)
    np.testing.assert_allclose(spectrum.eigenvalues, [1.0, 3.0], rtol=1e-14)
    np.testing.assert_allclose(spectrum.vectors[:, 0], [1 / np.sqrt(2), 1 / np.sqrt(2)], rtol=1e-14)
    np.testing.assert_allclose(spectrum.vectors[:, 1], [1 / np.sqrt(2), -1 / np.sqrt(2)], rtol=1e-14)
    assert spectrum.eigenfunction(1)("v4") < 0
    np.testing.assert_allclose(spectrum.frequencies, [1.0, np.sqrt(3.0)], rtol=1e-14)


def test_random_spectra_are_positive_and_orthonormal(make_random_domain, rng):
    """λ_k > 0, μ-orthonormal eigenvectors and L φ_k = λ_k φ_k."""
    for k in range(20):
        domain = make_random_domain(int(rng.integers(6, 64)), "normalized" if k % 2 else None)
        spectrum = eigendecompose(domain)
        assert np.all(spectrum.eigenvalues > 0)
        assert np.max(np.abs(mu_gram(spectrum) - np.eye(domain.N))) <= 1e-12
        operator, _ = assemble(domain)
        lam, phi = spectrum.eigenvalues, spectrum.vectors
        assert np.max(np.abs(operator.dense() @ phi - phi * lam)) <= 1e-10 * max(1.0, lam[-1])


def test_normalized_spectrum_lies_below_two(make_random_domain):
    for _ in range(20):
        spectrum = eigendecompose(make_random_domain(30, "normalized"))
        assert 0 < spectrum.eigenvalues[0] and spectrum.eigenvalues[-1] < 2


def test_tied_eigenvalues_stay_orthonormal():
    """A symmetric triangle gives L = 4I − J: λ = 1 once and 4 twice."""
    graph = WeightedGraph(
        ["a1", "a2", "a3", "b", "o"],
        [("a1", "a2", 1.0), ("a2", "a3", 1.0), ("a1", "a3", 1.0),
         ("a1", "b", 1.0), ("a2", "b", 1.0), ("a3", "b", 1.0), ("b", "o", 1.0)],
    )
    domain = split_domain(graph, ["a1", "a2", "a3", "b"])
    spectrum = eigendecompose(domain)
    np.testing.assert_allclose(spectrum.eigenvalues, [1.0, 4.0, 4.0], rtol=1e-13)
    assert np.max(np.abs(mu_gram(spectrum) - np.eye(3))) <= 1e-12


def test_degenerate_spectrum_is_rejected():
    graph = WeightedGraph(["a", "b", "c", "d"], [("a", "b", 1.0), ("c", "d", 1.0)])
    with pytest.raises(DegenerateSpectrumError):
        eigendecompose(split_domain(graph, ["a", "b", "c"]))


def test_project_and_reconstruct(make_random_domain, rng):
    domain = make_random_domain(25, "normalized")
    spectrum = eigendecompose(domain)
    u = rng.standard_normal(domain.N)
    np.testing.assert_allclose(reconstruct(spectrum, project(spectrum, u)), u, atol=1e-12)
    batch = rng.standard_normal((4, domain.N))
    assert project(spectrum, batch).shape == (4, domain.N)


def test_duhamel_coefficient_free_oscillation():
    state = duhamel_coefficient(2.0, 1.0, 0.0, ConstantProfile(0.0), 1.3)
    assert state.a == pytest.approx(np.cos(np.sqrt(2.0) * 1.3), abs=1e-15)
    assert state.da == pytest.approx(-np.sqrt(2.0) * np.sin(np.sqrt(2.0) * 1.3), abs=1e-15)
    assert state.d2a == pytest.approx(-2.0 * state.a, abs=1e-15)


def test_duhamel_coefficient_constant_forcing():
    """a'' + λa = c from rest is a = c(1 − cos ωt)/λ."""
    lam, c, t = 3.0, -1.0, 0.8
    omega = np.sqrt(lam)
    state = duhamel_coefficient(lam, 0.0, 0.0, ConstantProfile(c), t)
    assert state.a == pytest.approx(c * (1 - np.cos(omega * t)) / lam, abs=1e-15)
    assert state.da == pytest.approx(c * np.sin(omega * t) / omega, abs=1e-15)
    assert state.d2a == pytest.approx(c - lam * state.a, abs=1e-15)


def test_duhamel_coefficient_combination_is_linear():
    combination = [(2.0, SinusoidProfile(1.0, 0.5)), (-1.0, PolynomialProfile([0.0, 1.0]))]
    combined = duhamel_coefficient(1.7, 0.2, -0.1, combination, 2.0)
    first = duhamel_coefficient(1.7, 0.2, -0.1, [(2.0, SinusoidProfile(1.0, 0.5))], 2.0)
    second = duhamel_coefficient(1.7, 0.0, 0.0, [(-1.0, PolynomialProfile([0.0, 1.0]))], 2.0)
    assert combined.a == pytest.approx(first.a + second.a, abs=1e-14)
    assert combined.da == pytest.approx(first.da + second.da, abs=1e-14)


def test_paper_coefficient_starts_with_shifted_velocity():
    """The variant's initial velocity is h − b(0) and it still solves a'' + λa = b."""
    lam, h, c = 2.0, 0.3, -1.0
    start = paper_coefficient(lam, 0.0, h, ConstantProfile(c), 0.0)
    assert start.a == 0.0
    assert start.da == pytest.approx(h - c, abs=1e-15)
    later = paper_coefficient(lam, 0.0, h, ConstantProfile(c), 1.1)
    duhamel = duhamel_coefficient(lam, 0.0, h, ConstantProfile(c), 1.1)
    omega = np.sqrt(lam)
    assert later.a == pytest.approx(duhamel.a - c * np.sin(omega * 1.1) / omega, abs=1e-15)
    assert later.d2a == pytest.approx(c - lam * later.a, abs=1e-14)


def test_negative_time_is_rejected():
    with pytest.raises(ProblemValidationError):
        duhamel_coefficient(1.0, 1.0, 0.0, ConstantProfile(0.0), -0.5)


def test_single_interior_closed_form(single_interior_problem):
    """u(t) = cos(√2 t) on [0, 5]."""
    times = np.linspace(0.0, 5.0, 201)
    solution = solve_spectral(single_interior_problem, times)
    np.testing.assert_allclose(solution.u[:, 0], np.cos(np.sqrt(2.0) * times), rtol=0, atol=1e-12)
    np.testing.assert_allclose(solution.du[:, 0], -np.sqrt(2.0) * np.sin(np.sqrt(2.0) * times), rtol=0, atol=1e-12)


def test_polynomial_forcing_on_long_path_matches_taylor_series():
    """Zero data and f = 1·t³: u(t) = Σ_m (−L)^m f · 3!·t^{2m+5}/(2m+5)!, small λ₁ included."""
    domain = split_domain(path_graph(62), [f"v{k}" for k in range(2, 62)])
    assert domain.N == 58
    forcing = Forcing.from_terms(domain, [(np.ones(domain.N), PolynomialProfile([0.0, 0.0, 0.0, 1.0]))])
    problem = WaveProblem.create(domain, forcing=forcing)
    operator, _ = assemble(domain)
    L = operator.dense()
    for t in (0.05, 0.5):
        term, expected = np.ones(domain.N), np.zeros(domain.N)
        for m in range(12):
            expected += term * 6.0 * t ** (2 * m + 5) / math.factorial(2 * m + 5)
            term = -L @ term
        np.testing.assert_allclose(solve_spectral(problem, [t]).u[0], expected, rtol=1e-9)


def test_initial_conditions_and_residual(data_dir):
    """The Duhamel solution meets g, h and the equation for mixed forcing."""
    from src.problems.loader import load_problem

    problem = load_problem(data_dir / "problems" / "weighted_mixed_forcing.json")
    solution = solve_spectral(problem, np.linspace(0.0, 3.0, 31))
    np.testing.assert_allclose(solution.u[0], problem.g, atol=1e-12)
    np.testing.assert_allclose(solution.du[0], problem.h, atol=1e-12)
    assert spectral_residual(solution) <= 1e-9 * spectral_data_scale(solution)
    assert spectral_residual(solution, [0.25, 2.9]) <= 1e-9 * spectral_data_scale(solution)


def test_evaluate_matches_stored_values(two_interior_problem):
    solution = solve_spectral(two_interior_problem, [0.0, 0.5, 1.0])
    u, du, d2u = solution.evaluate(0.5)
    np.testing.assert_array_equal(u, solution.u[1])
    np.testing.assert_array_equal(du, solution.du[1])
    np.testing.assert_array_equal(d2u, solution.d2u[1])


def test_variant_names():
    assert FormulaVariant("paper") is FormulaVariant.PAPER_THM12
    assert FormulaVariant("duhamel") is FormulaVariant.DUHAMEL
    with pytest.raises(ValueError):
        FormulaVariant("other")


def test_energy_conserved_without_forcing(make_random_domain, rng):
    """e(t) = ∫|∇u|² + ∫|∂_t u|² is constant, and spatial and modal forms agree."""
    domain = make_random_domain(20, "normalized")
    problem = WaveProblem.create(domain, g=rng.standard_normal(domain.N), h=rng.standard_normal(domain.N))
    solution = solve_spectral(problem, [])
    values = [energy(problem, solution, t) for t in np.linspace(0.0, 10.0, 50)]
    e0 = values[0].spatial
    assert max(abs(v.spatial - e0) for v in values) <= 1e-10 * e0
    assert max(abs(v.spatial - v.modal) for v in values) <= 1e-10 * e0


def test_forced_energy_is_not_conserved(constant_forcing_problem):
    solution = solve_spectral(constant_forcing_problem, [])
    assert energy(constant_forcing_problem, solution, 0.0).spatial == 0.0
    assert energy(constant_forcing_problem, solution, 1.0).spatial > 0.0


def test_export_spectrum(tmp_path, two_interior_domain):
    path = export_spectrum(eigendecompose(two_interior_domain), tmp_path / "spectrum.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["k", "lambda", "v3", "v4"]
    np.testing.assert_allclose(frame["lambda"], [1.0, 3.0], rtol=1e-14)


def test_export_solution(tmp_path, two_interior_problem):
    solution = solve_spectral(two_interior_problem, [0.0, 0.5])
    frame = pd.read_csv(export_solution(solution, tmp_path / "solution.csv"))
    assert list(frame.columns) == ["t", "vertex", "u", "du"]
    assert len(frame) == 2 * 4
    assert frame.loc[frame["vertex"] == "v2", "u"].tolist() == [0.0, 0.0]
    assert frame["u"].iloc[1] == pytest.approx(1.0, abs=1e-14)
