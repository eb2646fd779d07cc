import json

import numpy as np
import pytest

from src.graphs.types import MeasureKind
from src.problems.loader import load_problem, problem_from_dict
from src.problems.time_profile import ConstantProfile, PolynomialProfile, SinusoidProfile
from src.problems.wave_problem import (
    Forcing,
    HolderCondition,
    WaveProblem,
    empirical_c_tilde,
    eval_forcing,
    holder_estimate,
    index_amplitude,
)
from src.utils.exceptions import InputFormatError, ProblemValidationError, UnknownVertexError


def test_create_reads_mappings_in_interior_order(two_interior_domain):
    problem = WaveProblem.create(two_interior_domain, g={"v4": 2.0, "v3": 1.0}, h={"v2": 0.0})
    np.testing.assert_array_equal(problem.g, [1.0, 2.0])
    np.testing.assert_array_equal(problem.h, [0.0, 0.0])
    assert problem.forcing.is_zero


def test_initial_data_must_vanish_on_boundary(two_interior_domain):
    """Nonzero g on ∂Ω is rejected rather than silently dropped."""
    with pytest.raises(ProblemValidationError):
        WaveProblem.create(two_interior_domain, g={"v2": 1.0})
    with pytest.raises(UnknownVertexError):
        WaveProblem.create(two_interior_domain, h={"v9": 1.0})
    with pytest.raises(ProblemValidationError):
        WaveProblem.create(two_interior_domain, g=np.ones(3))


def test_eval_forcing(two_interior_domain):
    """f is zero on the boundary and undefined off Ω."""
    forcing = Forcing.from_terms(two_interior_domain, [({"v3": 2.0}, PolynomialProfile([0.0, 1.0]))])
    problem = WaveProblem.create(two_interior_domain, forcing=forcing)
    assert eval_forcing(problem, 1.5, "v3") == 3.0
    assert eval_forcing(problem, 1.5, "v4") == 0.0
    assert eval_forcing(problem, 1.5, "v2") == 0.0
    with pytest.raises(UnknownVertexError):
        eval_forcing(problem, 1.0, "v1")
    with pytest.raises(ProblemValidationError):
        eval_forcing(problem, -1.0, "v3")


def test_forcing_is_linear(two_interior_domain):
    """(f₁ + f₂)(t) = f₁(t) + f₂(t), batched over times."""
    f1 = Forcing.from_terms(two_interior_domain, [(np.array([1.0, -1.0]), SinusoidProfile(1.0, 2.0))])
    f2 = Forcing.from_terms(two_interior_domain, [(np.array([0.5, 0.5]), ConstantProfile(2.0))])
    times = np.linspace(0.0, 2.0, 7)
    total = f1 + f2
    assert len(total.terms) == 2
    np.testing.assert_allclose(total.at(times), f1.at(times) + f2.at(times), rtol=0, atol=1e-15)
    assert total.at(times).shape == (7, 2)
    np.testing.assert_allclose(total.at(0.3), f1.at(0.3) + f2.at(0.3), atol=1e-15)


def test_forcing_flags(two_interior_domain):
    zero = Forcing.from_terms(two_interior_domain, [(np.zeros(2), SinusoidProfile(1.0, 2.0))])
    assert zero.is_zero
    assert Forcing(two_interior_domain).at(0.7).tolist() == [0.0, 0.0]
    constant = Forcing.from_terms(two_interior_domain, [({"v3": 1.0}, ConstantProfile(1.0))])
    assert constant.is_time_constant and not constant.is_zero


def test_lipschitz_bound_dominates_differences(two_interior_domain):
    forcing = Forcing.from_terms(two_interior_domain, [(np.array([1.0, 2.0]), SinusoidProfile(1.0, 3.0))])
    c = forcing.lipschitz_bound(2.0)
    assert c == pytest.approx(3.0 * np.sqrt(5.0))
    times = np.linspace(0.0, 2.0, 41)
    values = forcing.at(times)
    gaps = np.sqrt(np.sum((values[1:] - values[:-1]) ** 2, axis=1))
    assert np.all(gaps <= c * np.diff(times) + 1e-14)


def test_holder_condition_validation():
    with pytest.raises(ProblemValidationError):
        HolderCondition(alpha=1.5, c=1.0)
    with pytest.raises(ProblemValidationError):
        HolderCondition(alpha=0.5, c=0.0)
    with pytest.raises(ProblemValidationError):
        HolderCondition(alpha=0.5, c=1.0, c_tilde=-1.0)


def test_holder_estimate_lipschitz_forcing(two_interior_domain):
    """A smooth forcing fits α ≈ 1 and a constant no smaller than any measured modulus ratio."""
    forcing = Forcing.from_terms(two_interior_domain, [(np.array([1.0, 0.0]), SinusoidProfile(1.0, 1.0))])
    problem = WaveProblem.create(two_interior_domain, forcing=forcing)
    estimate = holder_estimate(problem, 1.0)
    assert not estimate.time_constant
    assert estimate.alpha == pytest.approx(1.0, abs=0.05)
    assert estimate.c >= 0.9
    assert estimate.c_tilde == pytest.approx(np.sin(1.0) ** 2, rel=1e-12)


def test_holder_estimate_linear_profile(two_interior_domain):
    """f = (t, 0) has ‖f(t) − f(s)‖ = |t − s| exactly."""
    forcing = Forcing.from_terms(two_interior_domain, [(np.array([1.0, 0.0]), PolynomialProfile([0.0, 1.0]))])
    estimate = holder_estimate(WaveProblem.create(two_interior_domain, forcing=forcing), 2.0)
    assert 0.95 <= estimate.alpha <= 1.05
    assert estimate.c == pytest.approx(1.0, rel=1e-6)
    assert estimate.c_tilde == pytest.approx(4.0)


def test_c_tilde_forms():
    assert HolderCondition(alpha=1.0, c=1.0).c_tilde_at(3.0) is None
    assert HolderCondition(alpha=1.0, c=1.0, c_tilde=2.5).c_tilde_at(100.0) == 2.5
    table = HolderCondition(alpha=1.0, c=1.0, c_tilde={5.0: 9.0, 1.0: 4.0})
    assert list(table.c_tilde) == [1.0, 5.0]
    assert [table.c_tilde_at(T) for T in (0.5, 1.0, 3.0)] == [4.0, 4.0, 9.0]
    assert table.c_tilde_at(6.0) is None
    assert HolderCondition(alpha=1.0, c=1.0, c_tilde=lambda T: T ** 2).c_tilde_at(3.0) == 9.0
    with pytest.raises(ProblemValidationError):
        HolderCondition(alpha=1.0, c=1.0, c_tilde={1.0: -1.0})
    with pytest.raises(ProblemValidationError):
        HolderCondition(alpha=1.0, c=1.0, c_tilde=lambda T: -T).c_tilde_at(1.0)


def test_holder_estimate_time_constant(constant_forcing_problem):
    estimate = holder_estimate(constant_forcing_problem, 1.0)
    assert estimate.time_constant
    assert estimate.alpha is None
    assert estimate.c_tilde == pytest.approx(6.0)
    with pytest.raises(ProblemValidationError):
        holder_estimate(constant_forcing_problem, 1.0, samples=8)


def test_empirical_c_tilde(constant_forcing_problem):
    assert empirical_c_tilde(constant_forcing_problem.forcing, 2.0, points=5) == pytest.approx(6.0)


def test_index_amplitude(six_interior_domain):
    """x_j ↦ j^β in interior order."""
    amplitude = index_amplitude(six_interior_domain, beta=2.0)
    assert amplitude("v3") == 1.0
    assert amplitude("v8") == 36.0


def test_with_data_keeps_domain(two_interior_problem):
    zero = two_interior_problem.with_data()
    assert zero.domain is two_interior_problem.domain
    assert zero.is_zero
    assert not two_interior_problem.is_zero


def test_problem_from_dict_inline_graph():
    data = {
        "graph": {
            "vertices": [{"id": "a"}, {"id": "b"}, {"id": "c"}, {"id": "d"}],
            "edges": [{"a": "a", "b": "b", "w": 1.0}, {"a": "b", "b": "c", "w": 2.0}, {"a": "c", "b": "d", "w": 1.0}],
        },
        "omega": ["a", "b", "c"],
        "g": {"b": 1.0},
        "forcing": [{"amplitude": {"a": 1.0}, "profile": {"kind": "sin", "frequency": 2.0}}],
    }
    problem = problem_from_dict(data, name="inline")
    assert problem.domain.interior == ("a", "b")
    assert problem.domain.boundary == ("c",)
    np.testing.assert_array_equal(problem.g, [0.0, 1.0])
    assert eval_forcing(problem, np.pi / 4, "a") == pytest.approx(1.0)


def test_problem_from_dict_reads_c_tilde_table():
    data = {
        "graph": {
            "vertices": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
            "edges": [{"a": "a", "b": "b", "w": 1.0}, {"a": "b", "b": "c", "w": 1.0}],
        },
        "omega": ["a", "b"],
        "holder": {"alpha": 0.5, "c": 2.0, "c_tilde": {"1": 4.0, "10": 16.0}},
    }
    holder = problem_from_dict(data).holder
    assert holder.c_tilde_at(2.0) == 16.0
    data["holder"]["c_tilde"] = {"1": -4.0}
    with pytest.raises(InputFormatError):
        problem_from_dict(data)


def test_load_problem_by_relative_graph_path(data_dir):
    problem = load_problem(data_dir / "problems" / "two_interior.json")
    assert problem.name == "two_interior"
    assert problem.domain.interior == ("v3", "v4")
    np.testing.assert_array_equal(problem.h, [0.0, -0.25])


def test_load_problem_measure_override(data_dir):
    problem = load_problem(data_dir / "problems" / "single_interior.json", MeasureKind.NORMALIZED)
    assert problem.graph.measure_kind is MeasureKind.NORMALIZED


def test_load_problem_with_holder_and_profiles(data_dir):
    problem = load_problem(data_dir / "problems" / "weighted_mixed_forcing.json")
    assert problem.holder == HolderCondition(alpha=1.0, c=3.0)
    assert [term.profile.kind for term in problem.forcing.terms] == ["sin", "poly"]
    assert problem.graph.measure_kind is MeasureKind.NORMALIZED


def test_load_problem_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"graph": "g.json",\n "omega": [1, 2,,]}')
    with pytest.raises(InputFormatError) as info:
        load_problem(path)
    assert (info.value.line, info.value.column) == (2, 17)


def test_load_problem_schema_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"graph": "g.json"}))
    with pytest.raises(InputFormatError, match="Invalid problem description"):
        load_problem(path)
    path.write_text(json.dumps({"graph": "missing.json", "omega": ["a"]}))
    with pytest.raises(InputFormatError):
        load_problem(path)
