"""The invariant suite run by ``graphwave verify`` on a single problem."""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import structlog

from ..graphs.types import MeasureKind
from ..operators.integration import interior_norm_sq
from ..operators.laplacian import assemble, gradient_energy, green_residual
from ..problems.wave_problem import WaveProblem
from ..solvers.rothe import functional_value, solve_rothe, verify_bounds, verify_interpolant_gaps
from ..solvers.spectral import FormulaVariant, eigendecompose, energy, project, reconstruct, solve_spectral
from .residual import scheme_data_scale, scheme_residual, spectral_data_scale, spectral_residual
from .reporting import ExperimentReport

logger = structlog.get_logger(__name__)

GREEN_TOLERANCE = 1e-12
ORTHONORMALITY_TOLERANCE = 1e-12
EIGEN_RESIDUAL_TOLERANCE = 1e-10
RECONSTRUCTION_TOLERANCE = 1e-12
SCHEME_TOLERANCE = 1e-10
SPECTRAL_RESIDUAL_TOLERANCE = 1e-9
INITIAL_TOLERANCE = 1e-12
ENERGY_TOLERANCE = 1e-10
PERTURBATION = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: Optional[float]
    tolerance: Optional[float]


@dataclass(frozen=True)
class VerificationReport(ExperimentReport):
    """Outcome of every invariant check for one problem."""

    problem: str
    results: Tuple[CheckResult, ...]

    experiment = "verify"
    columns = ["problem", "check", "passed", "value", "tolerance"]

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"problem": self.problem, "check": r.name, "passed": r.passed, "value": r.value, "tolerance": r.tolerance}
            for r in self.results
        ]

    def checks(self) -> Dict[str, bool]:
        return {r.name: r.passed for r in self.results}

    def metrics(self) -> Dict[str, Any]:
        return {"problem": self.problem, "values": {r.name: r.value for r in self.results}}


class _Collector:
    def __init__(self):
        self.results: List[CheckResult] = []

    def check(self, name: str, value: float, tolerance: float, strict: bool = False) -> None:
        passed = value < tolerance if strict else value <= tolerance
        self.results.append(CheckResult(name, bool(passed), float(value), float(tolerance)))

    def flag(self, name: str, passed: bool, value: Optional[float] = None) -> None:
        self.results.append(CheckResult(name, bool(passed), value, None))


def verify_problem(problem: WaveProblem, T: float = 1.0, n: int = 200, seed: int = 0, samples: int = 21) -> VerificationReport:
    """Green's identity, spectral structure, the Rothe scheme and bounds, and the spectral solution's invariants."""
    rng = np.random.default_rng(seed)
    domain = problem.domain
    collect = _Collector()

    # Green's identity on random interior functions
    worst = 0.0
    for _ in range(10):
        u, v = rng.standard_normal(domain.N), rng.standard_normal(domain.N)
        scale = max(float(np.sqrt(gradient_energy(domain, u) * gradient_energy(domain, v))), 1e-300)
        worst = max(worst, abs(green_residual(domain, u, v)) / scale)
    collect.check("green_identity", worst, GREEN_TOLERANCE)

    # spectrum
    spectrum = eigendecompose(domain)
    lam, phi = spectrum.eigenvalues, spectrum.vectors
    collect.flag("eigenvalues_positive", bool(np.all(lam > 0)), float(lam[0]))
    gram = (phi * domain.interior_measure[:, None]).T @ phi
    collect.check("eigenvectors_orthonormal", float(np.max(np.abs(gram - np.eye(domain.N)))), ORTHONORMALITY_TOLERANCE)
    operator, _ = assemble(domain)
    eigen_residual = np.max(np.abs(operator.apply(phi.T) - lam[:, None] * phi.T), axis=1) / np.maximum(1.0, lam)
    collect.check("eigen_equation", float(np.max(eigen_residual)), EIGEN_RESIDUAL_TOLERANCE)
    if domain.graph.measure_kind is MeasureKind.NORMALIZED:
        collect.check("normalized_spectrum_below_2", float(lam[-1]), 2.0, strict=True)
    g_error = np.max(np.abs(reconstruct(spectrum, project(spectrum, problem.g)) - problem.g)) if domain.N else 0.0
    collect.check("reconstruction", float(g_error) / max(1.0, float(np.max(np.abs(problem.g)))), RECONSTRUCTION_TOLERANCE)

    # Rothe scheme
    run = solve_rothe(problem, T, n)
    collect.check("scheme_identity", scheme_residual(run) / scheme_data_scale(run), SCHEME_TOLERANCE)
    boundary = [domain.omega.index(v) for v in domain.boundary]
    collect.check("boundary_zero", float(np.max(np.abs(domain.on_omega(run.levels)[:, boundary]), initial=0.0)), 0.0)
    worst_gain = np.inf
    for i in sorted({1, max(1, n // 2), n}):
        u_prev2 = run.u_minus1 if i == 1 else run.levels[i - 2]
        args = (run.levels[i - 1], u_prev2, run.f_levels[i], run.step)
        base = functional_value(domain, run.levels[i], *args)
        for _ in range(3):
            direction = rng.standard_normal(domain.N)
            for eps in (PERTURBATION, -PERTURBATION):
                worst_gain = min(worst_gain, functional_value(domain, run.levels[i] + eps * direction, *args) - base)
    collect.flag("step_minimizes_functional", bool(worst_gain > 0), float(worst_gain))

    if run.step <= 1:
        bounds_report = verify_bounds(run)
        collect.flag("apriori_bounds", bounds_report.passed, max(bounds_report.max_ratios.values()))
        gaps = verify_interpolant_gaps(run, bounds_report.bounds)
        collect.flag("interpolant_gaps", gaps.passed, gaps.max_gap / gaps.gap_bound if gaps.gap_bound > 0 else 0.0)
    else:
        logger.warning(f"Skipping a-priori bound checks: step {run.step:g} exceeds 1")

    # spectral solution
    times = np.linspace(0.0, T, samples)
    solution = solve_spectral(problem, times, FormulaVariant.DUHAMEL, spectrum=spectrum)
    collect.check("spectral_residual", spectral_residual(solution) / spectral_data_scale(solution), SPECTRAL_RESIDUAL_TOLERANCE)
    mu_norm = lambda w: float(np.sqrt(interior_norm_sq(domain, w)))
    collect.check("initial_displacement", mu_norm(solution.u[0] - problem.g), INITIAL_TOLERANCE)
    collect.check("initial_velocity", mu_norm(solution.du[0] - problem.h), INITIAL_TOLERANCE)

    energies = [energy(problem, solution, float(t)) for t in times]
    mismatch = max(abs(e.spatial - e.modal) / max(abs(e.spatial), 1.0) for e in energies)
    collect.check("energy_spatial_vs_modal", mismatch, ENERGY_TOLERANCE)
    if problem.forcing.is_zero:
        drift = max(abs(e.spatial - energies[0].spatial) for e in energies) / max(energies[0].spatial, 1.0)
        collect.check("energy_conserved", drift, ENERGY_TOLERANCE)

    report = VerificationReport(problem=problem.name, results=tuple(collect.results))
    logger.info(f"Verified {problem.name!r}: {sum(r.passed for r in report.results)}/{len(report.results)} checks passed")
    return report
