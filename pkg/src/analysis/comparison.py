"""Rothe against both spectral variants, with the initial-velocity audit."""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import structlog

from ..operators.integration import interior_norm_sq
from ..problems.wave_problem import WaveProblem
from ..solvers.rothe import solve_rothe
from ..solvers.spectral import FormulaVariant, eigendecompose, solve_spectral
from .reporting import ExperimentReport
from .residual import spectral_data_scale, spectral_residual

logger = structlog.get_logger(__name__)

INITIAL_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class VariantAudit:
    """Initial-condition and residual figures of one spectral variant."""

    variant: str
    initial_displacement_error: float
    initial_velocity_error: float
    velocity_minus_forcing_error: float
    residual: float
    data_scale: float

    @property
    def passes_suite(self) -> bool:
        return (
            self.initial_displacement_error <= INITIAL_TOLERANCE
            and self.initial_velocity_error <= INITIAL_TOLERANCE
            and self.residual <= RESIDUAL_TOLERANCE * self.data_scale
        )


@dataclass(frozen=True)
class ComparisonReport(ExperimentReport):
    """Sup-norm discrepancies on the Rothe grid and the audit of both variants."""

    T: float
    n: int
    times: tuple
    rothe_vs_duhamel: tuple
    rothe_vs_paper: tuple
    duhamel_vs_paper: tuple
    duhamel: VariantAudit
    paper: VariantAudit
    forcing_at_zero_norm: float

    experiment = "compare"
    columns = ["t", "rothe_vs_duhamel", "rothe_vs_paper", "duhamel_vs_paper"]

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"t": t, "rothe_vs_duhamel": a, "rothe_vs_paper": b, "duhamel_vs_paper": c}
            for t, a, b, c in zip(self.times, self.rothe_vs_duhamel, self.rothe_vs_paper, self.duhamel_vs_paper)
        ]

    def checks(self) -> Dict[str, bool]:
        checks = {
            "duhamel_passes_suite": self.duhamel.passes_suite,
            "paper_velocity_is_h_minus_f0": self.paper.velocity_minus_forcing_error <= INITIAL_TOLERANCE,
            "paper_residual": self.paper.residual <= RESIDUAL_TOLERANCE * self.paper.data_scale,
        }
        if self.forcing_at_zero_norm > INITIAL_TOLERANCE:
            # with f(0) ≠ 0 the variant misses ∂_t u(0) = h
            checks["paper_fails_suite"] = not self.paper.passes_suite
        return checks

    def metrics(self) -> Dict[str, Any]:
        audit = lambda a: {
            "initial_displacement_error": a.initial_displacement_error,
            "initial_velocity_error": a.initial_velocity_error,
            "velocity_minus_forcing_error": a.velocity_minus_forcing_error,
            "residual": a.residual,
            "data_scale": a.data_scale,
            "passes_suite": a.passes_suite,
        }
        return {
            "T": self.T,
            "n": self.n,
            "max_rothe_vs_duhamel": max(self.rothe_vs_duhamel),
            "max_rothe_vs_paper": max(self.rothe_vs_paper),
            "max_duhamel_vs_paper": max(self.duhamel_vs_paper),
            "forcing_at_zero_norm": self.forcing_at_zero_norm,
            "duhamel": audit(self.duhamel),
            "paper_thm12": audit(self.paper),
        }


def _audit(problem: WaveProblem, solution) -> VariantAudit:
    u0, du0, _ = solution.evaluate(0.0)
    domain = problem.domain
    norm = lambda v: float(np.sqrt(interior_norm_sq(domain, v)))
    return VariantAudit(
        variant=solution.variant.value,
        initial_displacement_error=norm(u0 - problem.g),
        initial_velocity_error=norm(du0 - problem.h),
        velocity_minus_forcing_error=norm(du0 - (problem.h - problem.forcing.at(0.0))),
        residual=spectral_residual(solution),
        data_scale=spectral_data_scale(solution),
    )


def compare_solvers(problem: WaveProblem, T: float, n: int, times: Optional[Sequence[float]] = None) -> ComparisonReport:
    """Run Rothe and both spectral variants on the Rothe grid (or the given times for the audit residuals)."""
    run = solve_rothe(problem, T, n)
    spectrum = eigendecompose(problem.domain)
    grid = run.times
    duhamel = solve_spectral(problem, grid, FormulaVariant.DUHAMEL, spectrum=spectrum)
    paper = solve_spectral(problem, grid, FormulaVariant.PAPER_THM12, spectrum=spectrum)
    audit_times = grid if times is None else np.asarray(times, dtype=float)
    if times is not None:
        duhamel_audit = solve_spectral(problem, audit_times, FormulaVariant.DUHAMEL, spectrum=spectrum)
        paper_audit = solve_spectral(problem, audit_times, FormulaVariant.PAPER_THM12, spectrum=spectrum)
    else:
        duhamel_audit, paper_audit = duhamel, paper

    sup = lambda a, b: tuple(np.max(np.abs(a - b), axis=1).tolist())
    report = ComparisonReport(
        T=float(T),
        n=int(n),
        times=tuple(grid.tolist()),
        rothe_vs_duhamel=sup(run.levels, duhamel.u),
        rothe_vs_paper=sup(run.levels, paper.u),
        duhamel_vs_paper=sup(duhamel.u, paper.u),
        duhamel=_audit(problem, duhamel_audit),
        paper=_audit(problem, paper_audit),
        forcing_at_zero_norm=float(np.sqrt(interior_norm_sq(problem.domain, problem.forcing.at(0.0)))),
    )
    logger.info(
        f"Compare: Rothe vs Duhamel {max(report.rothe_vs_duhamel):.3e}, "
        f"Duhamel vs paper variant {max(report.duhamel_vs_paper):.3e}"
    )
    return report
