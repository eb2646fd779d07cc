"""Uniqueness evidence: refinements agree, and zero data gives the zero solution."""

from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
import structlog

from ..problems.wave_problem import WaveProblem
from ..solvers.rothe import solve_rothe
from ..solvers.spectral import FormulaVariant, solve_spectral
from .reporting import ExperimentReport

logger = structlog.get_logger(__name__)

ZERO_TOLERANCE = 1e-12


@dataclass(frozen=True)
class UniquenessReport(ExperimentReport):
    """Sup differences between Rothe runs with n, 2n, 4n steps on the common grid of the coarsest."""

    n_values: Tuple[int, ...]
    differences: Tuple[float, ...]
    zero_rothe_sup: float
    zero_spectral_sup: float
    spectral_deterministic: bool

    experiment = "uniqueness"
    columns = ["n", "n_fine", "difference"]

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"n": n, "n_fine": 2 * n, "difference": d}
            for n, d in zip(self.n_values, self.differences)
        ]

    def checks(self) -> Dict[str, bool]:
        d = self.differences
        return {
            "differences_shrink": all(b < a or (a == 0 and b == 0) for a, b in zip(d, d[1:])),
            "zero_problem_rothe": self.zero_rothe_sup <= ZERO_TOLERANCE,
            "zero_problem_spectral": self.zero_spectral_sup <= ZERO_TOLERANCE,
            "spectral_deterministic": self.spectral_deterministic,
        }

    def metrics(self) -> Dict[str, Any]:
        return {
            "differences": list(self.differences),
            "zero_rothe_sup": self.zero_rothe_sup,
            "zero_spectral_sup": self.zero_spectral_sup,
        }


def uniqueness_check(problem: WaveProblem, T: float, n: int = 100) -> UniquenessReport:
    """Compare runs with n, 2n and 4n steps, then solve the zero problem on the same domain with both solvers."""
    runs = [solve_rothe(problem, T, n * 2 ** k) for k in range(3)]
    # run k has its coarse grid points every 2^k levels
    coarse = [run.levels[:: 2 ** k] for k, run in enumerate(runs)]
    differences = tuple(float(np.max(np.abs(a - b))) for a, b in zip(coarse, coarse[1:]))

    zero = problem.with_data()
    zero_run = solve_rothe(zero, T, n)
    zero_solution = solve_spectral(zero, zero_run.times)
    first = solve_spectral(problem, runs[0].times, FormulaVariant.DUHAMEL)
    second = solve_spectral(problem, runs[0].times, FormulaVariant.DUHAMEL)

    report = UniquenessReport(
        n_values=(n, 2 * n),
        differences=differences,
        zero_rothe_sup=float(np.max(np.abs(zero_run.levels))),
        zero_spectral_sup=float(np.max(np.abs(zero_solution.u))),
        spectral_deterministic=bool(np.array_equal(first.u, second.u) and np.array_equal(first.du, second.du)),
    )
    logger.info(f"Uniqueness: refinement differences {[f'{d:.3e}' for d in differences]}")
    return report
