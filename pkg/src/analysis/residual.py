"""Pointwise residual of ∂_t²u − Δ_Ω u = f on Ω°."""

from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..operators.laplacian import assemble
from ..problems.wave_problem import WaveProblem
from ..solvers.rothe import RotheRun
from ..solvers.spectral import SpectralSolution

logger = structlog.get_logger(__name__)

# evaluator(t) -> (u(t), ∂_t²u(t)) on Ω°
Evaluator = Callable[[float], Tuple[np.ndarray, np.ndarray]]


def residual(problem: WaveProblem, evaluator: Evaluator, times: Sequence[float]) -> float:
    """max over times × Ω° of |∂_t²u − Δ_Ω u − f|."""
    operator, _ = assemble(problem.domain)
    worst = 0.0
    for t in times:
        u, u_tt = evaluator(float(t))
        # −Δ_Ω u = L u
        value = u_tt + operator.apply(u) - problem.forcing.at(float(t))
        worst = max(worst, float(np.max(np.abs(value))) if value.size else 0.0)
    return worst


def spectral_residual(solution: SpectralSolution, times: Optional[Sequence[float]] = None) -> float:
    """Residual of a modal solution with the analytic ∂_t²u; the stored times by default."""
    if times is None:
        if solution.times.size == 0:
            return 0.0
        operator, _ = assemble(solution.domain)
        value = solution.d2u + operator.apply(solution.u) - solution.problem.forcing.at(solution.times)
        return float(np.max(np.abs(value)))

    def evaluator(t: float) -> Tuple[np.ndarray, np.ndarray]:
        u, _, u_tt = solution.evaluate(t)
        return u, u_tt

    return residual(solution.problem, evaluator, times)


def spectral_data_scale(solution: SpectralSolution) -> float:
    """max(1, |f|, |∂_t²u|) over the solution's times."""
    forcing = solution.problem.forcing.at(solution.times) if solution.times.size else np.zeros(0)
    peaks = [1.0]
    for values in (forcing, solution.d2u):
        if np.size(values):
            peaks.append(float(np.max(np.abs(values))))
    return max(peaks)


def scheme_residual(run: RotheRun) -> float:
    """max over levels i ≥ 1 and Ω° of |−Δ_Ω uⁱ + δ²uⁱ − fⁱ|, the discrete identity of each step."""
    operator, _ = assemble(run.domain)
    value = operator.apply(run.levels[1:]) + run.delta2 - run.f_levels[1:]
    return float(np.max(np.abs(value)))


def scheme_data_scale(run: RotheRun) -> float:
    """max(1, ‖f‖_∞, ℓ⁻²·max_i ‖uⁱ‖_∞), the size of the terms δ²uⁱ is formed from."""
    return max(
        1.0,
        float(np.max(np.abs(run.f_levels))),
        float(np.max(np.abs(np.vstack([run.u_minus1, run.levels])))) / run.step ** 2,
    )
