"""Convergence of the Rothe scheme against the spectral solution."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..problems.wave_problem import WaveProblem
from ..solvers.rothe import solve_rothe
from ..solvers.spectral import FormulaVariant, Spectrum, eigendecompose, solve_spectral
from ..utils.config import get_settings
from ..utils.exceptions import ProblemValidationError
from .reporting import ExperimentReport

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class ConvergenceReport(ExperimentReport):
    """Sup errors against the oracle per n, with empirical orders between neighbours.

    ``orders[i]`` compares n_values[i] and n_values[i + 1] and is None when
    either error is exactly zero.
    """

    n_values: Tuple[int, ...]
    errors: Tuple[float, ...]
    orders: Tuple[Optional[float], ...]
    T: float = 1.0
    minimum_order: float = 0.8

    experiment = "convergence"
    columns = ["n", "step", "error", "order"]

    @property
    def exact(self) -> bool:
        return all(e == 0 for e in self.errors)

    @property
    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.errors, self.errors[1:]))

    def rows(self) -> List[Dict[str, Any]]:
        padded = list(self.orders) + [None]
        return [
            {"n": n, "step": self.T / n, "error": e, "order": order}
            for n, e, order in zip(self.n_values, self.errors, padded)
        ]

    def checks(self) -> Dict[str, bool]:
        if self.exact:
            return {"exact_solution": True}
        defined = [o for o in self.orders if o is not None]
        return {
            "errors_strictly_decreasing": self.strictly_decreasing,
            "order_at_least_minimum": bool(defined) and min(defined) >= self.minimum_order,
        }

    def metrics(self) -> Dict[str, Any]:
        return {
            "T": self.T,
            "n_values": list(self.n_values),
            "errors": list(self.errors),
            "orders": list(self.orders),
            "orders_undefined": any(o is None for o in self.orders),
        }


def empirical_orders(n_values: Sequence[int], errors: Sequence[float]) -> Tuple[Optional[float], ...]:
    """log(eᵢ/eᵢ₊₁)/log(nᵢ₊₁/nᵢ), i.e. log₂ of the error ratio when n doubles."""
    orders = []
    for (n0, e0), (n1, e1) in zip(zip(n_values, errors), zip(n_values[1:], errors[1:])):
        orders.append(math.log(e0 / e1) / math.log(n1 / n0) if e0 > 0 and e1 > 0 else None)
    return tuple(orders)


def _rothe_error(problem: WaveProblem, T: float, n: int, spectrum: Spectrum) -> float:
    run = solve_rothe(problem, T, n)
    oracle = solve_spectral(problem, run.times, FormulaVariant.DUHAMEL, spectrum=spectrum)
    return float(np.max(np.abs(run.levels - oracle.u)))


def convergence_study(
    problem: WaveProblem,
    T: float,
    n_list: Sequence[int],
    max_workers: Optional[int] = None,
    minimum_order: float = 0.8,
) -> ConvergenceReport:
    """Sup over the grid times and Ω° of |u⁽ⁿ⁾ − u_spectral| for each n; runs fan out over threads."""
    n_values = [int(n) for n in n_list]
    if not n_values or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ProblemValidationError(f"n_list must be strictly increasing and nonempty, got {n_values}")

    spectrum = eigendecompose(problem.domain)
    workers = max_workers or get_settings().max_workers
    with ThreadPoolExecutor(max_workers=workers) as pool:
        errors = list(pool.map(lambda n: _rothe_error(problem, T, n, spectrum), n_values))

    orders = empirical_orders(n_values, errors)
    logger.info(f"Convergence over n={n_values}: errors={[f'{e:.3e}' for e in errors]}")
    return ConvergenceReport(
        n_values=tuple(n_values),
        errors=tuple(errors),
        orders=orders,
        minimum_order=minimum_order,
        T=float(T),
    )
