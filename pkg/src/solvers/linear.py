"""Conjugate-gradient solves for the SPD systems of the time stepper."""

from typing import Optional

import numpy as np
import scipy.sparse as sp
import structlog
from scipy.sparse.linalg import cg

from ..operators.laplacian import Matrix, SymmetrizedOperator
from ..utils.config import get_settings
from ..utils.exceptions import LinearSolverError

logger = structlog.get_logger(__name__)


def _relative_residual(matrix: Matrix, x: np.ndarray, rhs: np.ndarray) -> float:
    scale = float(np.linalg.norm(rhs))
    residual = float(np.linalg.norm(matrix @ x - rhs))
    return residual / scale if scale > 0 else residual


def conjugate_gradient(
    matrix: Matrix,
    rhs: np.ndarray,
    x0: Optional[np.ndarray] = None,
    tolerance: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A.

    Stops at relative residual ``tolerance`` (default ``cg_tolerance``) or after
    ``cg_iteration_factor · N`` iterations, in which case LinearSolverError
    carries the residual reached.
    """
    settings = get_settings()
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    tolerance = settings.cg_tolerance if tolerance is None else tolerance
    max_iterations = max_iterations or settings.cg_iteration_factor * max(n, 1)

    if not np.any(rhs):
        return np.zeros(n)

    operator = matrix if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
    x, info = cg(operator, rhs, x0=x0, rtol=tolerance, atol=0.0, maxiter=max_iterations)
    if info != 0:
        residual = _relative_residual(operator, x, rhs)
        # the recursive residual can stall slightly above the target in floating point
        if info < 0 or residual > tolerance:
            logger.error(f"CG stopped after {max_iterations} iterations at relative residual {residual:.3e}")
            raise LinearSolverError(
                f"Conjugate gradient did not reach relative residual {tolerance:g} in {max_iterations} iterations",
                residual,
            )
    return x


def linear_solve_spd(
    operator: SymmetrizedOperator,
    shift: float,
    rhs: np.ndarray,
    x0: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Solve (L + σI) u = rhs through the symmetric frame y = M^{1/2} u.

    ``rhs`` and the returned solution are interior-ordered values in the
    original frame; ``x0`` is an optional initial guess in the same frame.
    """
    guess = operator.to_symmetric_frame(x0) if x0 is not None else None
    y = conjugate_gradient(operator.shifted(shift), operator.to_symmetric_frame(rhs), x0=guess)
    return operator.from_symmetric_frame(y)
