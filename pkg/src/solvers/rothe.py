"""Rothe time discretization of the wave problem.

[0, T] is split into n steps of length ℓ = T/n. Starting from u⁰ = g and
u⁻¹ = g − ℓh, each level solves the implicit step

    (L + ℓ⁻²I) uⁱ = fⁱ + ℓ⁻²(2uⁱ⁻¹ − uⁱ⁻²),    L = −Δ_Ω,  fⁱ = f(t_i, ·),

which is the Euler–Lagrange equation of the quadratic functional Fᵢ. The run
keeps every level so the a-priori bounds and the interpolant estimates can be
checked afterwards.
"""

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import structlog

from ..graphs.domain import DirichletDomain, VertexData, VertexFunction, interior_values
from ..operators.integration import interior_inner, interior_norm_sq
from ..operators.laplacian import (
    OperatorMatrix,
    SymmetrizedOperator,
    assemble,
    gradient_energy,
    laplacian_norm_bound,
    poincare_constant,
)
from ..problems.wave_problem import WaveProblem, empirical_c_tilde
from ..utils.exceptions import BoundsNotApplicableError, LinearSolverError, ProblemValidationError
from ..utils.io import write_csv
from .linear import linear_solve_spd

logger = structlog.get_logger(__name__)

# Each step must satisfy its linear system to this relative residual.
STEP_TOLERANCE = 1e-12

# Rounding allowance for the per-step energy recursion only.
RECURSION_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class RotheRun:
    """All levels of one Rothe run; arrays are interior-ordered.

    ``levels[i]`` is uⁱ for i = 0..n, ``f_levels[i]`` is fⁱ, ``delta[i]`` is
    δuⁱ = (uⁱ − uⁱ⁻¹)/ℓ for i = 0..n and ``delta2[i - 1]`` is
    δ²uⁱ = (δuⁱ − δuⁱ⁻¹)/ℓ for i = 1..n.
    """

    problem: WaveProblem
    T: float
    n: int
    levels: np.ndarray
    u_minus1: np.ndarray
    f_levels: np.ndarray
    step_residuals: np.ndarray = field(repr=False)

    @property
    def domain(self) -> DirichletDomain:
        return self.problem.domain

    @property
    def step(self) -> float:
        return self.T / self.n

    @cached_property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.step

    @cached_property
    def delta(self) -> np.ndarray:
        return np.diff(np.vstack([self.u_minus1, self.levels]), axis=0) / self.step

    @cached_property
    def delta2(self) -> np.ndarray:
        return np.diff(self.delta, axis=0) / self.step

    def level(self, i: int) -> VertexFunction:
        """uⁱ on Ω, zero on ∂Ω."""
        return VertexFunction.on_omega(self.domain, self.domain.on_omega(self.levels[i]))

    @property
    def final(self) -> VertexFunction:
        return self.level(self.n)


def _step_rhs(f_i: np.ndarray, u_prev: np.ndarray, u_prev2: np.ndarray, ell: float) -> np.ndarray:
    return f_i + (2.0 * u_prev - u_prev2) / ell ** 2


def _advance(
    operator: OperatorMatrix,
    symmetrized: SymmetrizedOperator,
    u_prev: np.ndarray,
    u_prev2: np.ndarray,
    f_i: np.ndarray,
    ell: float,
) -> Tuple[np.ndarray, float]:
    rhs = _step_rhs(f_i, u_prev, u_prev2, ell)
    u = linear_solve_spd(symmetrized, ell ** -2, rhs, x0=2.0 * u_prev - u_prev2)

    # residual in L²(Ω°), the norm the symmetric frame measures
    residual = operator.apply(u) + u / ell ** 2 - rhs
    mu = operator.domain.interior_measure
    scale = np.sqrt(np.dot(rhs ** 2, mu))
    relative = float(np.sqrt(np.dot(residual ** 2, mu)) / scale) if scale > 0 else 0.0
    if relative > STEP_TOLERANCE:
        logger.error(f"Rothe step residual {relative:.3e} exceeds {STEP_TOLERANCE:g}")
        raise LinearSolverError(f"Rothe step solved only to relative residual {relative:.3e}", relative)
    return u, relative


def rothe_step(
    domain: DirichletDomain,
    u_prev: VertexData,
    u_prev2: VertexData,
    f_i: VertexData,
    ell: float,
) -> VertexFunction:
    """One implicit step: the unique uⁱ with (L + ℓ⁻²I)uⁱ = fⁱ + ℓ⁻²(2uⁱ⁻¹ − uⁱ⁻²) on Ω°."""
    if ell <= 0:
        raise ProblemValidationError(f"Step length must be positive, got {ell}")
    operator, symmetrized = assemble(domain)
    u, _ = _advance(
        operator,
        symmetrized,
        interior_values(domain, u_prev),
        interior_values(domain, u_prev2),
        interior_values(domain, f_i),
        ell,
    )
    return VertexFunction.on_interior(domain, u)


def solve_rothe(problem: WaveProblem, T: float, n: int) -> RotheRun:
    """Run the scheme on [0, T] with n uniform steps."""
    if T <= 0:
        raise ProblemValidationError(f"Horizon T must be positive, got {T}")
    if n < 1:
        raise ProblemValidationError(f"Step count must be at least 1, got {n}")
    ell = T / n
    if ell > 1:
        logger.warning(f"Step length {ell:g} exceeds 1; the a-priori bounds are not guaranteed")

    domain = problem.domain
    operator, symmetrized = assemble(domain)
    times = np.arange(n + 1) * ell
    f_levels = problem.forcing.at(times)

    levels = np.empty((n + 1, domain.N))
    levels[0] = problem.g
    u_minus1 = problem.g - ell * problem.h
    residuals = np.zeros(n)
    u_prev2, u_prev = u_minus1, levels[0]
    for i in range(1, n + 1):
        levels[i], residuals[i - 1] = _advance(operator, symmetrized, u_prev, u_prev2, f_levels[i], ell)
        u_prev2, u_prev = u_prev, levels[i]

    logger.info(f"Rothe run finished: N={domain.N}, n={n}, T={T:g}, max step residual {residuals.max():.2e}")
    for array in (levels, u_minus1, f_levels, residuals):
        array.setflags(write=False)
    return RotheRun(problem, float(T), int(n), levels, u_minus1, f_levels, residuals)


def functional_value(
    domain: DirichletDomain,
    u: VertexData,
    u_prev: VertexData,
    u_prev2: VertexData,
    f_i: VertexData,
    ell: float,
) -> float:
    """Fᵢ(u) = (∇u, ∇u) + ℓ⁻²(u, u) + 2ℓ⁻²(−2uⁱ⁻¹ + uⁱ⁻², u) − 2(fⁱ, u); minimized by uⁱ."""
    a = interior_values(domain, u)
    history = -2.0 * interior_values(domain, u_prev) + interior_values(domain, u_prev2)
    return float(
        gradient_energy(domain, a)
        + interior_norm_sq(domain, a) / ell ** 2
        + 2.0 * interior_inner(domain, history, a) / ell ** 2
        - 2.0 * interior_inner(domain, interior_values(domain, f_i), a)
    )


@dataclass(frozen=True)
class AprioriBounds:
    """Constants of the a-priori estimates, with the Sobolev constant realized as 1/λ₁."""

    C0: float
    C1: float
    C2: float
    sobolev_C: float
    c_tilde: float


def apriori_bounds(run: RotheRun) -> AprioriBounds:
    """C₀ = e^T(‖∇u⁰‖² + ‖δu⁰‖²) + c̃·T·e^T, C₁ = C·C₀, C₂ = 4M²D_μ²·C₁ + 2c̃.

    c̃ is the larger of the supplied (or empirically sampled) sup ‖f(t)‖² and
    the largest ‖fⁱ‖² actually used by the run.
    """
    problem, domain, T = run.problem, run.domain, run.T
    holder = problem.holder
    c_tilde = holder.c_tilde_at(T) if holder is not None else None
    if c_tilde is None:
        c_tilde = empirical_c_tilde(problem.forcing, T)
    c_tilde = max(c_tilde, float(np.max(interior_norm_sq(domain, run.f_levels))))

    initial = float(gradient_energy(domain, run.levels[0]) + interior_norm_sq(domain, run.delta[0]))
    C0 = np.exp(T) * initial + c_tilde * T * np.exp(T)
    sobolev_C = poincare_constant(domain)
    C1 = sobolev_C * C0
    C2 = 2.0 * laplacian_norm_bound(domain) * C1 + 2.0 * c_tilde
    return AprioriBounds(C0=float(C0), C1=float(C1), C2=float(C2), sobolev_C=sobolev_C, c_tilde=c_tilde)


@dataclass(frozen=True)
class BoundViolation:
    level: int
    quantity: str
    value: float
    bound: float


@dataclass(frozen=True)
class BoundsReport:
    """Largest value/bound ratio per quantity over all levels, and every violation."""

    bounds: AprioriBounds
    max_ratios: Dict[str, float]
    violations: Tuple[BoundViolation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def _ratio(value: np.ndarray, bound: float) -> float:
    peak = float(np.max(value)) if np.size(value) else 0.0
    if bound > 0:
        return peak / bound
    return 0.0 if peak == 0 else float("inf")


def _require_short_steps(run: RotheRun) -> None:
    if run.step > 1:
        raise BoundsNotApplicableError(f"A-priori bounds need step length <= 1, got {run.step:g}")


def verify_bounds(run: RotheRun, bounds: Optional[AprioriBounds] = None) -> BoundsReport:
    """Check ‖δuⁱ‖², ‖∇uⁱ‖² ≤ C₀, ‖uⁱ‖² ≤ C₁, ‖δ²uⁱ‖² ≤ C₂ and the per-step energy recursion."""
    _require_short_steps(run)
    bounds = bounds or apriori_bounds(run)
    domain, ell = run.domain, run.step

    quantities = {
        "delta_u": (interior_norm_sq(domain, run.delta[1:]), bounds.C0),
        "grad_u": (gradient_energy(domain, run.levels[1:]), bounds.C0),
        "u": (interior_norm_sq(domain, run.levels[1:]), bounds.C1),
        "delta2_u": (interior_norm_sq(domain, run.delta2), bounds.C2),
    }
    violations: List[BoundViolation] = []
    max_ratios: Dict[str, float] = {}
    for name, (values, bound) in quantities.items():
        max_ratios[name] = _ratio(values, bound)
        for offset in np.flatnonzero(values > bound).tolist():
            violations.append(BoundViolation(offset + 1, name, float(values[offset]), bound))

    # (1 − ℓ)Eᵢ ≤ Eᵢ₋₁ + ℓ‖fⁱ‖² with Eᵢ = ‖∇uⁱ‖² + ‖δuⁱ‖²
    energies = gradient_energy(domain, run.levels) + interior_norm_sq(domain, run.delta)
    left = (1.0 - ell) * energies[1:]
    right = energies[:-1] + ell * interior_norm_sq(domain, run.f_levels[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(right > 0, left / right, np.where(left > 0, np.inf, 0.0))
    max_ratios["energy_recursion"] = float(np.max(ratios)) if ratios.size else 0.0
    for offset in np.flatnonzero(left > right + RECURSION_SLACK * np.maximum(1.0, right)).tolist():
        violations.append(BoundViolation(offset + 1, "energy_recursion", float(left[offset]), float(right[offset])))

    if violations:
        first = violations[0]
        logger.warning(f"{len(violations)} bound violations; first at level {first.level} ({first.quantity})")
    return BoundsReport(bounds=bounds, max_ratios=max_ratios, violations=tuple(violations))


class RotheInterpolants:
    """Time interpolants of a run on [−ℓ, T].

    u⁽ⁿ⁾ and δu⁽ⁿ⁾ are piecewise linear through the levels; ū⁽ⁿ⁾, δū⁽ⁿ⁾ and
    f⁽ⁿ⁾ are step functions equal to the i-th level on (t_{i−1}, t_i], and to
    g, h and f⁰ on [−ℓ, 0].
    """

    # t/ℓ within this of an integer is treated as a grid point
    GRID_SNAP = 1e-9

    def __init__(self, run: RotheRun):
        self.run = run
        self._u = np.vstack([run.u_minus1, run.levels])
        self._delta = np.vstack([run.delta[0], run.delta])

    def _locate(self, t: float) -> Tuple[int, float]:
        """Level i with t ∈ (t_{i−1}, t_i] and θ = (t − t_{i−1})/ℓ ∈ (0, 1]."""
        run = self.run
        if t < -run.step * (1 + self.GRID_SNAP) or t > run.T * (1 + self.GRID_SNAP):
            raise ProblemValidationError(f"Interpolants are defined on [-{run.step:g}, {run.T:g}], got t={t}")
        k = t / run.step
        nearest = round(k)
        if abs(k - nearest) <= self.GRID_SNAP:
            k = float(nearest)
        i = int(np.clip(np.ceil(k), 0, run.n))
        return i, float(np.clip(k - (i - 1), 0.0, 1.0))

    def u(self, t: float) -> np.ndarray:
        i, theta = self._locate(t)
        # rows of _u are shifted by one: _u[i + 1] = uⁱ
        return (1.0 - theta) * self._u[i] + theta * self._u[i + 1]

    def delta_u(self, t: float) -> np.ndarray:
        i, theta = self._locate(t)
        return (1.0 - theta) * self._delta[i] + theta * self._delta[i + 1]

    def u_bar(self, t: float) -> np.ndarray:
        i, _ = self._locate(t)
        return self.run.levels[i]

    def delta_u_bar(self, t: float) -> np.ndarray:
        i, _ = self._locate(t)
        return self.run.delta[i]

    def f_bar(self, t: float) -> np.ndarray:
        i, _ = self._locate(t)
        return self.run.f_levels[i]

    def delta_u_rate(self, t: float) -> np.ndarray:
        """∂_t δu⁽ⁿ⁾ = δ²uⁱ on (t_{i−1}, t_i); zero on [−ℓ, 0]."""
        i, _ = self._locate(t)
        return self.run.delta2[i - 1] if i >= 1 else np.zeros(self.run.domain.N)


@dataclass(frozen=True)
class GapReport:
    """Interpolant gap, Lipschitz-in-time and uniform-bound checks."""

    gap_bound: float
    max_gap: float
    lipschitz_constant: float
    max_lipschitz_ratio: float
    uniform_ratios: Dict[str, float]
    violations: Tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_interpolant_gaps(
    run: RotheRun,
    bounds: Optional[AprioriBounds] = None,
    samples: Optional[int] = None,
) -> GapReport:
    """Sample t on a fine grid of [0, T] and check the interpolant estimates.

    ‖u⁽ⁿ⁾(t) − ū⁽ⁿ⁾(t)‖ + ‖δu⁽ⁿ⁾(t) − δū⁽ⁿ⁾(t)‖ ≤ 2T(√C₀ + √C₂)/n, the
    Lipschitz estimate with constant √C₀ + √C₂ over pairs at dyadic lags,
    and the uniform bounds on each interpolant.
    """
    _require_short_steps(run)
    bounds = bounds or apriori_bounds(run)
    domain, T, n = run.domain, run.T, run.n
    interpolants = RotheInterpolants(run)
    root0, root1, root2 = np.sqrt(bounds.C0), np.sqrt(bounds.C1), np.sqrt(bounds.C2)
    norm = lambda values: np.sqrt(interior_norm_sq(domain, values))

    samples = samples or 4 * min(n, 512) + 1
    times = np.linspace(0.0, T, samples)
    u = np.array([interpolants.u(t) for t in times])
    du = np.array([interpolants.delta_u(t) for t in times])
    u_bar = np.array([interpolants.u_bar(t) for t in times])
    du_bar = np.array([interpolants.delta_u_bar(t) for t in times])
    rate = np.array([interpolants.delta_u_rate(t) for t in times])

    violations: List[str] = []
    gap_bound = 2.0 * T * (root0 + root2) / n
    gaps = norm(u - u_bar) + norm(du - du_bar)
    for j in np.flatnonzero(gaps > gap_bound).tolist():
        violations.append(f"gap at t={times[j]!r}: {gaps[j]!r} > {gap_bound!r}")

    lipschitz = root0 + root2
    max_lipschitz_ratio = 0.0
    lag = 1
    while lag < samples:
        dt = times[lag:] - times[:-lag]
        change = norm(u[lag:] - u[:-lag]) + norm(du[lag:] - du[:-lag])
        limit = lipschitz * dt
        if lipschitz > 0:
            max_lipschitz_ratio = max(max_lipschitz_ratio, float(np.max(change / limit)))
        for j in np.flatnonzero(change > limit).tolist():
            violations.append(f"Lipschitz estimate between t={times[j]!r} and s={times[j + lag]!r}")
        lag *= 2

    g_norm, h_norm = float(norm(run.problem.g)), float(norm(run.problem.h))
    uniform = {
        "u": (norm(u), root1 + root0),
        "u_bar": (norm(u_bar), root1 + g_norm),
        "delta_u": (norm(du), root0 + root2),
        "delta_u_bar": (norm(du_bar), root0 + h_norm),
        "delta_u_rate": (norm(rate), root2),
        "grad_u_sq": (gradient_energy(domain, u), bounds.C0),
    }
    uniform_ratios: Dict[str, float] = {}
    for name, (values, bound) in uniform.items():
        uniform_ratios[name] = _ratio(values, bound)
        if np.any(values > bound):
            violations.append(f"uniform bound on {name}: {float(np.max(values))!r} > {bound!r}")

    if violations:
        logger.warning(f"{len(violations)} interpolant estimate violations")
    return GapReport(
        gap_bound=gap_bound,
        max_gap=float(np.max(gaps)),
        lipschitz_constant=lipschitz,
        max_lipschitz_ratio=max_lipschitz_ratio,
        uniform_ratios=uniform_ratios,
        violations=tuple(violations),
    )


TRAJECTORY_COLUMNS = ["i", "t", "vertex", "u", "du", "d2u"]


def export_trajectory(run: RotheRun, path: Union[str, Path]) -> Path:
    """CSV with one row per (level, vertex of Ω); δ²u⁰ is left empty."""
    domain = run.domain
    u = domain.on_omega(run.levels)
    du = domain.on_omega(run.delta)
    d2u = domain.on_omega(run.delta2)
    rows = []
    for i, t in enumerate(run.times.tolist()):
        for j, vertex in enumerate(domain.omega):
            rows.append({
                "i": i,
                "t": t,
                "vertex": vertex,
                "u": u[i, j],
                "du": du[i, j],
                "d2u": d2u[i - 1, j] if i >= 1 else None,
            })
    return write_csv(rows, path, TRAJECTORY_COLUMNS)
