"""The wave problem on Ω: forcing, initial data and the Hölder-in-time hypothesis."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Optional, Tuple, Union

import numpy as np
import structlog

from ..graphs.domain import DirichletDomain, VertexFunction
from ..operators.integration import interior_norm_sq
from ..utils.config import get_settings
from ..utils.exceptions import ProblemValidationError, UnknownVertexError
from .time_profile import ArrayLike, TimeProfile

logger = structlog.get_logger(__name__)

InteriorData = Union[None, VertexFunction, Mapping[str, float], np.ndarray]

# c̃ as one constant, a table horizon -> bound, or a function of the horizon.
CTildeSpec = Union[None, float, Mapping[float, float], Callable[[float], float]]

# Moduli at or below this (relative to the forcing size) count as no time dependence.
TIME_CONSTANT_TOLERANCE = 1e-14


def interior_data(domain: DirichletDomain, data: InteriorData, name: str) -> np.ndarray:
    """Interior-ordered values of data that must vanish outside Ω°.

    Bare arrays are read in interior order; mappings and vertex functions may
    mention boundary vertices only with the value 0.
    """
    if data is None:
        return np.zeros(domain.N)
    if isinstance(data, VertexFunction):
        data = dict(zip(data.vertices, data.values.tolist()))
    if isinstance(data, Mapping):
        interior = set(domain.interior)
        for vertex, value in data.items():
            if vertex in interior:
                continue
            if vertex not in domain.graph:
                raise UnknownVertexError(f"{name} mentions unknown vertex {vertex!r}")
            if float(value) != 0.0:
                raise ProblemValidationError(f"{name} must vanish outside the interior; {name}({vertex}) = {value}")
        return np.array([float(data.get(v, 0.0)) for v in domain.interior])

    values = np.array(data, dtype=float)
    if values.shape != (domain.N,):
        raise ProblemValidationError(f"{name} needs {domain.N} interior values, got shape {values.shape}")
    return values


@dataclass(frozen=True, eq=False)
class ForcingTerm:
    """amplitude(x)·profile(t), with the amplitude on Ω°."""

    amplitude: VertexFunction
    profile: TimeProfile


@dataclass(frozen=True, eq=False)
class Forcing:
    """f(t, x) = Σ_j amplitude_j(x)·profile_j(t) on Ω°, zero on ∂Ω."""

    domain: DirichletDomain
    terms: Tuple[ForcingTerm, ...] = ()

    @classmethod
    def from_terms(cls, domain: DirichletDomain, terms) -> "Forcing":
        """Build from (amplitude, profile) pairs, amplitudes in any accepted interior form."""
        built = tuple(
            ForcingTerm(VertexFunction.on_interior(domain, interior_data(domain, amplitude, "amplitude")), profile)
            for amplitude, profile in terms
        )
        return cls(domain, built)

    def __add__(self, other: "Forcing") -> "Forcing":
        if other.domain is not self.domain:
            raise ProblemValidationError("Cannot add forcings defined on different domains")
        return Forcing(self.domain, self.terms + other.terms)

    @cached_property
    def amplitudes(self) -> np.ndarray:
        """J × N matrix of amplitudes in interior order."""
        if not self.terms:
            return np.zeros((0, self.domain.N))
        return np.stack([term.amplitude.on(self.domain.interior) for term in self.terms])

    def profile_values(self, t: ArrayLike) -> np.ndarray:
        """Profile values, shape (J,) for scalar t and (len(t), J) for arrays."""
        if np.ndim(t) == 0:
            return np.array([float(term.profile(float(t))) for term in self.terms])
        times = np.asarray(t, dtype=float)
        if not self.terms:
            return np.zeros((times.size, 0))
        return np.stack([np.asarray(term.profile(times), dtype=float) for term in self.terms], axis=-1)

    def at(self, t: ArrayLike) -> np.ndarray:
        """f(t, ·) on Ω°; leading axis over t when t is an array."""
        return self.profile_values(t) @ self.amplitudes

    @property
    def is_zero(self) -> bool:
        return all(term.profile.is_zero or not np.any(term.amplitude.values) for term in self.terms)

    @property
    def is_time_constant(self) -> bool:
        return all(term.profile.is_time_constant for term in self.terms)

    def lipschitz_bound(self, T: float) -> float:
        """c with ‖f(t,·) − f(s,·)‖ ≤ c|t − s| on [0, T]: Σ_j sup|p_j'|·‖amplitude_j‖."""
        norms = np.sqrt(interior_norm_sq(self.domain, self.amplitudes))
        return float(sum(term.profile.derivative_bound(T) * norm for term, norm in zip(self.terms, norms)))


@dataclass(frozen=True)
class HolderCondition:
    """‖f(t,·) − f(s,·)‖ ≤ c|t − s|^α and sup_{t ≤ T} ‖f(t,·)‖² ≤ c̃(T).

    A tabulated c̃ answers a horizon T with the entry of the smallest tabulated
    horizon ≥ T, since c̃ is nondecreasing in T.
    """

    alpha: float
    c: float
    c_tilde: CTildeSpec = None

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ProblemValidationError(f"Hölder exponent must lie in (0, 1], got {self.alpha}")
        if self.c <= 0:
            raise ProblemValidationError(f"Hölder constant must be positive, got {self.c}")
        if isinstance(self.c_tilde, Mapping):
            table = dict(sorted((float(T), float(bound)) for T, bound in self.c_tilde.items()))
            if any(T <= 0 or bound < 0 for T, bound in table.items()):
                raise ProblemValidationError(f"c_tilde table needs positive horizons and nonnegative bounds, got {table}")
            object.__setattr__(self, "c_tilde", table)
        elif self.c_tilde is not None and not callable(self.c_tilde) and self.c_tilde < 0:
            raise ProblemValidationError(f"c_tilde must be nonnegative, got {self.c_tilde}")

    def c_tilde_at(self, T: float) -> Optional[float]:
        """c̃(T), or None when no supplied bound covers the horizon."""
        if self.c_tilde is None:
            return None
        if isinstance(self.c_tilde, Mapping):
            covering = [bound for horizon, bound in self.c_tilde.items() if horizon >= T]
            return covering[0] if covering else None
        if callable(self.c_tilde):
            value = float(self.c_tilde(T))
            if value < 0:
                raise ProblemValidationError(f"c_tilde({T}) must be nonnegative, got {value}")
            return value
        return float(self.c_tilde)


@dataclass(frozen=True, eq=False)
class WaveProblem:
    """∂_t²u − Δ_Ω u = f on Ω°, u = 0 on ∂Ω, u(0) = g, ∂_t u(0) = h.

    ``g`` and ``h`` are interior-ordered arrays; use :meth:`create` to build
    from mappings or vertex functions.
    """

    domain: DirichletDomain
    forcing: Forcing
    g: np.ndarray
    h: np.ndarray
    holder: Optional[HolderCondition] = None
    name: str = field(default="problem", compare=False)

    def __post_init__(self):
        for label in ("g", "h"):
            values = np.array(getattr(self, label), dtype=float)
            if values.shape != (self.domain.N,):
                raise ProblemValidationError(f"{label} needs {self.domain.N} interior values, got shape {values.shape}")
            values.setflags(write=False)
            object.__setattr__(self, label, values)
        if self.forcing.domain is not self.domain:
            raise ProblemValidationError("Forcing is defined on a different domain")

    @classmethod
    def create(
        cls,
        domain: DirichletDomain,
        g: InteriorData = None,
        h: InteriorData = None,
        forcing: Optional[Forcing] = None,
        holder: Optional[HolderCondition] = None,
        name: str = "problem",
    ) -> "WaveProblem":
        return cls(
            domain=domain,
            forcing=forcing if forcing is not None else Forcing(domain),
            g=interior_data(domain, g, "g"),
            h=interior_data(domain, h, "h"),
            holder=holder,
            name=name,
        )

    @property
    def graph(self):
        return self.domain.graph

    @property
    def is_zero(self) -> bool:
        return self.forcing.is_zero and not np.any(self.g) and not np.any(self.h)

    def with_data(self, g: InteriorData = None, h: InteriorData = None, forcing: Optional[Forcing] = None) -> "WaveProblem":
        """Same domain and Hölder data, new initial values and forcing."""
        return WaveProblem.create(self.domain, g, h, forcing, self.holder, self.name)


def eval_forcing(problem: WaveProblem, t: float, x: str) -> float:
    """f(t, x); zero on ∂Ω."""
    if t < 0:
        raise ProblemValidationError(f"Forcing is defined for t >= 0, got {t}")
    domain = problem.domain
    if x in domain.boundary:
        return 0.0
    position = domain.interior_position(x)
    return float(problem.forcing.at(float(t))[position])


@dataclass(frozen=True)
class HolderEstimate:
    """Fitted Hölder data; ``alpha`` is None when the forcing does not depend on time."""

    alpha: Optional[float]
    c: Optional[float]
    c_tilde: float
    time_constant: bool


def empirical_c_tilde(forcing: Forcing, T: float, points: Optional[int] = None) -> float:
    """sup over an equispaced grid on [0, T] of ‖f(t,·)‖²."""
    points = points or get_settings().c_tilde_grid
    values = forcing.at(np.linspace(0.0, T, points))
    return float(np.max(interior_norm_sq(forcing.domain, values))) if values.size else 0.0


def holder_estimate(problem: WaveProblem, T: float, samples: int = 64) -> HolderEstimate:
    """Fit ‖f(t,·) − f(s,·)‖ ≈ c|t − s|^α from the modulus of continuity on a grid.

    The modulus at lag k (grid steps) is the largest norm difference over all
    pairs k steps apart; lags double from 1 to samples/8 and log modulus is fit
    against log lag by least squares. The returned constant is the smallest c
    making the fitted power law dominate every measured modulus.
    """
    if samples < 16:
        raise ProblemValidationError(f"holder_estimate needs at least 16 samples, got {samples}")
    if T <= 0:
        raise ProblemValidationError(f"Horizon T must be positive, got {T}")

    forcing = problem.forcing
    times = np.linspace(0.0, T, samples)
    values = forcing.at(times)
    c_tilde = max(empirical_c_tilde(forcing, T), float(np.max(interior_norm_sq(problem.domain, values))))
    step = times[1] - times[0]

    lags, moduli = [], []
    k = 1
    while k <= samples // 8:
        diffs = values[k:] - values[:-k]
        lags.append(k * step)
        moduli.append(float(np.sqrt(np.max(interior_norm_sq(problem.domain, diffs)))))
        k *= 2
    lags, moduli = np.array(lags), np.array(moduli)

    if np.max(moduli) <= TIME_CONSTANT_TOLERANCE * (1.0 + np.sqrt(c_tilde)):
        logger.info("Forcing is constant in time; the Hölder hypothesis holds trivially")
        return HolderEstimate(alpha=None, c=None, c_tilde=c_tilde, time_constant=True)

    positive = moduli > 0
    if positive.sum() < 2:
        logger.warning("Too few nonzero moduli for a fit; reporting a Lipschitz exponent")
        alpha = 1.0
    else:
        alpha, _ = np.polyfit(np.log(lags[positive]), np.log(moduli[positive]), 1)
    c = float(np.max(moduli / lags ** alpha))
    logger.debug(f"Hölder fit over {len(lags)} lags: alpha={alpha:.4f}, c={c:.4e}")
    return HolderEstimate(alpha=float(alpha), c=c, c_tilde=c_tilde, time_constant=False)


def index_amplitude(domain: DirichletDomain, beta: float = 1.0) -> VertexFunction:
    """x_j ↦ j^β for the j-th interior vertex (1-based), the explicit labeling for x^β families."""
    return VertexFunction.on_interior(domain, np.arange(1, domain.N + 1, dtype=float) ** beta)
