"""Time profiles p(t) multiplying per-vertex forcing amplitudes.

Besides point evaluation every profile knows its two Duhamel convolutions

    ∫₀ᵗ sin(ω(t−s)) p(s) ds    and    ∫₀ᵗ cos(ω(t−s)) p(s) ds,

vectorized over an array of frequencies ω. Constant, polynomial and sinusoid
profiles integrate in closed form; sampled profiles use refined Simpson sums.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import ValidationError
from scipy.integrate import simpson

from ..utils.config import get_settings
from ..utils.exceptions import ProblemValidationError, ProfileDomainError
from .schemas import ProfileEntry

logger = structlog.get_logger(__name__)

ArrayLike = Union[float, np.ndarray]

_SERIES_MAX_TERMS = 200


def _sinc(z: np.ndarray) -> np.ndarray:
    # unnormalized sin(z)/z
    return np.sinc(np.asarray(z) / np.pi)


def _cos_integral(alpha: np.ndarray, beta: np.ndarray, t: float) -> np.ndarray:
    """∫₀ᵗ cos(α + βs) ds, stable as β → 0."""
    return t * np.cos(alpha + beta * t / 2) * _sinc(beta * t / 2)


def _sin_integral(alpha: np.ndarray, beta: np.ndarray, t: float) -> np.ndarray:
    """∫₀ᵗ sin(α + βs) ds, stable as β → 0."""
    return t * np.sin(alpha + beta * t / 2) * _sinc(beta * t / 2)


class TimeProfile(ABC):
    """A real function of time, defined for t ≥ 0."""

    kind: str = ""

    @abstractmethod
    def __call__(self, t: ArrayLike) -> ArrayLike:
        """Evaluate the profile."""
        pass

    @abstractmethod
    def sine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        """∫₀ᵗ sin(ω(t−s)) p(s) ds for each ω."""
        pass

    @abstractmethod
    def cosine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        """∫₀ᵗ cos(ω(t−s)) p(s) ds for each ω."""
        pass

    @abstractmethod
    def derivative_bound(self, T: float) -> float:
        """An upper bound of |p'| on [0, T]."""
        pass

    @property
    @abstractmethod
    def is_time_constant(self) -> bool:
        pass

    @property
    def is_zero(self) -> bool:
        return False

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass


class ConstantProfile(TimeProfile):
    kind = "constant"

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return self.value * np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else self.value

    def sine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        return self.value * 2.0 * np.sin(omega * t / 2) ** 2 / omega

    def cosine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        return self.value * np.sin(omega * t) / omega

    def derivative_bound(self, T: float) -> float:
        return 0.0

    @property
    def is_time_constant(self) -> bool:
        return True

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "value": self.value}


def _series_moments(omega: np.ndarray, t: float, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """J^s_m and J^c_m summed as alternating series in (ωt)².

    J^s_m = m! Σ_k (−1)^k ω^{2k+1} t^{m+2k+2}/(m+2k+2)!
    J^c_m = m! Σ_k (−1)^k ω^{2k} t^{m+2k+1}/(m+2k+1)!
    """
    x2 = (omega * t) ** 2
    s_term = omega * t ** (m + 2) / ((m + 1) * (m + 2))
    c_term = np.full_like(omega, t ** (m + 1) / (m + 1))
    sine, cosine = s_term, c_term
    eps = np.finfo(float).eps
    for k in range(_SERIES_MAX_TERMS):
        s_term = -s_term * x2 / ((m + 2 * k + 3) * (m + 2 * k + 4))
        c_term = -c_term * x2 / ((m + 2 * k + 2) * (m + 2 * k + 3))
        sine = sine + s_term
        cosine = cosine + c_term
        if np.all(np.abs(s_term) <= eps * np.abs(sine)) and np.all(np.abs(c_term) <= eps * np.abs(cosine)):
            break
    return sine, cosine


class PolynomialProfile(TimeProfile):
    """p(t) = Σ_m c_m t^m, coefficients in ascending powers."""

    kind = "poly"

    def __init__(self, coefficients: Sequence[float]):
        self.coefficients = np.array(coefficients, dtype=float)
        if self.coefficients.size == 0:
            raise ProblemValidationError("Polynomial profile needs at least one coefficient")

    def __call__(self, t: ArrayLike) -> ArrayLike:
        value = np.polynomial.polynomial.polyval(t, self.coefficients)
        return value if np.ndim(t) else float(value)

    def _moments(self, omega: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        # J^s_m = ∫ sin(ω(t−s)) s^m ds, J^c_m = ∫ cos(ω(t−s)) s^m ds, by parts:
        # J^s_m = t^m/ω − (m/ω) J^c_{m−1},  J^c_m = (m/ω) J^s_{m−1}
        # The recursion amplifies errors by m/(ωt) per step, so below ωt = m + 1
        # the moments come from their power series instead.
        shape = np.shape(omega)
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        x = omega * t
        js = 2.0 * np.sin(x / 2) ** 2 / omega
        jc = np.sin(x) / omega
        sine = self.coefficients[0] * js
        cosine = self.coefficients[0] * jc
        for m in range(1, self.coefficients.size):
            series = x < m + 1
            ss, sc = np.zeros_like(x), np.zeros_like(x)
            if np.any(series):
                ss[series], sc[series] = _series_moments(omega[series], t, m)
            rs, rc = t ** m / omega - (m / omega) * jc, (m / omega) * js
            js, jc = np.where(series, ss, rs), np.where(series, sc, rc)
            sine = sine + self.coefficients[m] * js
            cosine = cosine + self.coefficients[m] * jc
        return sine.reshape(shape), cosine.reshape(shape)

    def sine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        return self._moments(omega, t)[0]

    def cosine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        return self._moments(omega, t)[1]

    def derivative_bound(self, T: float) -> float:
        return float(sum(m * abs(c) * T ** (m - 1) for m, c in enumerate(self.coefficients) if m > 0))

    @property
    def is_time_constant(self) -> bool:
        return bool(np.all(self.coefficients[1:] == 0))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.coefficients == 0))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "coefficients": self.coefficients.tolist()}


class SinusoidProfile(TimeProfile):
    """p(t) = A sin(νt + φ)."""

    kind = "sin"

    def __init__(self, amplitude: float = 1.0, frequency: float = 1.0, phase: float = 0.0):
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.phase = float(phase)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        value = self.amplitude * np.sin(self.frequency * np.asarray(t, dtype=float) + self.phase)
        return value if np.ndim(t) else float(value)

    def sine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        nu, phi = self.frequency, self.phase
        return 0.5 * self.amplitude * (
            _cos_integral(omega * t - phi, -(omega + nu), t) - _cos_integral(omega * t + phi, nu - omega, t)
        )

    def cosine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        nu, phi = self.frequency, self.phase
        return 0.5 * self.amplitude * (
            _sin_integral(omega * t + phi, nu - omega, t) + _sin_integral(phi - omega * t, nu + omega, t)
        )

    def derivative_bound(self, T: float) -> float:
        return abs(self.amplitude * self.frequency)

    @property
    def is_time_constant(self) -> bool:
        return self.amplitude == 0 or self.frequency == 0

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0 or (self.frequency == 0 and np.sin(self.phase) == 0)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "amplitude": self.amplitude, "frequency": self.frequency, "phase": self.phase}


class SampledProfile(TimeProfile):
    """Piecewise-linear interpolation of samples on a strictly increasing grid."""

    kind = "samples"

    # slack when deciding whether t lies on the grid
    GRID_SLACK = 1e-12

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        self.times = np.array(times, dtype=float)
        self.values = np.array(values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape or self.times.size < 2:
            raise ProblemValidationError("Sampled profile needs matching times/values with at least two samples")
        if np.any(np.diff(self.times) <= 0):
            raise ProblemValidationError("Sample times must be strictly increasing")

    def _outside(self, t: np.ndarray) -> np.ndarray:
        slack = self.GRID_SLACK * max(1.0, abs(self.times[-1]))
        return (t < self.times[0] - slack) | (t > self.times[-1] + slack)

    def clamp(self, t: ArrayLike) -> Tuple[ArrayLike, bool]:
        """Interpolated value with the grid's end values outside it, plus an out-of-grid flag."""
        arr = np.asarray(t, dtype=float)
        value = np.interp(arr, self.times, self.values)
        flag = bool(np.any(self._outside(arr)))
        return (value if np.ndim(t) else float(value)), flag

    def __call__(self, t: ArrayLike) -> ArrayLike:
        value, outside = self.clamp(t)
        if outside:
            raise ProfileDomainError(
                f"Sampled profile queried at t outside its grid [{self.times[0]}, {self.times[-1]}]"
            )
        return value

    def _convolve(self, kernel, omega: np.ndarray, t: float) -> np.ndarray:
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if t == 0:
            return np.zeros_like(omega)
        self(np.array([0.0, t]))
        # Simpson on each linear piece, where the integrand is smooth
        knots = np.concatenate([[0.0], self.times[(self.times > 0) & (self.times < t)], [t]])
        settings = get_settings()
        pieces = len(knots) - 1
        panels = 2
        previous = None
        while True:
            total = np.zeros_like(omega)
            for a, b in zip(knots[:-1], knots[1:]):
                s = np.linspace(a, b, panels + 1)
                integrand = kernel(np.outer(omega, t - s)) * np.interp(s, self.times, self.values)
                total += simpson(integrand, x=s, axis=-1)
            if previous is not None:
                change = float(np.max(np.abs(total - previous)))
                if change <= settings.quadrature_tolerance * max(1.0, float(np.max(np.abs(total)))):
                    return total
            if 2 * panels * pieces > settings.quadrature_max_panels:
                logger.warning(f"Simpson refinement stopped at {panels * pieces} panels before reaching tolerance")
                return total
            previous = total
            panels *= 2

    def sine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        return self._convolve(np.sin, omega, t)

    def cosine_convolution(self, omega: np.ndarray, t: float) -> np.ndarray:
        return self._convolve(np.cos, omega, t)

    def derivative_bound(self, T: float) -> float:
        return float(np.max(np.abs(np.diff(self.values) / np.diff(self.times))))

    @property
    def is_time_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "times": self.times.tolist(), "values": self.values.tolist()}


def profile_from_dict(data: Dict[str, Any]) -> TimeProfile:
    """Build a profile from its JSON form (``kind`` selects the variant)."""
    try:
        entry = ProfileEntry.model_validate({"profile": data}).profile
    except ValidationError as e:
        raise ProblemValidationError(f"Invalid time profile: {e}")
    if entry.kind == "constant":
        return ConstantProfile(entry.value)
    if entry.kind == "poly":
        return PolynomialProfile(entry.coefficients)
    if entry.kind == "sin":
        return SinusoidProfile(entry.amplitude, entry.frequency, entry.phase)
    return SampledProfile(entry.times, entry.values)
