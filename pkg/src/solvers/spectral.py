"""Exact modal solution of the wave problem.

With −Δ_Ω φ_k = λ_k φ_k and μ-orthonormal φ_k, the solution is
u(t) = Σ_k a_k(t) φ_k where each coefficient solves a_k'' + λ_k a_k = b_k(t),
a_k(0) = g_k, a_k'(0) = h_k. Two closed forms are offered: the Duhamel
formula, which meets both initial conditions, and a variant that subtracts
b_k(0) sin(√λ_k t)/√λ_k and therefore starts with velocity h_k − b_k(0).
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import structlog

from ..graphs.domain import DirichletDomain, VertexData, VertexFunction, interior_values
from ..operators.integration import interior_norm_sq
from ..operators.laplacian import ZERO_EIGENVALUE, assemble, gradient_energy
from ..problems.time_profile import TimeProfile
from ..problems.wave_problem import WaveProblem
from ..utils.exceptions import DegenerateSpectrumError, EigenSolverError, ProblemValidationError
from ..utils.io import write_csv

logger = structlog.get_logger(__name__)

# Eigenvalues closer than this (relative) form one tied block.
TIE_TOLERANCE = 1e-10


class FormulaVariant(Enum):
    """Closed form used for the modal coefficients."""
    DUHAMEL = "duhamel"
    PAPER_THM12 = "paper_thm12"

    @classmethod
    def _missing_(cls, value):
        if value == "paper":
            return cls.PAPER_THM12
        return None


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenpairs of −Δ_Ω; column k of ``vectors`` is φ_k in interior order."""

    domain: DirichletDomain
    eigenvalues: np.ndarray
    vectors: np.ndarray

    def __len__(self) -> int:
        return self.eigenvalues.shape[0]

    def eigenfunction(self, k: int) -> VertexFunction:
        """φ_k (0-based k) as a function on Ω°."""
        return VertexFunction.on_interior(self.domain, self.vectors[:, k])

    @property
    def frequencies(self) -> np.ndarray:
        return np.sqrt(self.eigenvalues)


def _blocks(eigenvalues: np.ndarray) -> List[Tuple[int, int]]:
    blocks, start = [], 0
    for k in range(1, eigenvalues.size + 1):
        if k == eigenvalues.size or eigenvalues[k] - eigenvalues[k - 1] > TIE_TOLERANCE * max(1.0, abs(eigenvalues[k])):
            blocks.append((start, k))
            start = k
    return blocks


def eigendecompose(domain: DirichletDomain) -> Spectrum:
    """Full eigendecomposition of −Δ_Ω through its symmetrized matrix.

    Eigenvalues ascend; eigenvectors are mapped back by M^{-1/2}, tied blocks
    are re-orthonormalized and each φ_k has its first nonzero component positive.
    """
    _, symmetrized = assemble(domain)
    try:
        eigenvalues, Y = scipy.linalg.eigh(symmetrized.dense())
    except np.linalg.LinAlgError as e:
        logger.error(f"Eigensolver failed: {e}")
        raise EigenSolverError(f"Symmetric eigensolver did not converge: {e}")

    if eigenvalues[0] <= ZERO_EIGENVALUE:
        raise DegenerateSpectrumError(
            f"lambda_1 = {eigenvalues[0]:.3e}: boundary missing or disconnected interior component touching no boundary"
        )

    for start, stop in _blocks(eigenvalues):
        if stop - start > 1:
            Y[:, start:stop], _ = np.linalg.qr(Y[:, start:stop])

    vectors = symmetrized.from_symmetric_frame(Y.T).T
    norms = np.sqrt(interior_norm_sq(domain, vectors.T))
    vectors = vectors / norms

    for k in range(vectors.shape[1]):
        column = vectors[:, k]
        significant = np.flatnonzero(np.abs(column) > 1e-12 * np.max(np.abs(column)))
        if column[significant[0]] < 0:
            vectors[:, k] = -column

    eigenvalues.setflags(write=False)
    vectors.setflags(write=False)
    logger.debug(f"Spectrum of N={domain.N}: lambda in [{eigenvalues[0]:.6g}, {eigenvalues[-1]:.6g}]")
    return Spectrum(domain, eigenvalues, vectors)


def project(spectrum: Spectrum, u: VertexData) -> np.ndarray:
    """Coefficients (u, φ_k)_μ; leading axes of array input are batched."""
    values = interior_values(spectrum.domain, u)
    return (values * spectrum.domain.interior_measure) @ spectrum.vectors


def reconstruct(spectrum: Spectrum, coefficients: np.ndarray) -> np.ndarray:
    """Σ_k c_k φ_k in interior order; the inverse of :func:`project`."""
    return np.asarray(coefficients, dtype=float) @ spectrum.vectors.T


ProfileCombination = Sequence[Tuple[float, TimeProfile]]


class ModalState(NamedTuple):
    """a, a' and a'' at one time."""

    a: Union[float, np.ndarray]
    da: Union[float, np.ndarray]
    d2a: Union[float, np.ndarray]


def _oscillator(
    lam: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    weights: np.ndarray,
    profiles: Sequence[TimeProfile],
    t: float,
) -> ModalState:
    # weights[j, k] multiplies profile j in mode k
    if np.any(lam <= 0):
        raise DegenerateSpectrumError("Modal coefficients need positive eigenvalues")
    if t < 0:
        raise ProblemValidationError(f"Solutions are evaluated for t >= 0, got {t}")
    omega = np.sqrt(lam)
    c, s = np.cos(omega * t), np.sin(omega * t)
    a = g * c + h * s / omega
    da = -g * omega * s + h * c
    b = np.zeros_like(lam)
    for j, profile in enumerate(profiles):
        if not np.any(weights[j]):
            continue
        a = a + weights[j] * profile.sine_convolution(omega, t) / omega
        da = da + weights[j] * profile.cosine_convolution(omega, t)
        b = b + weights[j] * float(profile(t))
    return ModalState(a, da, b - lam * a)


def _paper_correction(lam: np.ndarray, state: ModalState, b0: np.ndarray, t: float) -> ModalState:
    # subtract b(0)/√λ · sin(√λ t), a homogeneous solution, so a'' = b − λa still holds
    omega = np.sqrt(lam)
    a = state.a - b0 * np.sin(omega * t) / omega
    da = state.da - b0 * np.cos(omega * t)
    d2a = state.d2a + b0 * omega * np.sin(omega * t)
    return ModalState(a, da, d2a)


def _as_combination(b: Union[TimeProfile, ProfileCombination]) -> Tuple[np.ndarray, List[TimeProfile]]:
    if isinstance(b, TimeProfile):
        return np.ones((1, 1)), [b]
    pairs = list(b)
    return np.array([[float(w)] for w, _ in pairs]).reshape(len(pairs), 1), [p for _, p in pairs]


def duhamel_coefficient(
    lam: float,
    g_k: float,
    h_k: float,
    b_k: Union[TimeProfile, ProfileCombination],
    t: float,
) -> ModalState:
    """a(t) = g cos(√λt) + (h/√λ) sin(√λt) + (1/√λ)∫₀ᵗ sin(√λ(t−s)) b(s) ds, with a' and a'' = b − λa."""
    weights, profiles = _as_combination(b_k)
    state = _oscillator(np.array([lam], dtype=float), np.array([g_k]), np.array([h_k]), weights, profiles, t)
    return ModalState(*(float(x[0]) for x in state))


def paper_coefficient(
    lam: float,
    g_k: float,
    h_k: float,
    b_k: Union[TimeProfile, ProfileCombination],
    t: float,
) -> ModalState:
    """The variant whose sine term carries (h_k − b_k(0)) instead of h_k."""
    weights, profiles = _as_combination(b_k)
    b0 = float(sum(w[0] * float(p(0.0)) for w, p in zip(weights, profiles)))
    lam_array = np.array([lam], dtype=float)
    state = _oscillator(lam_array, np.array([g_k]), np.array([h_k]), weights, profiles, t)
    state = _paper_correction(lam_array, state, np.array([b0]), t)
    return ModalState(*(float(x[0]) for x in state))


@dataclass(frozen=True, eq=False)
class ModalCoefficients:
    """g_k, h_k and the forcing projected per term: b_k(t) = Σ_j forcing[j, k]·p_j(t)."""

    g: np.ndarray
    h: np.ndarray
    forcing: np.ndarray
    profiles: Tuple[TimeProfile, ...]

    def b(self, t: float) -> np.ndarray:
        values = np.array([float(p(t)) for p in self.profiles])
        return values @ self.forcing if self.profiles else np.zeros_like(self.g)


def modal_coefficients(problem: WaveProblem, spectrum: Spectrum) -> ModalCoefficients:
    forcing = problem.forcing
    weights = project(spectrum, forcing.amplitudes) if forcing.terms else np.zeros((0, len(spectrum)))
    return ModalCoefficients(
        g=project(spectrum, problem.g),
        h=project(spectrum, problem.h),
        forcing=weights,
        profiles=tuple(term.profile for term in forcing.terms),
    )


class SpectralSolution:
    """Evaluator of the modal solution, plus its values at the requested times.

    ``u``, ``du`` and ``d2u`` have shape (len(times), N) in interior order.
    """

    def __init__(
        self,
        problem: WaveProblem,
        spectrum: Spectrum,
        coefficients: ModalCoefficients,
        variant: FormulaVariant,
        times: Sequence[float],
    ):
        self.problem = problem
        self.spectrum = spectrum
        self.coefficients = coefficients
        self.variant = variant
        self._b0 = coefficients.b(0.0) if variant is FormulaVariant.PAPER_THM12 else None
        self.times = np.array(times, dtype=float)
        states = [self.modal_state(t) for t in self.times.tolist()]
        self.a = np.array([s.a for s in states]).reshape(len(states), len(spectrum))
        self.da = np.array([s.da for s in states]).reshape(len(states), len(spectrum))
        self.d2a = np.array([s.d2a for s in states]).reshape(len(states), len(spectrum))
        self.u = reconstruct(spectrum, self.a)
        self.du = reconstruct(spectrum, self.da)
        self.d2u = reconstruct(spectrum, self.d2a)

    @property
    def domain(self) -> DirichletDomain:
        return self.problem.domain

    def modal_state(self, t: float) -> ModalState:
        c = self.coefficients
        lam = self.spectrum.eigenvalues
        state = _oscillator(lam, c.g, c.h, c.forcing, c.profiles, t)
        if self.variant is FormulaVariant.PAPER_THM12:
            state = _paper_correction(lam, state, self._b0, t)
        return state

    def evaluate(self, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(u, ∂_t u, ∂_t² u) at time t on Ω°."""
        state = self.modal_state(t)
        return (
            reconstruct(self.spectrum, state.a),
            reconstruct(self.spectrum, state.da),
            reconstruct(self.spectrum, state.d2a),
        )


def solve_spectral(
    problem: WaveProblem,
    times: Sequence[float],
    variant: FormulaVariant = FormulaVariant.DUHAMEL,
    spectrum: Optional[Spectrum] = None,
) -> SpectralSolution:
    """u(t) = Σ a_k(t) φ_k and ∂_t u(t) = Σ a_k'(t) φ_k at each requested time."""
    spectrum = spectrum or eigendecompose(problem.domain)
    solution = SpectralSolution(problem, spectrum, modal_coefficients(problem, spectrum), FormulaVariant(variant), times)
    logger.info(f"Spectral solution ({solution.variant.value}) at {len(solution.times)} times, N={problem.domain.N}")
    return solution


class EnergyValue(NamedTuple):
    spatial: float
    modal: float


def energy(problem: WaveProblem, solution: SpectralSolution, t: float) -> EnergyValue:
    """e(t) = ∫_Ω |∇u|² dμ + ∫_{Ω°} |∂_t u|² dμ, with the modal Σ λ_k a_k² + Σ a_k'² alongside."""
    state = solution.modal_state(t)
    u = reconstruct(solution.spectrum, state.a)
    du = reconstruct(solution.spectrum, state.da)
    spatial = float(gradient_energy(problem.domain, u) + interior_norm_sq(problem.domain, du))
    modal = float(np.dot(solution.spectrum.eigenvalues, state.a ** 2) + np.dot(state.da, state.da))
    return EnergyValue(spatial, modal)


def export_spectrum(spectrum: Spectrum, path: Union[str, Path]) -> Path:
    """CSV rows k, λ_k, then φ_k by interior vertex."""
    interior = list(spectrum.domain.interior)
    rows = []
    for k, lam in enumerate(spectrum.eigenvalues.tolist()):
        row = {"k": k + 1, "lambda": lam}
        row.update(zip(interior, spectrum.vectors[:, k].tolist()))
        rows.append(row)
    return write_csv(rows, path, ["k", "lambda"] + interior)


def export_solution(solution: SpectralSolution, path: Union[str, Path]) -> Path:
    """CSV rows t, vertex of Ω, u, du/dt."""
    domain = solution.domain
    u = domain.on_omega(solution.u)
    du = domain.on_omega(solution.du)
    rows = [
        {"t": t, "vertex": vertex, "u": u[i, j], "du": du[i, j]}
        for i, t in enumerate(solution.times.tolist())
        for j, vertex in enumerate(domain.omega)
    ]
    return write_csv(rows, path, ["t", "vertex", "u", "du"])
