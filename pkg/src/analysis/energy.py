"""Energy conservation of unforced solutions."""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..problems.wave_problem import WaveProblem
from ..solvers.spectral import FormulaVariant, energy, solve_spectral
from ..utils.exceptions import EnergyIdentityError
from .reporting import ExperimentReport

logger = structlog.get_logger(__name__)

DRIFT_TOLERANCE = 1e-10
AGREEMENT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class EnergyDriftReport(ExperimentReport):
    """Spatial and modal energies over time and the largest departure from e(0)."""

    times: Tuple[float, ...]
    spatial: Tuple[float, ...]
    modal: Tuple[float, ...]

    experiment = "energy"
    columns = ["t", "spatial", "modal", "drift"]

    @property
    def initial(self) -> float:
        return self.spatial[0]

    @property
    def drift(self) -> float:
        return max(abs(e - self.initial) for e in self.spatial)

    @property
    def relative_drift(self) -> float:
        return self.drift / max(self.initial, 1.0)

    @property
    def max_mismatch(self) -> float:
        """Largest |spatial − modal| relative to max(|spatial|, 1)."""
        return max(abs(s - m) / max(abs(s), 1.0) for s, m in zip(self.spatial, self.modal))

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"t": t, "spatial": s, "modal": m, "drift": s - self.initial}
            for t, s, m in zip(self.times, self.spatial, self.modal)
        ]

    def checks(self) -> Dict[str, bool]:
        return {
            "energy_conserved": self.relative_drift <= DRIFT_TOLERANCE,
            "spatial_matches_modal": self.max_mismatch <= AGREEMENT_TOLERANCE,
        }

    def metrics(self) -> Dict[str, Any]:
        return {
            "initial_energy": self.initial,
            "drift": self.drift,
            "relative_drift": self.relative_drift,
            "max_mismatch": self.max_mismatch,
        }


def energy_drift(problem: WaveProblem, T: float, samples: int = 100, times: Optional[Sequence[float]] = None) -> EnergyDriftReport:
    """max_t |e(t) − e(0)| for an unforced problem, from the spectral solution."""
    if not problem.forcing.is_zero:
        raise EnergyIdentityError("energy identity requires f=0")
    times = np.linspace(0.0, T, samples) if times is None else np.asarray(times, dtype=float)
    if times.size == 0 or times[0] != 0.0:
        times = np.concatenate([[0.0], times])

    solution = solve_spectral(problem, [], FormulaVariant.DUHAMEL)
    values = [energy(problem, solution, float(t)) for t in times]
    report = EnergyDriftReport(
        times=tuple(times.tolist()),
        spatial=tuple(v.spatial for v in values),
        modal=tuple(v.modal for v in values),
    )
    logger.info(f"Energy drift over [0, {times[-1]:g}]: {report.drift:.3e} (e(0) = {report.initial:.6g})")
    return report
