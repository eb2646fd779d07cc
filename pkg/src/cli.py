"""Command-line front end: ``graphwave <command> [options]``.

Every command writes its artifacts into ``--out``; logs go to stderr.
Exit status is 0 on success, 1 when a check or a solver fails and 2 on
invalid input.
"""

import argparse
import os
import sys
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional, Sequence, get_args

import numpy as np
import structlog
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .analysis.comparison import compare_solvers
from .analysis.convergence import convergence_study
from .analysis.energy import energy_drift
from .analysis.propagation import DEFAULT_TIMES, propagation_experiment
from .analysis.reporting import ExperimentReport, write_report
from .analysis.residual import scheme_residual
from .analysis.verification import verify_problem
from .graphs.types import MeasureKind
from .operators.laplacian import laplacian_norm_bound, poincare_constant
from .problems.loader import load_problem
from .problems.wave_problem import WaveProblem
from .solvers.rothe import export_trajectory, solve_rothe
from .solvers.spectral import FormulaVariant, eigendecompose, export_solution, export_spectrum, solve_spectral
from .utils.config import get_settings
from .utils.exceptions import (
    AnalysisError,
    ConfigurationError,
    EnergyIdentityError,
    GraphError,
    InputFormatError,
    ProblemError,
    SolverError,
)
from .utils.io import write_json
from .utils.logging_config import configure_logging

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2

Command = Literal["spectrum", "solve-rothe", "solve-spectral", "compare", "energy", "propagation", "convergence", "verify"]
COMMANDS = list(get_args(Command))


class RunConfig(BaseModel):
    command: Command
    problem: Optional[Path] = None
    T: float = Field(1.0, gt=0)
    n: int = Field(200, ge=1)
    n_list: List[int] = [125, 250, 500, 1000, 2000]
    times: Optional[List[float]] = None
    out: Path = Path("out")
    variant: FormulaVariant = FormulaVariant.DUHAMEL
    measure: Optional[MeasureKind] = None
    n_interior: int = Field(5, ge=1)
    amplitude: float = -1.0

    @field_validator("n_list")
    def validate_n_list(cls, v):
        if not v or any(n < 1 for n in v):
            raise ValueError("n-list must contain positive step counts")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("n-list must be strictly increasing")
        return v

    @field_validator("times")
    def validate_times(cls, v):
        if v is not None and any(t < 0 for t in v):
            raise ValueError("sample times must be nonnegative")
        return v

    @field_validator("out")
    def validate_out(cls, v):
        if v.exists() and not v.is_dir():
            raise ValueError(f"{v} exists and is not a directory")
        # el directorio más cercano que exista debe admitir escritura
        existing = v
        while not existing.exists():
            existing = existing.parent
        if not os.access(existing, os.W_OK):
            raise ValueError(f"{v} is not writable")
        return v

    @model_validator(mode="after")
    def problem_required(self) -> "RunConfig":
        if self.command != "propagation" and self.problem is None:
            raise ValueError(f"--problem is required for {self.command}")
        return self

    def sample_times(self) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        return np.linspace(0.0, self.T, self.n + 1)


def _load(config: RunConfig, path: Optional[Path] = None) -> WaveProblem:
    return load_problem(path or config.problem, config.measure)


def _finish(report: ExperimentReport, config: RunConfig, name: Optional[str] = None) -> int:
    write_report(report, config.out, name)
    return EXIT_OK if report.passed else EXIT_FAILURE


def _spectrum(config: RunConfig) -> int:
    problem = _load(config)
    spectrum = eigendecompose(problem.domain)
    export_spectrum(spectrum, config.out / "spectrum.csv")
    write_json({
        "problem": problem.name,
        "interior": list(problem.domain.interior),
        "eigenvalues": spectrum.eigenvalues,
        "poincare_constant": poincare_constant(problem.domain),
        "laplacian_norm_bound": laplacian_norm_bound(problem.domain),
    }, config.out / "spectrum.json")
    return EXIT_OK


def _solve_rothe(config: RunConfig) -> int:
    problem = _load(config)
    run = solve_rothe(problem, config.T, config.n)
    export_trajectory(run, config.out / "trajectory.csv")
    write_json({
        "problem": problem.name,
        "T": config.T,
        "n": config.n,
        "step": run.step,
        "final": dict(zip(problem.domain.interior, run.levels[-1].tolist())),
        "scheme_residual": scheme_residual(run),
    }, config.out / "trajectory.json")
    return EXIT_OK


def _solve_spectral(config: RunConfig) -> int:
    problem = _load(config)
    solution = solve_spectral(problem, config.sample_times(), config.variant)
    export_solution(solution, config.out / "solution.csv")
    write_json({
        "problem": problem.name,
        "variant": solution.variant.value,
        "eigenvalues": solution.spectrum.eigenvalues,
    }, config.out / "solution.json")
    return EXIT_OK


def _compare(config: RunConfig) -> int:
    return _finish(compare_solvers(_load(config), config.T, config.n, config.times), config)


def _energy(config: RunConfig) -> int:
    return _finish(energy_drift(_load(config), config.T, times=config.times), config)


def _propagation(config: RunConfig) -> int:
    report = propagation_experiment(
        n_interior=config.n_interior,
        amplitude=config.amplitude,
        t_list=config.times or DEFAULT_TIMES,
        measure=config.measure or MeasureKind.NORMALIZED,
    )
    return _finish(report, config)


def _convergence(config: RunConfig) -> int:
    return _finish(convergence_study(_load(config), config.T, config.n_list), config)


def _verify(config: RunConfig) -> int:
    paths = sorted(config.problem.glob("*.json")) if config.problem.is_dir() else [config.problem]
    if not paths:
        raise InputFormatError(f"No problem files in {config.problem}")
    status = EXIT_OK
    for path in paths:
        report = verify_problem(_load(config, path), config.T, config.n)
        status = max(status, _finish(report, config, name=f"verify_{path.stem}"))
    return status


HANDLERS: Dict[str, Callable[[RunConfig], int]] = {
    "spectrum": _spectrum,
    "solve-rothe": _solve_rothe,
    "solve-spectral": _solve_spectral,
    "compare": _compare,
    "energy": _energy,
    "propagation": _propagation,
    "convergence": _convergence,
    "verify": _verify,
}


def run(config: RunConfig) -> int:
    """Execute one command and map library errors to the exit-code contract."""
    try:
        return HANDLERS[config.command](config)
    except (InputFormatError, GraphError, ProblemError, ConfigurationError, EnergyIdentityError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INPUT
    except (SolverError, AnalysisError) as e:
        logger.error(f"{config.command} failed: {e}")
        return EXIT_FAILURE


def _split(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphwave", description="Wave equation on weighted graphs with Dirichlet boundary")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--problem", help="problem JSON file (verify also accepts a directory)")
    parser.add_argument("--T", type=float, default=1.0, help="final time")
    parser.add_argument("--n", type=int, default=200, help="number of Rothe steps")
    parser.add_argument("--n-list", help="comma-separated step counts for convergence")
    parser.add_argument("--times", help="comma-separated sample times")
    parser.add_argument("--variant", choices=["duhamel", "paper", "paper_thm12"], default="duhamel")
    parser.add_argument("--measure", choices=["unit", "normalized"], help="override the graph's measure")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--n-interior", type=int, default=5, help="interior vertices of the propagation path")
    parser.add_argument("--amplitude", type=float, default=-1.0, help="propagation source amplitude")
    parser.add_argument("--log-level", default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    # Configurar logging
    configure_logging(args.log_level or get_settings().log_level)

    # Validar la configuración de la ejecución
    raw = {
        "command": args.command,
        "problem": args.problem,
        "T": args.T,
        "n": args.n,
        "out": args.out,
        "variant": FormulaVariant(args.variant),
        "measure": args.measure,
        "n_interior": args.n_interior,
        "amplitude": args.amplitude,
    }
    if args.n_list is not None:
        raw["n_list"] = _split(args.n_list)
    if args.times is not None:
        raw["times"] = _split(args.times)
    try:
        config = RunConfig(**raw)
    except ValidationError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_INPUT

    logger.info(f"Running {config.command} into {config.out}")
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
