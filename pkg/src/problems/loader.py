"""Reading wave problems from the JSON problem format."""

import json
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import structlog
from pydantic import ValidationError

from ..graphs.domain import split_domain
from ..graphs.types import MeasureKind
from ..graphs.weighted_graph import WeightedGraph, load_graph
from ..utils.exceptions import InputFormatError
from .schemas import ProblemFile
from .time_profile import profile_from_dict
from .wave_problem import Forcing, HolderCondition, WaveProblem

logger = structlog.get_logger(__name__)


def problem_from_dict(
    data: Mapping[str, Any],
    base_dir: Union[str, Path] = ".",
    measure: Optional[MeasureKind] = None,
    name: str = "problem",
) -> WaveProblem:
    """Build a problem from its JSON form.

    ``graph`` is either an inline graph object or a path, relative paths being
    resolved against ``base_dir``. ``measure`` overrides the graph's measure.
    """
    try:
        spec = ProblemFile.model_validate(data)
    except ValidationError as e:
        raise InputFormatError(f"Invalid problem description: {e}")

    if isinstance(spec.graph, str):
        graph_path = Path(spec.graph)
        if not graph_path.is_absolute():
            graph_path = Path(base_dir) / graph_path
        graph = load_graph(graph_path, measure)
    else:
        graph = WeightedGraph.from_dict(spec.graph)
        if measure is not None and measure is not graph.measure_kind:
            graph = graph.with_measure(measure)

    domain = split_domain(graph, spec.omega)
    forcing = Forcing.from_terms(
        domain,
        [(entry.amplitude, profile_from_dict(entry.profile.model_dump())) for entry in spec.forcing],
    )
    holder = None
    if spec.holder is not None:
        holder = HolderCondition(alpha=spec.holder.alpha, c=spec.holder.c, c_tilde=spec.holder.c_tilde)

    problem = WaveProblem.create(domain, g=spec.g, h=spec.h, forcing=forcing, holder=holder, name=name)
    logger.info(f"Built problem {name!r}: N={domain.N}, boundary={len(domain.boundary)}, forcing terms={len(forcing.terms)}")
    return problem


def load_problem(path: Union[str, Path], measure: Optional[MeasureKind] = None) -> WaveProblem:
    """Read a problem JSON file; malformed JSON raises InputFormatError with line and column."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputFormatError(f"Malformed problem file {path}: {e.msg}", e.lineno, e.colno)
    except OSError as e:
        raise InputFormatError(f"Cannot read problem file {path}: {e}")
    return problem_from_dict(data, base_dir=path.parent, measure=measure, name=path.stem)
