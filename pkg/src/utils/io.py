"""Deterministic artifact writers shared by solvers, experiments and the CLI."""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd
import structlog

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]


def format_number(value: Any) -> str:
    """Shortest round-trip decimal text for a number; other values pass through."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(rows: List[Dict[str, Any]], path: PathLike, columns: List[str]) -> Path:
    """Write rows as CSV with every cell pre-formatted, so bytes are reproducible."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [[format_number(row.get(column)) for column in columns] for row in rows],
        columns=columns,
        dtype=str,
    )
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan literals
        return value if math.isfinite(value) else format_number(value)
    return value


def write_json(payload: Dict[str, Any], path: PathLike) -> Path:
    """Write a JSON summary with sorted keys and round-trip float text."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote summary to {path}")
    return path
