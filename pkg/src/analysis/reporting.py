"""Common shape of experiment reports and their on-disk artifacts."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, ClassVar, Dict, List, Optional, Tuple, Union

import pandas as pd
import structlog

from ..utils.io import write_csv, write_json

logger = structlog.get_logger(__name__)


class ExperimentReport(ABC):
    """An immutable experiment result: tabular rows plus named pass/fail checks."""

    experiment: ClassVar[str] = "experiment"
    columns: ClassVar[List[str]] = []

    @abstractmethod
    def rows(self) -> List[Dict[str, Any]]:
        """Plot-ready rows, one dict per CSV line."""
        pass

    @abstractmethod
    def checks(self) -> Dict[str, bool]:
        """Machine-checkable assertions of the experiment."""
        pass

    def metrics(self) -> Dict[str, Any]:
        return {}

    @property
    def passed(self) -> bool:
        return all(self.checks().values())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows(), columns=self.columns)

    def summary(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "passed": self.passed,
            "checks": self.checks(),
            "metrics": self.metrics(),
        }


def write_report(
    report: ExperimentReport,
    out_dir: Union[str, Path],
    name: Optional[str] = None,
) -> Tuple[Path, Path]:
    """Write ``<name>.csv`` and ``<name>.json`` into ``out_dir``."""
    name = name or report.experiment
    out_dir = Path(out_dir)
    csv_path = write_csv(report.rows(), out_dir / f"{name}.csv", report.columns)
    json_path = write_json(report.summary(), out_dir / f"{name}.json")
    failed = [check for check, ok in report.checks().items() if not ok]
    if failed:
        logger.warning(f"{report.experiment}: failed checks {failed}")
    else:
        logger.info(f"{report.experiment}: all {len(report.checks())} checks passed")
    return csv_path, json_path
