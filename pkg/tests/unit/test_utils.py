import json

import numpy as np
import pytest
import structlog

from src.utils.config import Settings, get_settings
from src.utils.exceptions import (
    DegenerateSpectrumError,
    GraphWaveError,
    InputFormatError,
    LinearSolverError,
    SolverError,
)
from src.utils.io import format_number, write_csv, write_json
from src.utils.logging_config import configure_logging


@pytest.mark.parametrize(
    "value, text",
    [
        (0.1, "0.1"),
        (1.0, "1.0"),
        (np.float64(1 / 3), "0.3333333333333333"),
        (np.int64(7), "7"),
        (True, "true"),
        (np.bool_(False), "false"),
        (float("inf"), "inf"),
        (None, ""),
        ("v3", "v3"),
    ],
)
def test_format_number(value, text):
    assert format_number(value) == text


def test_write_csv_is_deterministic(tmp_path):
    rows = [{"t": 0.1, "vertex": "a", "u": 2.0 / 3.0}, {"t": 0.2, "vertex": "b"}]
    first = write_csv(rows, tmp_path / "nested" / "a.csv", ["t", "vertex", "u"])
    second = write_csv(rows, tmp_path / "b.csv", ["t", "vertex", "u"])
    assert first.read_text() == "t,vertex,u\n0.1,a,0.6666666666666666\n0.2,b,\n"
    assert first.read_bytes() == second.read_bytes()


def test_write_json_sorts_keys_and_converts_numpy(tmp_path):
    path = write_json({"b": np.arange(2), "a": np.float64(0.5), "c": float("nan")}, tmp_path / "s.json")
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": 0.5, "b": [0, 1], "c": "nan"}


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("GRAPHWAVE_DENSE_THRESHOLD", "64")
    monkeypatch.setenv("GRAPHWAVE_LOG_LEVEL", "DEBUG")
    get_settings.cache_clear()
    try:
        settings = get_settings()
        assert settings.dense_threshold == 64
        assert settings.log_level == "DEBUG"
        assert settings.cg_tolerance == 1e-13
    finally:
        get_settings.cache_clear()


def test_settings_validation(monkeypatch):
    monkeypatch.setenv("GRAPHWAVE_MAX_WORKERS", "0")
    with pytest.raises(ValueError):
        Settings()


def test_configure_logging_filters_levels(capsys):
    configure_logging("WARNING")
    try:
        logger = structlog.get_logger("graphwave.test")
        logger.info("hidden message")
        logger.warning("shown message")
        err = capsys.readouterr().err
    finally:
        structlog.reset_defaults()
    assert "shown message" in err
    assert "hidden message" not in err


def test_exception_hierarchy():
    assert issubclass(DegenerateSpectrumError, SolverError)
    assert issubclass(InputFormatError, GraphWaveError)
    error = InputFormatError("Malformed JSON", line=3, column=5)
    assert str(error) == "Malformed JSON at line 3, column 5"
    assert str(InputFormatError("Missing file")) == "Missing file"
    assert LinearSolverError("No convergence", 1e-3).residual == 1e-3
