"""Runtime settings for graphwave, read from the environment and `.env`."""

from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical tolerances and runtime knobs.

    Every field can be overridden with a ``GRAPHWAVE_`` prefixed environment
    variable, e.g. ``GRAPHWAVE_DENSE_THRESHOLD=1024``.
    """

    model_config = SettingsConfigDict(env_prefix="GRAPHWAVE_", extra="ignore")

    log_level: str = "INFO"
    dense_threshold: int = Field(512, ge=1)
    cg_tolerance: float = Field(1e-13, gt=0)
    cg_iteration_factor: int = Field(10, ge=1)
    quadrature_tolerance: float = Field(1e-11, gt=0)
    quadrature_max_panels: int = Field(2**20, ge=2)
    c_tilde_grid: int = Field(1024, ge=2)
    max_workers: int = Field(4, ge=1)
    # Reserved; every algorithm in the package is deterministic.
    seed: Optional[int] = None


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Load settings once per process."""
    load_dotenv()
    return Settings()
