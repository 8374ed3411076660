"""
Application settings using Pydantic Settings
"""

from pydantic_settings import BaseSettings
from typing import List, Optional, Union
from pydantic import field_validator
import logging
import os

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    # Application
    APP_NAME: str = "LLE Stability Toolkit"
    ENVIRONMENT: str = "development"
    DEBUG: bool = False

    # Logging
    LOG_LEVEL: str = "INFO"

    # Newton
    NEWTON_TOL: float = 1e-11
    NEWTON_MAX_ITER: int = 50
    DEFAULT_M: int = 32
    MAX_M: int = 256
    TAIL_TOL: float = 1e-12
    JACOBIAN_COND_MAX: float = 1e14

    # Bloch / spectral
    ZERO_EIG_TOL: float = 1e-8
    ALIGNMENT_TOL: float = 1e-6
    OVERLAP_MIN: float = 0.5
    CURVE_TAYLOR_STEP: float = 1e-3
    TRUNCATION_WINDOW_RE: float = -3.0
    TRUNCATION_TOL: float = 1e-6
    SINGULAR_SHIFT_TOL: float = 1e-12
    XI_GRID_POINTS: int = 201
    XI_REFINE_FACTOR: int = 4

    # Semigroup / fits
    EIG_COND_MAX: float = 1e8
    EXPM_AGREEMENT_TOL: float = 1e-9
    LEAK_TOL: float = 1e-10
    FIT_T_MIN: float = 5.0
    FIT_WINDOW_FACTOR: float = 0.5
    FIT_MIN_DECADES: float = 1.0
    SLOW_FIT_MIN_DECADES: float = 0.25
    WHITHAM_ONSET: float = 10.0
    WHITHAM_DECADES: float = 1.5
    WHITHAM_TIMES: int = 31

    # Riemann
    EXTENDED_DPS: int = 50
    SLOPE_GAP_FLOOR: float = 1e-14

    # Parallelism
    MAX_WORKERS: int = min(8, os.cpu_count() or 1)

    # Output
    OUTPUT_DIR: str = "./output"
    DEFAULT_N_LIST: Union[str, List[int]] = [1, 2, 4, 8, 16, 32]
    DEFAULT_SEED: int = 20240101
    PLOTS: bool = True

    @field_validator("DEFAULT_N_LIST", mode="before")
    @classmethod
    def assemble_n_list(cls, v: Union[str, List[int]]) -> List[int]:
        """
        Parse the default subharmonic list.
        Accepts a JSON list or comma-separated string.
        """
        if isinstance(v, str):
            v = v.strip()
            if v.startswith("[") and v.endswith("]"):
                try:
                    import json
                    parsed = json.loads(v)
                    if isinstance(parsed, list):
                        return [int(n) for n in parsed]
                except json.JSONDecodeError:
                    pass
            return [int(n.strip()) for n in v.split(",") if n.strip()]
        elif isinstance(v, list):
            return [int(n) for n in v]
        raise ValueError("Invalid N list format. Must be a list or comma-separated string.")

    @field_validator("MAX_WORKERS")
    @classmethod
    def positive_workers(cls, v: int) -> int:
        if v < 1:
            raise ValueError("MAX_WORKERS must be at least 1")
        return v

    class Config:
        env_file = ".env"
        case_sensitive = True


def load_settings(env_file: Optional[str] = ".env") -> Settings:
    """Create settings, falling back to defaults if the environment is malformed"""
    try:
        return Settings(_env_file=env_file)
    except Exception as e:
        logger.error(f"❌ Error loading settings: {e}")
        logger.warning("📝 Falling back to default settings...")
        return Settings(_env_file=None)


settings = load_settings()
