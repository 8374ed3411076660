"""
Run configuration schema (YAML)
"""

import enum
import hashlib
import json
import math
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError
from pydantic import field_validator, model_validator

from app.config import settings
from app.core.exceptions import ValidationError
from app.models.wave import ALPHA_CRITICAL, threshold_pump
from app.utils.io import PathLike


class PrecisionMode(str, enum.Enum):
    """Reference precision of the lattice-sum sharpness stage"""
    STANDARD = "standard"
    EXTENDED = "extended"


class ParamsSpec(BaseModel):
    """LLE parameters; F may be left out when mu is given"""

    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(default=1.0, description="detuning")
    beta: float = Field(default=-1.0, description="dispersion sign, -1 or +1")
    F: Optional[float] = Field(default=None, ge=0.0, description="pump strength; derived from mu when omitted")

    @field_validator("beta")
    @classmethod
    def unit_dispersion(cls, v: float) -> float:
        if abs(v) != 1.0:
            raise ValueError("beta must be exactly -1 or +1")
        return v


class XiGridSpec(BaseModel):
    """Uniform grid on [-pi/T, pi/T) with extra points near 0"""

    model_config = ConfigDict(extra="forbid")

    n_points: int = Field(default=settings.XI_GRID_POINTS, ge=3)
    refine: int = Field(default=settings.XI_REFINE_FACTOR, ge=1)


class TimeGridSpec(BaseModel):
    """Sample times; log spacing prepends t = 0 when start is 0"""

    model_config = ConfigDict(extra="forbid")

    start: float = Field(default=0.0, ge=0.0)
    stop: float = Field(default=2000.0, gt=0.0)
    count: int = Field(default=61, ge=2)
    spacing: Literal["linear", "log"] = "log"

    @model_validator(mode="after")
    def ordered(self) -> "TimeGridSpec":
        if self.stop <= self.start:
            raise ValueError("stop must exceed start")
        if self.spacing == "log" and self.start == 0.0 and self.stop <= 1.0:
            raise ValueError("log spacing from 0 needs stop > 1")
        return self

    def values(self) -> np.ndarray:
        if self.spacing == "linear":
            return np.linspace(self.start, self.stop, self.count)
        if self.start == 0.0:
            return np.concatenate([[0.0], np.geomspace(1.0, self.stop, self.count - 1)])
        return np.geomspace(self.start, self.stop, self.count)


class LocalizedSpec(BaseModel):
    """Windowed surrogate of the localized run"""

    model_config = ConfigDict(extra="forbid")

    enabled: bool = True
    n_window: int = Field(default=64, ge=4)
    width: float = Field(default=2.0, gt=0.0)
    t_grid: TimeGridSpec = TimeGridSpec(start=0.0, stop=200.0, count=41)


class SharpnessSpec(BaseModel):
    """Lattice-sum sweep; null d or T take the fitted curve and the wave"""

    model_config = ConfigDict(extra="forbid")

    T: Optional[float] = Field(default=2.0 * math.pi, gt=0.0)
    d: Optional[float] = Field(default=1.0, gt=0.0)
    N_list: List[int] = [4, 8, 16, 32, 64, 128, 256]
    t_list: List[float] = [1.0, 4.0, 16.0, 64.0]

    @field_validator("N_list")
    @classmethod
    def positive_N(cls, v: List[int]) -> List[int]:
        if any(N < 1 for N in v):
            raise ValueError("N must be at least 1")
        return v

    @field_validator("t_list")
    @classmethod
    def positive_t(cls, v: List[float]) -> List[float]:
        if any(t <= 0 for t in v):
            raise ValueError("times must be positive")
        return v


class RunConfig(BaseModel):
    """One end-to-end run: wave, verdict, curve, sweeps, sharpness and reports"""

    model_config = ConfigDict(extra="forbid")

    params: ParamsSpec = Field(default_factory=ParamsSpec, description="LLE parameters")
    mu: Optional[float] = Field(default=1e-2, gt=0.0,
                                description="pump offset F^2 - F_1^2 of the bifurcating wave; null for a constant state")
    T: Optional[float] = Field(default=None, gt=0.0,
                               description="period of a constant-state run; defaults to 2 pi / sqrt(2 - alpha)")
    M: int = Field(default=settings.DEFAULT_M, ge=1, le=settings.MAX_M, description="Fourier truncation")
    tol: float = Field(default=settings.NEWTON_TOL, gt=0.0, description="Newton tolerance")
    xi_grid: XiGridSpec = Field(default_factory=XiGridSpec, description="Bloch frequency grid")
    N_list: List[int] = Field(default_factory=lambda: list(settings.DEFAULT_N_LIST),
                              description="subharmonic periods of the sweep; empty skips it")
    t_grid: TimeGridSpec = Field(default_factory=TimeGridSpec, description="times of the subharmonic sweep")
    cutoff_xi1: Optional[float] = Field(default=None, gt=0.0, description="cutoff radius; defaults to the curve xi1")
    curve_samples: int = Field(default=17, ge=8, description="samples of the critical curve")
    output_dir: str = Field(default=settings.OUTPUT_DIR, description="artifact directory")
    seed: int = Field(default=settings.DEFAULT_SEED, description="numpy default_rng seed of random test fields")
    precision_mode: PrecisionMode = Field(default=PrecisionMode.EXTENDED,
                                          description="standard or extended (mpmath) sharpness references")
    localized: LocalizedSpec = Field(default_factory=LocalizedSpec, description="windowed localized run")
    sharpness: SharpnessSpec = Field(default_factory=SharpnessSpec, description="lattice-sum sharpness sweep")
    plots: bool = Field(default=settings.PLOTS, description="write PNG plots next to report.md")

    @field_validator("N_list")
    @classmethod
    def positive_N(cls, v: List[int]) -> List[int]:
        if any(N < 1 for N in v):
            raise ValueError("N must be at least 1")
        if len(set(v)) != len(v):
            raise ValueError("N_list entries must be distinct")
        return sorted(v)

    @model_validator(mode="after")
    def pump_given(self) -> "RunConfig":
        p = self.params
        if self.mu is None and p.F is None:
            raise ValueError("either params.F or mu is required")
        if self.mu is not None:
            if p.alpha >= ALPHA_CRITICAL:
                raise ValueError("bifurcating waves need alpha < 41/30")
            if p.F is not None:
                expected = math.sqrt(threshold_pump(p.alpha) ** 2 + self.mu)
                if abs(p.F - expected) > 1e-12 * expected:
                    raise ValueError(f"params.F={p.F} contradicts mu (F would be {expected})")
        elif self.T is None and p.alpha >= 2.0:
            raise ValueError("T is required for a constant state with alpha >= 2")
        return self

    @property
    def bifurcating(self) -> bool:
        return self.mu is not None

    @property
    def period(self) -> Optional[float]:
        if self.T is not None:
            return self.T
        if self.params.alpha < 2.0:
            return 2.0 * math.pi / math.sqrt(2.0 - self.params.alpha)
        return None

    def section_hash(self, *names: str) -> str:
        """sha256 of the canonical JSON of the named sections"""
        data = self.model_dump(mode="json", include=set(names))
        return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()


def load_run_config(path: PathLike) -> RunConfig:
    """Parse and fully validate a YAML run config"""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file {path} does not exist", field="config")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ValidationError(f"config is not valid YAML: {e}", field="config")
    if not isinstance(raw, dict):
        raise ValidationError("config must be a mapping", field="config")
    try:
        return RunConfig.model_validate(raw)
    except PydanticValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "config"
        raise ValidationError(f"{where}: {first['msg']}", field=where)


def render_template() -> str:
    """YAML with every default, one comment per top-level key"""
    defaults = RunConfig()
    lines = ["# LLE stability toolkit run configuration", ""]
    for name, field in RunConfig.model_fields.items():
        if field.description:
            lines.append(f"# {field.description}")
        value = defaults.model_dump(mode="json", include={name})
        lines.append(yaml.safe_dump(value, sort_keys=False, default_flow_style=False).rstrip())
        lines.append("")
    return "\n".join(lines)
