"""
Spectrum, critical-curve and verdict file schemas
"""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from app.models.base import to_plain
from app.models.bloch import CriticalCurve, SpectralSlice, StabilityVerdict
from app.schemas.wave import complex_array
from app.utils.io import PathLike, read_json, write_csv, write_json

SPECTRUM_COLUMNS = ("xi", "re_lambda", "im_lambda", "branch_id")


class CurveFile(BaseModel):
    """Schema for curve.json: the summary fields plus the eigenvector samples"""
    xi_samples: List[float]
    lambda_c: List[Tuple[float, float]]
    a: float
    d: float
    theta: float
    xi1: float
    fit_residual: float
    delta1: float
    T: float
    M: int
    phi_xi: List[List[Tuple[float, float]]]
    phi_tilde_xi: List[List[Tuple[float, float]]]
    phi_prime: List[Tuple[float, float]]
    interpolation_order: int = 3

    @classmethod
    def from_curve(cls, curve: CriticalCurve) -> "CurveFile":
        return cls(**{name: to_plain(getattr(curve, name)) for name in cls.model_fields})

    def to_curve(self) -> CriticalCurve:
        data = self.model_dump()
        data["xi_samples"] = np.asarray(data["xi_samples"], dtype=float)
        for name in ("lambda_c", "phi_xi", "phi_tilde_xi", "phi_prime"):
            data[name] = complex_array(data[name])
        return CriticalCurve(**data)


class VerdictFile(BaseModel):
    """Schema for verdict.json"""
    stable: bool
    failing_conditions: List[str]
    condition_i: bool
    condition_ii: bool
    theta: float
    condition_iii: bool
    delta_N_table: Dict[int, float]
    xi0: float
    delta0: float
    xi1: float
    delta1: float
    max_real_part: float
    secondary_gap: float
    zero_mode_residual: float
    kernel_residual: float
    kernel_alignment: float
    offending_xi: List[float]
    truncation_converged: Optional[bool] = None
    xi_grid: List[float]

    @classmethod
    def from_verdict(cls, verdict: StabilityVerdict) -> "VerdictFile":
        data = verdict.to_dict()
        data["stable"] = verdict.stable
        data["failing_conditions"] = [c.value for c in verdict.failing_conditions()]
        return cls(**data)

    def to_verdict(self) -> StabilityVerdict:
        data = self.model_dump(exclude={"stable", "failing_conditions"})
        data["xi_grid"] = np.asarray(data["xi_grid"], dtype=float)
        return StabilityVerdict(**data)


def save_curve(curve: CriticalCurve, path: PathLike) -> Path:
    return write_json(path, CurveFile.from_curve(curve).model_dump())


def load_curve(path: PathLike) -> CriticalCurve:
    return CurveFile.model_validate(read_json(path)).to_curve()


def save_verdict(verdict: StabilityVerdict, path: PathLike) -> Path:
    return write_json(path, VerdictFile.from_verdict(verdict).model_dump())


def load_verdict(path: PathLike) -> StabilityVerdict:
    return VerdictFile.model_validate(read_json(path)).to_verdict()


def spectrum_rows(slices: Iterable[SpectralSlice]):
    for s in slices:
        for branch, lam in enumerate(s.eigenvalues):
            yield (float(s.xi), float(lam.real), float(lam.imag), branch)


def save_spectrum(slices: Iterable[SpectralSlice], path: PathLike) -> Path:
    return write_csv(path, SPECTRUM_COLUMNS, spectrum_rows(slices))
