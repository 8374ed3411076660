"""
Wave file schema
"""

from pathlib import Path
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.models.base import to_plain
from app.models.wave import LleParams, PeriodicWave
from app.utils.io import PathLike, read_json, write_json


def complex_array(pairs) -> np.ndarray:
    """[[re, im], ...] (nested to any depth) back to a complex array"""
    arr = np.asarray(pairs, dtype=float)
    if arr.size == 0:
        return np.zeros(arr.shape[:-1], dtype=complex)
    return arr[..., 0] + 1j * arr[..., 1]


class WaveFile(BaseModel):
    """Schema for wave.json"""
    alpha: float
    beta: float
    F: float = Field(..., ge=0.0)
    T: float = Field(..., gt=0.0)
    M: int = Field(..., ge=1)
    coeffs: List[Tuple[float, float]]
    residual_norm: float
    even: bool
    iterations: int = 0

    @model_validator(mode="after")
    def check_length(self) -> "WaveFile":
        if len(self.coeffs) != 2 * self.M + 1:
            raise ValueError(f"coeffs must hold 2M+1 = {2 * self.M + 1} pairs")
        return self

    @classmethod
    def from_wave(cls, wave: PeriodicWave) -> "WaveFile":
        p = wave.params
        return cls(
            alpha=p.alpha, beta=p.beta, F=p.F, T=wave.T, M=wave.M,
            coeffs=to_plain(wave.coeffs), residual_norm=wave.residual_norm,
            even=wave.even, iterations=wave.iterations,
        )

    def to_wave(self) -> PeriodicWave:
        return PeriodicWave(
            params=LleParams(alpha=self.alpha, beta=self.beta, F=self.F),
            T=self.T,
            M=self.M,
            coeffs=complex_array(self.coeffs),
            residual_norm=self.residual_norm,
            even=self.even,
            iterations=self.iterations,
        )


def save_wave(wave: PeriodicWave, path: PathLike) -> Path:
    return write_json(path, WaveFile.from_wave(wave).model_dump())


def load_wave(path: PathLike) -> PeriodicWave:
    return WaveFile.model_validate(read_json(path)).to_wave()
