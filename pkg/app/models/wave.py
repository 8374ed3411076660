"""
Stationary wave models
"""

import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.base import ArrayModel
from app.utils import fourier

# Instability threshold of the bifurcating even waves
ALPHA_CRITICAL = 41.0 / 30.0


class LleParams(BaseModel):
    """Detuning alpha, dispersion sign beta and pump strength F"""

    model_config = ConfigDict(frozen=True)

    alpha: float
    beta: float = -1.0
    F: float = Field(..., ge=0.0)

    @field_validator("beta")
    @classmethod
    def unit_dispersion(cls, v: float) -> float:
        if abs(v) != 1.0:
            raise ValueError("beta must be exactly -1 or +1")
        return v


def threshold_pump(alpha: float) -> float:
    """F_1 with F_1^2 = (1 - alpha)^2 + 1"""
    return math.sqrt((1.0 - alpha) ** 2 + 1.0)


class BifurcationSeed(BaseModel):
    """Parameters of the small-amplitude even wave near the threshold pump"""

    model_config = ConfigDict(frozen=True)

    alpha: float
    mu: float = Field(..., gt=0.0)

    @field_validator("alpha")
    @classmethod
    def below_threshold(cls, v: float) -> float:
        if v >= 2.0:
            raise ValueError("alpha must be below 2 for a real critical wavenumber")
        if v >= ALPHA_CRITICAL:
            raise ValueError("alpha must be below 41/30")
        return v

    @property
    def F1(self) -> float:
        return threshold_pump(self.alpha)

    @property
    def k_c(self) -> float:
        return math.sqrt(2.0 - self.alpha)

    @property
    def T(self) -> float:
        return 2.0 * math.pi / self.k_c

    @property
    def F(self) -> float:
        return math.sqrt(self.F1 ** 2 + self.mu)

    @property
    def amplitude(self) -> complex:
        """Total cosine amplitude of the leading correction"""
        a = self.alpha
        return 3.0 * (a + 1j * (2.0 - a)) / (self.F1 * math.sqrt(41.0 - 30.0 * a)) * math.sqrt(self.mu)


class PeriodicWave(ArrayModel):
    """T-periodic profile stored as centered Fourier coefficients"""

    params: LleParams
    T: float = Field(..., gt=0.0)
    M: int = Field(..., ge=1)
    coeffs: np.ndarray
    residual_norm: float = Field(default=math.inf, ge=0.0)
    even: bool = False
    iterations: int = 0
    residual_history: Tuple[float, ...] = ()

    @model_validator(mode="after")
    def check_shape(self) -> "PeriodicWave":
        if self.coeffs.shape != (2 * self.M + 1,):
            raise ValueError(f"coeffs must have length 2M+1 = {2 * self.M + 1}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coeffs must be finite")
        return self

    def coefficient(self, k: int) -> complex:
        return complex(self.coeffs[k + self.M]) if abs(k) <= self.M else 0j

    @property
    def first_harmonic_amplitude(self) -> complex:
        return self.coefficient(1) + self.coefficient(-1)

    def tail(self) -> float:
        """max |c_k| over |k| > M/2"""
        k = fourier.mode_indices(self.M)
        mask = np.abs(k) > self.M / 2
        return float(np.max(np.abs(self.coeffs[mask]))) if mask.any() else 0.0

    def components(self, M: int = None):
        """Coefficients of phi_r and phi_i, optionally padded to half-width M"""
        c = self.coeffs if M is None else fourier.pad_coefficients(self.coeffs, M)
        return fourier.split_components(c)

    def evaluate(self, x, derivative: int = 0) -> np.ndarray:
        return fourier.evaluate_series(self.coeffs, self.T, np.asarray(x, dtype=float), derivative)

    def derivative_vector(self, M: int = None) -> np.ndarray:
        """Stacked (phi_r', phi_i') coefficients on modes -M..M"""
        M = M or self.M
        a_r, a_i = self.components(M)
        return np.concatenate([fourier.differentiate(a_r, self.T), fourier.differentiate(a_i, self.T)])

    def with_coeffs(self, coeffs: np.ndarray, **updates) -> "PeriodicWave":
        M = (len(coeffs) - 1) // 2
        data = {
            "params": self.params, "T": self.T, "M": M, "coeffs": coeffs,
            "residual_norm": self.residual_norm, "even": self.even,
        }
        data.update(updates)
        return PeriodicWave(**data)
