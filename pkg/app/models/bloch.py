"""
Bloch operator models
"""

import enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import Field, PrivateAttr

from app.models.base import ArrayModel


class StabilityCondition(str, enum.Enum):
    """Conditions of diffusive spectral stability"""
    SPECTRUM_IN_LEFT_HALF_PLANE = "condition_i"
    QUADRATIC_TOUCH = "condition_ii"
    SIMPLE_TRANSLATION_EIGENVALUE = "condition_iii"


class BlochMatrix(ArrayModel):
    """Galerkin truncation of A_xi on stacked (w_r, w_i) coefficients, modes -M..M"""

    xi: float
    M: int = Field(..., ge=1)
    T: float = Field(..., gt=0.0)
    entries: np.ndarray

    @property
    def dimension(self) -> int:
        return 2 * (2 * self.M + 1)


class SpectralSlice(ArrayModel):
    """Sorted eigenvalues of one Bloch matrix"""

    xi: float
    eigenvalues: np.ndarray
    max_real_part: float
    zero_mode_residual: float = float("nan")
    truncation_converged: Optional[bool] = None


class CriticalCurve(ArrayModel):
    """Critical eigenvalue branch through zero with biorthogonal eigenvectors"""

    T: float
    M: int
    xi_samples: np.ndarray
    lambda_c: np.ndarray
    phi_xi: np.ndarray
    phi_tilde_xi: np.ndarray
    phi_prime: np.ndarray
    a: float
    d: float
    theta: float
    xi1: float
    delta1: float
    fit_residual: float
    interpolation_order: int = 3

    _splines: Optional[Tuple] = PrivateAttr(default=None)

    def _build_splines(self):
        from scipy.interpolate import make_interp_spline

        k = min(self.interpolation_order, len(self.xi_samples) - 1)

        def spline(values):
            return (
                make_interp_spline(self.xi_samples, values.real, k=k, axis=0),
                make_interp_spline(self.xi_samples, values.imag, k=k, axis=0),
            )

        return spline(self.lambda_c), spline(self.phi_xi), spline(self.phi_tilde_xi)

    def at(self, xi: float):
        """Interpolated (lambda_c, Phi_xi, Phi~_xi), renormalized so <Phi~, Phi> = 1"""
        if not self.xi_samples[0] - 1e-14 <= xi <= self.xi_samples[-1] + 1e-14:
            raise ValueError(f"xi={xi} outside the sampled range")
        idx = np.flatnonzero(np.abs(self.xi_samples - xi) <= 1e-15)
        if idx.size:
            i = idx[0]
            return complex(self.lambda_c[i]), self.phi_xi[i], self.phi_tilde_xi[i]
        if self._splines is None:
            self._splines = self._build_splines()
        lam_s, phi_s, tilde_s = self._splines
        lam = complex(lam_s[0](xi) + 1j * lam_s[1](xi))
        phi = phi_s[0](xi) + 1j * phi_s[1](xi)
        tilde = tilde_s[0](xi) + 1j * tilde_s[1](xi)
        pairing = self.T * np.vdot(tilde, phi)
        return lam, phi, tilde / np.conj(pairing)

    @property
    def pairings(self) -> np.ndarray:
        """<Phi~_xi, Phi_xi> per sample"""
        return self.T * np.einsum("ij,ij->i", np.conj(self.phi_tilde_xi), self.phi_xi)


class StabilityVerdict(ArrayModel):
    """Outcome of the diffusive spectral stability check"""

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
    offending_xi: List[float] = []
    truncation_converged: Optional[bool] = None
    xi_grid: np.ndarray = np.zeros(0)

    @property
    def stable(self) -> bool:
        return self.condition_i and self.condition_ii and self.condition_iii

    def failing_conditions(self) -> List[StabilityCondition]:
        failed = []
        if not self.condition_i:
            failed.append(StabilityCondition.SPECTRUM_IN_LEFT_HALF_PLANE)
        if not self.condition_ii:
            failed.append(StabilityCondition.QUADRATIC_TOUCH)
        if not self.condition_iii:
            failed.append(StabilityCondition.SIMPLE_TRANSLATION_EIGENVALUE)
        return failed
