"""
Linear dynamics models: cutoff, decomposition reports, modulation fields and decay fits
"""

import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from app.models.base import ArrayModel
from app.models.field import FieldSample

PART_NAMES = ("p0_part", "phase_part", "sc_tilde", "slf_tilde", "shf")


class CutoffProfile(BaseModel):
    """
    Even smooth cutoff: 1 on |xi| <= xi1/2, 0 on |xi| >= xi1.

    The transition integrates the bump exp(-1/(s(1-s))); the integral is
    tabulated by quadrature once and interpolated monotonically.
    """

    model_config = ConfigDict(frozen=True)

    xi1: float = Field(..., gt=0.0)
    table_size: int = Field(default=257, ge=17)

    _transition = PrivateAttr(default=None)

    def _build(self):
        from scipy.integrate import quad
        from scipy.interpolate import PchipInterpolator

        def bump(s: float) -> float:
            return math.exp(-1.0 / (s * (1.0 - s))) if 0.0 < s < 1.0 else 0.0

        nodes = np.linspace(0.0, 1.0, self.table_size)
        pieces = [quad(bump, a, b, epsabs=0.0, epsrel=1e-13)[0] for a, b in zip(nodes[:-1], nodes[1:])]
        cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
        cumulative /= cumulative[-1]
        return PchipInterpolator(nodes, cumulative)

    def __call__(self, xi):
        if self._transition is None:
            self._transition = self._build()
        r = np.abs(np.asarray(xi, dtype=float))
        half = self.xi1 / 2.0
        s = np.clip((r - half) / half, 0.0, 1.0)
        out = np.where(r <= half, 1.0, np.where(r >= self.xi1, 0.0, 1.0 - self._transition(s)))
        return float(out) if out.ndim == 0 else out


class DecompositionReport(ArrayModel):
    """Five-part split of exp(A t) f on one subharmonic lattice"""

    N: int
    t: float
    full: FieldSample
    parts: Dict[str, FieldSample]
    norms: Dict[str, float]
    closure_residual: float
    imag_residue: float = 0.0

    @property
    def norm_minus_p0(self) -> float:
        return self.full.with_values(self.full.values - self.parts["p0_part"].values).norm()

    @property
    def residual_norm(self) -> float:
        """||exp(A t) f - phi' gamma_N||"""
        rest = sum(self.parts[name].values for name in ("sc_tilde", "slf_tilde", "shf"))
        return self.full.with_values(rest).norm()

    def csv_row(self) -> Tuple:
        return (
            self.N, self.t, self.full.norm(), self.norm_minus_p0,
            self.norms["phase_part"], self.norms["sc_tilde"], self.norms["slf_tilde"], self.norms["shf"],
            self.closure_residual,
        )


DECAY_COLUMNS = (
    "N", "t", "norm_full", "norm_minus_p0", "norm_phase", "norm_sc", "norm_slf", "norm_shf", "closure_residual",
)


class ModulationField(ArrayModel):
    """
    gamma_N(x, t) = (1/NT) sum_xi exp(i xi x) amplitude_xi exp(lambda_c(xi) t).

    amplitudes and rates are indexed like xi, the lattice frequencies inside
    the cutoff support.
    """

    N: int
    t: float
    T: float
    gamma: FieldSample
    asymptotic_phase: float
    xi: np.ndarray
    amplitudes: np.ndarray
    rates: np.ndarray
    imag_residue: float = 0.0

    def deviation(self) -> float:
        """||gamma_N - asymptotic phase||_{L^2(0,NT)}"""
        return self.gamma.with_values(self.gamma.values - self.asymptotic_phase).norm()


class DecayFit(ArrayModel):
    """Least-squares decay fit of log-norms"""

    times: np.ndarray
    norms: np.ndarray
    model: str
    fitted_exponent: float
    prefactor: float
    fit_window: Tuple[float, float]
    r_squared: float


class LocalizedReport(ArrayModel):
    """Windowed surrogate run of the localized decomposition"""

    n_window: int
    times: np.ndarray
    norm_minus_kernel: np.ndarray
    norm_phase: np.ndarray
    norm_residual: np.ndarray
    closure_residuals: np.ndarray
    leaks: np.ndarray
    leak_free_until: float
    kernel_fit: Optional[DecayFit] = None
    residual_fit: Optional[DecayFit] = None


class WhithamComparison(ArrayModel):
    """||gamma(., t) - w(., t)|| against the exact advection-diffusion solution"""

    times: np.ndarray
    errors: np.ndarray
    a: float
    d: float
    fit: Optional[DecayFit] = None


class UniformSweepRow(BaseModel):
    """Per-N measurements of a subharmonic sweep"""

    model_config = ConfigDict(frozen=True)

    N: int
    prefactor: float
    late_rate: Optional[float] = None
    delta_N: float
    diffusive_rate: float
    residual_exponent: Optional[float] = None
    fit_window: Tuple[float, float]

    def csv_row(self) -> Tuple:
        blank = ""
        return (
            self.N, self.prefactor,
            blank if self.late_rate is None else self.late_rate,
            self.delta_N, self.diffusive_rate,
            blank if self.residual_exponent is None else self.residual_exponent,
            self.fit_window[0], self.fit_window[1],
        )


UNIFORM_COLUMNS = (
    "N", "prefactor", "late_rate", "delta_N", "diffusive_rate", "residual_exponent", "fit_t_min", "fit_t_max",
)


class UniformSweep(BaseModel):
    """Sweep table plus the raw decay rows"""

    model_config = ConfigDict(frozen=True)

    rows: List[UniformSweepRow]
    decay_rows: List[Tuple]
    eta: float

    @property
    def prefactor_spread(self) -> float:
        values = [r.prefactor for r in self.rows if r.prefactor > 0]
        return max(values) / min(values) if values else math.nan


class WindowBound(BaseModel):
    """sup rho |<Phi~_xi, v(xi)>| / ||v||_{L^1} per window"""

    model_config = ConfigDict(frozen=True)

    windows: List[int]
    constants: List[float]
    bound: float
