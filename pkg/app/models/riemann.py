"""
Riemann-sum models
"""

import math
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field

APPENDIX_REGIME = "appendix-regime"
OUTSIDE_REGIME = "outside-appendix-regime"


class GaussianSumInput(BaseModel):
    """Lattice Omega_N of period T with Gaussian weight exp(-2 d xi^2 t)"""

    model_config = ConfigDict(frozen=True)

    N: int = Field(..., ge=1)
    T: float = Field(..., gt=0.0)
    d: float = Field(..., gt=0.0)
    t: float = Field(..., gt=0.0)

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / (self.N * self.T)

    @property
    def regime_flag(self) -> str:
        return APPENDIX_REGIME if self.N >= 2 and self.t >= 1.0 else OUTSIDE_REGIME

    def rescaled(self, c: float) -> "GaussianSumInput":
        """(d, t) -> (c d, t / c); the sums depend on d t only"""
        return GaussianSumInput(N=self.N, T=self.T, d=self.d * c, t=self.t / c)


class SharpnessRecord(BaseModel):
    """|lattice sum - integral| for one (N, t) and variant"""

    model_config = ConfigDict(frozen=True)

    N: int
    t: float
    variant: str
    sum_value: float
    reference_sum: float
    integral_value: float
    gap: float = Field(..., ge=0.0)
    regime_flag: str
    rescaled_gap: float
    rescaled_bound: Optional[float] = None

    @computed_field
    @property
    def bound_const(self) -> float:
        """gap N (plain) or gap N (1 + t) (weighted)"""
        scale = self.N if self.variant == "plain" else self.N * (1.0 + self.t)
        return self.gap * scale

    @property
    def agreement_digits(self) -> float:
        """Significant digits shared by the hardware and extended-precision sums"""
        if self.reference_sum == 0.0:
            return math.inf if self.sum_value == 0.0 else 0.0
        rel = abs(self.sum_value - self.reference_sum) / abs(self.reference_sum)
        return math.inf if rel == 0.0 else -math.log10(rel)

    def csv_row(self):
        return (self.N, self.t, self.variant, self.sum_value, self.integral_value, self.gap,
                self.bound_const, self.regime_flag)


SHARPNESS_COLUMNS = ("N", "t", "variant", "sum", "integral", "gap", "normalized_const", "regime_flag")


class UniformBoundReport(BaseModel):
    """Worst constants of the uniform lattice-sum bounds over a (N, t) sweep"""

    model_config = ConfigDict(frozen=True)

    sup_plain: float
    sup_weighted: float
    small_time_bound_ok: bool
    monotone_comparison_ok: bool
    cells: int


class CrossoverReport(BaseModel):
    """F_N(t) = t^{3/2} x weighted sum: plateau, onset of decay and the differential inequality"""

    model_config = ConfigDict(frozen=True)

    N: int
    T: float
    d: float
    t_star: float
    times: List[float]
    values: List[float]
    derivatives: List[float]
    t_peak: float
    peak_value: float
    decays_after_onset: bool
    inequality_violation: float
    bracketed: bool


class SharpnessSummary(BaseModel):
    """Scaling slopes, uniform bounds and crossover of one sharpness sweep"""
    T: float
    d: float
    extended: bool
    slopes: Dict[str, Dict[str, float]]
    min_agreement_digits: float
    uniform: UniformBoundReport
    crossover: List[CrossoverReport] = []
