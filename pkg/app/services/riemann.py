"""
Lattice sums over Omega_N of exp(-2 d xi^2 t) and xi^2 exp(-2 d xi^2 t),
their Gaussian integrals over [-pi/T, pi/T] and the gaps between them.

Hardware sums are exactly rounded (math.fsum); references are evaluated with
mpmath at settings.EXTENDED_DPS digits.
"""

import logging
import math
from typing import Dict, Iterable, List, Sequence, Tuple

import mpmath
import numpy as np
import scipy.integrate
import scipy.special

from app.config import settings
from app.core.exceptions import ValidationError
from app.models.riemann import (
    APPENDIX_REGIME,
    CrossoverReport,
    GaussianSumInput,
    SharpnessRecord,
    SharpnessSummary,
    UniformBoundReport,
)
from app.services.transforms import lattice, lattice_indices

logger = logging.getLogger(__name__)

VARIANTS = ("plain", "weighted")


def _nonzero_frequencies(inp: GaussianSumInput) -> np.ndarray:
    xi = lattice(inp.N, inp.T).frequencies
    return xi[xi != 0.0]


def sum_plain(inp: GaussianSumInput) -> float:
    """(2 pi / NT) sum over Omega_N minus {0} of exp(-2 d xi^2 t)"""
    xi = _nonzero_frequencies(inp)
    return inp.spacing * math.fsum(np.exp(-2.0 * inp.d * xi ** 2 * inp.t))


def sum_weighted(inp: GaussianSumInput) -> float:
    """(2 pi / NT) sum over Omega_N of xi^2 exp(-2 d xi^2 t)"""
    xi = _nonzero_frequencies(inp)
    return inp.spacing * math.fsum(xi ** 2 * np.exp(-2.0 * inp.d * xi ** 2 * inp.t))


def lattice_sum(inp: GaussianSumInput, variant: str) -> float:
    if variant == "plain":
        return sum_plain(inp)
    if variant == "weighted":
        return sum_weighted(inp)
    raise ValidationError(f"unknown variant '{variant}'", field="variant")


def reference_sum(inp: GaussianSumInput, variant: str, dps: int = None) -> mpmath.mpf:
    """Extended-precision lattice sum"""
    with mpmath.workdps(dps or settings.EXTENDED_DPS):
        T, d, t = mpmath.mpf(inp.T), mpmath.mpf(inp.d), mpmath.mpf(inp.t)
        spacing = 2 * mpmath.pi / (inp.N * T)
        total = mpmath.mpf(0)
        for j in lattice_indices(inp.N):
            if j == 0:
                continue
            xi = int(j) * spacing
            term = mpmath.exp(-2 * d * xi ** 2 * t)
            total += xi ** 2 * term if variant == "weighted" else term
        return +(spacing * total)


def _check_positive(T: float, d: float, t: float) -> None:
    if T <= 0 or d <= 0 or t <= 0:
        raise ValidationError("T, d and t must be positive", field="T, d, t")


def integral_plain(T: float, d: float, t: float) -> float:
    """int_{-pi/T}^{pi/T} exp(-2 d xi^2 t) dxi = sqrt(pi/s) erf(a sqrt(s)), s = 2 d t, a = pi/T"""
    _check_positive(T, d, t)
    s, a = 2.0 * d * t, math.pi / T
    return math.sqrt(math.pi / s) * float(scipy.special.erf(a * math.sqrt(s)))


def integral_weighted(T: float, d: float, t: float) -> float:
    """int_{-pi/T}^{pi/T} xi^2 exp(-2 d xi^2 t) dxi"""
    _check_positive(T, d, t)
    s, a = 2.0 * d * t, math.pi / T
    return (math.sqrt(math.pi) / (2.0 * s ** 1.5)) * float(scipy.special.erf(a * math.sqrt(s))) \
        - (a / s) * math.exp(-s * a * a)


def reference_integral(T: float, d: float, t: float, variant: str, dps: int = None) -> mpmath.mpf:
    with mpmath.workdps(dps or settings.EXTENDED_DPS):
        s = 2 * mpmath.mpf(d) * mpmath.mpf(t)
        a = mpmath.pi / mpmath.mpf(T)
        erf = mpmath.erf(a * mpmath.sqrt(s))
        if variant == "plain":
            return +(mpmath.sqrt(mpmath.pi / s) * erf)
        return +(mpmath.sqrt(mpmath.pi) / (2 * s ** mpmath.mpf(1.5)) * erf - (a / s) * mpmath.exp(-s * a * a))


def whole_line_integral(d: float, t: float, variant: str) -> float:
    s = 2.0 * d * t
    if variant == "plain":
        return math.sqrt(math.pi / s)
    return math.sqrt(math.pi) / (2.0 * s ** 1.5)


def tail_bound(T: float, d: float, t: float, variant: str) -> float:
    """
    Upper bound on (whole line - truncated) integral:
    exp(-s a^2) / (a s) (plain) and exp(-s a^2) (a / s + 1 / (2 a s^2)) (weighted).
    """
    s, a = 2.0 * d * t, math.pi / T
    decay = math.exp(-s * a * a)
    if variant == "plain":
        return decay / (a * s)
    return decay * (a / s + 1.0 / (2.0 * a * s * s))


def quadrature_integral(T: float, d: float, t: float, variant: str) -> float:
    """Adaptive quadrature of the truncated Gaussian moments"""
    s, a = 2.0 * d * t, math.pi / T
    if variant == "plain":
        integrand = lambda x: math.exp(-s * x * x)  # noqa: E731
    else:
        integrand = lambda x: x * x * math.exp(-s * x * x)  # noqa: E731
    # integrand is even
    value, _ = scipy.integrate.quad(integrand, 0.0, a, epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * value


def mvt_bound(inp: GaussianSumInput, variant: str, samples: int = 4097) -> float:
    """
    Crude cell-wise mean-value bound (pi/T) dxi sup|f'| + dxi sup f, plus
    dxi f(0) for the plain sum, which skips xi = 0.
    """
    s, a = 2.0 * inp.d * inp.t, math.pi / inp.T
    x = np.linspace(0.0, a, samples)
    if variant == "plain":
        f = np.exp(-s * x ** 2)
        df = -2.0 * s * x * f
    else:
        f = x ** 2 * np.exp(-s * x ** 2)
        df = 2.0 * x * (1.0 - s * x ** 2) * np.exp(-s * x ** 2)
    bound = a * inp.spacing * float(np.max(np.abs(df))) + inp.spacing * float(np.max(f))
    if variant == "plain":
        bound += inp.spacing
    return bound


def uniform_bound_check(T: float, d: float, N_list: Sequence[int], t_grid: Sequence[float]) -> UniformBoundReport:
    """sup of sum_plain (1+t)^{1/2} and sum_weighted (1+t)^{3/2} over the sweep"""
    if not N_list or not len(t_grid):
        raise ValidationError("N_list and t_grid must be nonempty", field="grid")
    sup_plain = sup_weighted = 0.0
    small_time_ok = monotone_ok = True
    cells = 0
    small_time = T ** 2 / (2.0 * d * math.pi ** 2)
    cap = 2.0 * math.pi ** 3 / T ** 3
    for N in N_list:
        for t in t_grid:
            inp = GaussianSumInput(N=N, T=T, d=d, t=t)
            plain, weighted = sum_plain(inp), sum_weighted(inp)
            sup_plain = max(sup_plain, plain * math.sqrt(1.0 + t))
            sup_weighted = max(sup_weighted, weighted * (1.0 + t) ** 1.5)
            if t <= small_time and weighted > cap * (1.0 + 1e-14):
                small_time_ok = False
            if plain > integral_plain(T, d, t) * (1.0 + 1e-14):
                monotone_ok = False
            cells += 1
    logger.info(f"✅ Uniform bounds over {cells} cells: plain {sup_plain:.6g}, weighted {sup_weighted:.6g}")
    return UniformBoundReport(
        sup_plain=sup_plain,
        sup_weighted=sup_weighted,
        small_time_bound_ok=small_time_ok,
        monotone_comparison_ok=monotone_ok,
        cells=cells,
    )


def sharpness_gap(T: float, d: float, N: int, t: float, extended: bool = True) -> Tuple[SharpnessRecord, SharpnessRecord]:
    """
    Plain and weighted gaps |sum - integral|. With extended precision the
    gap is formed from the mpmath references.
    """
    inp = GaussianSumInput(N=N, T=T, d=d, t=t)
    if inp.regime_flag != APPENDIX_REGIME:
        logger.debug(f"📝 (N={N}, t={t}) lies outside N >= 2, t >= 1")
    records = []
    for variant in VARIANTS:
        hardware = lattice_sum(inp, variant)
        integral = integral_plain(T, d, t) if variant == "plain" else integral_weighted(T, d, t)
        if extended:
            ref_sum = reference_sum(inp, variant)
            gap = float(abs(ref_sum - reference_integral(T, d, t, variant)))
            ref_value = float(ref_sum)
        else:
            gap = abs(hardware - integral)
            ref_value = hardware
        if variant == "plain":
            # rescaled sum F~_N = sqrt(t) x plain sum against its integral
            rescaled_gap = math.sqrt(t) * gap
            rescaled_bound = 4.0 * math.pi * math.sqrt(t) / (N * T)
        else:
            rescaled_gap = t ** 1.5 * gap
            rescaled_bound = None
        records.append(SharpnessRecord(
            N=N,
            t=t,
            variant=variant,
            sum_value=hardware,
            reference_sum=ref_value,
            integral_value=integral,
            gap=gap,
            regime_flag=inp.regime_flag,
            rescaled_gap=rescaled_gap,
            rescaled_bound=rescaled_bound,
        ))
    return records[0], records[1]


def sharpness_table(T: float, d: float, N_list: Iterable[int], t_grid: Iterable[float],
                    extended: bool = True) -> List[SharpnessRecord]:
    """Records ordered by (N, t, variant)"""
    records: List[SharpnessRecord] = []
    for N in N_list:
        for t in t_grid:
            records.extend(sharpness_gap(T, d, N, t, extended))
    return records


def scaling_slope(records: Sequence[SharpnessRecord], t: float, variant: str) -> float:
    """
    Least-squares slope of log gap against log N at fixed t. Gaps at or below
    settings.SLOPE_GAP_FLOOR times the integral are roundoff and left out.
    """
    chosen = [
        r for r in records
        if r.t == t and r.variant == variant and r.gap > settings.SLOPE_GAP_FLOOR * abs(r.integral_value)
    ]
    if len(chosen) < 2:
        raise ValidationError("need at least two gaps above the roundoff floor for a slope", field="records")
    x = np.log([r.N for r in chosen])
    y = np.log([r.gap for r in chosen])
    return float(np.polyfit(x, y, 1)[0])


def onset_time(N: int, T: float, d: float) -> float:
    """3 N^2 T^2 / (16 d pi^2): past it, F_N is strictly decreasing"""
    return 3.0 * N ** 2 * T ** 2 / (16.0 * d * math.pi ** 2)


def rescaled_weighted(N: int, T: float, d: float, t: float) -> float:
    """F_N(t) = t^{3/2} x weighted sum"""
    return t ** 1.5 * sum_weighted(GaussianSumInput(N=N, T=T, d=d, t=t))


def crossover_diagnostics(T: float, d: float, N: int, n_times: int = 400,
                          t_max_factor: float = 20.0) -> CrossoverReport:
    """Plateau of F_N, its maximum and the decay past the onset time"""
    if N < 2:
        raise ValidationError("crossover diagnostics need N >= 2", field="N")
    t_star = onset_time(N, T, d)
    times = np.geomspace(1.0, max(t_max_factor * t_star, 10.0), n_times)
    h = 1e-5
    values, derivatives, violations = [], [], []
    for t in times:
        F = rescaled_weighted(N, T, d, t)
        dF = (rescaled_weighted(N, T, d, t * (1 + h)) - rescaled_weighted(N, T, d, t * (1 - h))) / (2 * h * t)
        bound = (1.5 - 8.0 * d * math.pi ** 2 * t / (N ** 2 * T ** 2)) * F / t
        values.append(F)
        derivatives.append(dF)
        scale = max(abs(F) / t, np.finfo(float).tiny)
        violations.append((dF - bound) / scale)
    values_a, derivatives_a = np.array(values), np.array(derivatives)
    peak = int(np.argmax(values_a))
    after = times > t_star
    decays = bool(np.all(derivatives_a[after] < 0.0)) if after.any() else True
    t_peak = float(times[peak])
    # grid resolution around the peak
    ratio = times[1] / times[0]
    return CrossoverReport(
        N=N,
        T=T,
        d=d,
        t_star=t_star,
        times=times.tolist(),
        values=values,
        derivatives=derivatives,
        t_peak=t_peak,
        peak_value=float(values_a[peak]),
        decays_after_onset=decays,
        inequality_violation=float(max(0.0, max(violations))),
        bracketed=t_peak <= t_star * ratio,
    )


def sharpness_summary(T: float, d: float, N_list: Sequence[int], t_list: Sequence[float],
                      extended: bool = True, crossover_N: Sequence[int] = ()) -> Tuple[List[SharpnessRecord],
                                                                                        SharpnessSummary]:
    """Sharpness records with their per-t scaling slopes, uniform bounds and crossover diagnostics"""
    records = sharpness_table(T, d, N_list, t_list, extended=extended)
    slopes: Dict[str, Dict[str, float]] = {}
    for variant in VARIANTS:
        slopes[variant] = {}
        for t in t_list:
            try:
                slopes[variant][repr(float(t))] = scaling_slope(records, t, variant)
            except ValidationError:
                logger.debug(f"📝 No {variant} slope at t={t}")
    digits = [min(r.agreement_digits, 99.0) for r in records]
    summary = SharpnessSummary(
        T=T,
        d=d,
        extended=extended,
        slopes=slopes,
        min_agreement_digits=min(digits) if digits else math.nan,
        uniform=uniform_bound_check(T, d, N_list, t_list),
        crossover=[crossover_diagnostics(T, d, N, n_times=120) for N in crossover_N if N >= 2],
    )
    return records, summary
