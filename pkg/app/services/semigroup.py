"""
Linear semigroup exp(A[phi] t) on NT-periodic and windowed perturbations.

Fields are two-component (v_r, v_i) FieldSamples of shape (2, n_grid). Each
Bloch slice is Galerkin-projected to modes |l| <= M and propagated by the
matrix exponential of the truncated Bloch operator.
"""

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from app.config import settings
from app.core.exceptions import (
    DegenerateFitError,
    GridMismatchError,
    IllConditionedExponentialError,
    ValidationError,
    WindowLeakError,
)
from app.models.bloch import BlochMatrix, CriticalCurve
from app.models.dynamics import (
    PART_NAMES,
    CutoffProfile,
    DecayFit,
    DecompositionReport,
    LocalizedReport,
    ModulationField,
    UniformSweep,
    UniformSweepRow,
    WhithamComparison,
    WindowBound,
)
from app.models.field import FieldSample
from app.services.blochop import BlochService, Eigensystem
from app.services.transforms import (
    bloch_T,
    cell_resolution,
    from_centered,
    inverse_bloch,
    periodic_extension,
    periodic_pairing,
    sample_field,
    window_leak,
)
from app.utils import fourier
from app.utils.parallel import ordered_map

logger = logging.getLogger(__name__)


def slice_exponential(matrix: BlochMatrix, t: float, eigensystem: Optional[Eigensystem] = None) -> np.ndarray:
    """
    exp(A_xi t) by scaling and squaring, cross-checked against the
    eigendecomposition when its eigenvector matrix is well conditioned.
    """
    if t < 0:
        raise ValidationError("t must be nonnegative", field="t")
    dim = matrix.entries.shape[0]
    if t == 0:
        return np.eye(dim, dtype=complex)
    U = scipy.linalg.expm(matrix.entries * t)
    expm_ok = bool(np.all(np.isfinite(U)))
    if eigensystem is None and not expm_ok:
        eigensystem = Eigensystem(matrix)
    if eigensystem is None:
        return U

    condition = eigensystem.condition
    if condition > settings.EIG_COND_MAX:
        if not expm_ok:
            raise IllConditionedExponentialError(matrix.xi, condition)
        return U
    V = eigensystem.exponential(t)
    if not expm_ok:
        logger.warning(f"⚠️ expm failed at xi={matrix.xi:.6g}, t={t}; using eigendecomposition")
        return V
    gap = float(np.linalg.norm(U - V, 2))
    if gap > settings.EXPM_AGREEMENT_TOL * max(1.0, float(np.linalg.norm(U, 2))):
        logger.warning(
            f"⚠️ Exponential paths disagree at xi={matrix.xi:.6g}, t={t}: {gap:.2e} (eigenvector cond {condition:.2e})"
        )
    return U


def propagate_slice(matrix: BlochMatrix, t: float, w: np.ndarray,
                    eigensystem: Optional[Eigensystem] = None) -> np.ndarray:
    """exp(A_xi t) w for a stacked coefficient vector (or columns of vectors)"""
    return slice_exponential(matrix, t, eigensystem) @ w


def decay_fit(
    times: Sequence[float],
    norms: Sequence[float],
    model: str = "power",
    window: Optional[Tuple[float, float]] = None,
    min_decades: Optional[float] = None,
) -> DecayFit:
    """
    Fit log||.|| against log(1 + t) (power) or t (exponential).

    Returns the decay exponent (power) or rate (exponential) as a positive
    number for decaying data.
    """
    if model not in ("power", "exponential"):
        raise ValidationError(f"unknown decay model '{model}'", field="model")
    min_decades = settings.FIT_MIN_DECADES if min_decades is None else min_decades
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if window is not None:
        mask = (times >= window[0]) & (times <= window[1])
        times, norms = times[mask], norms[mask]
    if len(times) < 8:
        raise DegenerateFitError(f"need at least 8 samples in the fit window, have {len(times)}")
    if np.any(norms <= 0) or not np.all(np.isfinite(norms)):
        raise DegenerateFitError("norms must be positive and finite")
    span = math.log10(norms.max() / norms.min())
    if span < min_decades:
        raise DegenerateFitError(f"norms span {span:.2f} decades, need {min_decades}")

    x = np.log1p(times) if model == "power" else times
    y = np.log(norms)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - float(np.sum((y - fitted) ** 2)) / total if total > 0 else 1.0
    return DecayFit(
        times=times,
        norms=norms,
        model=model,
        fitted_exponent=float(-slope),
        prefactor=float(math.exp(intercept)),
        fit_window=(float(times[0]), float(times[-1])),
        r_squared=r_squared,
    )


def fit_window(N: int, T: float, d: float, t_min: Optional[float] = None,
               factor: Optional[float] = None) -> Tuple[float, float]:
    """[t_min, c N^2 T^2 / (4 pi^2 d)]: power-law range before the fixed-N exponential regime"""
    t_min = settings.FIT_T_MIN if t_min is None else t_min
    factor = settings.FIT_WINDOW_FACTOR if factor is None else factor
    return t_min, factor * crossover_time(N, T, d)


def crossover_time(N: int, T: float, d: float) -> float:
    """1 / (d dxi^2) with dxi = 2 pi / (NT)"""
    if d <= 0:
        raise ValidationError("d must be positive", field="d")
    return N ** 2 * T ** 2 / (4.0 * math.pi ** 2 * d)


def _synthesize(xi: np.ndarray, multipliers: np.ndarray, length: float, x: np.ndarray) -> np.ndarray:
    return (np.exp(1j * np.outer(x, xi)) @ multipliers) / length


def heat_solution(a: float, d: float, xi: np.ndarray, amplitudes: np.ndarray, length: float,
                  t: float, x: np.ndarray) -> np.ndarray:
    """w(x, t) for w_t = a w_x + d w_xx with w(x, 0) = (1/L) sum amplitude exp(i xi x)"""
    return _synthesize(xi, amplitudes * np.exp((1j * a * xi - d * xi ** 2) * t), length, x)


def whitham_times(d: float, xi1: float, count: Optional[int] = None) -> np.ndarray:
    """
    Geometric grid from WHITHAM_ONSET / (d xi1^2), where exp(-d xi^2 t) has
    left the cutoff transition, over WHITHAM_DECADES decades.
    """
    if d <= 0 or xi1 <= 0:
        raise ValidationError("d and xi1 must be positive", field="d, xi1")
    onset = settings.WHITHAM_ONSET / (d * xi1 ** 2)
    return np.geomspace(onset, onset * 10.0 ** settings.WHITHAM_DECADES, count or settings.WHITHAM_TIMES)


def whitham_window(T: float, d: float, t_end: float) -> int:
    """Smallest window N whose power-law range c N^2 T^2 / (4 pi^2 d) reaches t_end"""
    unit = settings.FIT_WINDOW_FACTOR * crossover_time(1, T, d)
    return max(4, math.ceil(math.sqrt(t_end / unit)))


def whitham_compare(curve: CriticalCurve, initial: ModulationField, t_grid: Sequence[float]) -> WhithamComparison:
    """
    ||gamma(., t) - w(., t)||_{L^2(0, NT)} where w = heat_solution from
    gamma(., 0). Both are sampled on a grid fine enough that the discrete
    norm is exact for the band-limited difference.
    """
    if curve.d <= 0:
        raise ValidationError("diffusion coefficient d must be positive", field="d")
    t_grid = np.asarray(t_grid, dtype=float)
    length = initial.N * initial.T
    xi, amps, rates = initial.xi, initial.amplitudes, initial.rates
    top = int(math.ceil(float(np.max(np.abs(xi), initial=0.0)) * length / (2.0 * math.pi)))
    n = 4 * (top + 1)
    x = np.arange(n) * length / n
    errors = []
    for t in t_grid:
        gamma = _synthesize(xi, amps * np.exp(rates * t), length, x)
        w = heat_solution(curve.a, curve.d, xi, amps, length, float(t), x)
        errors.append(math.sqrt(length / n * float(np.sum(np.abs(gamma - w) ** 2))))
    errors = np.array(errors)

    fit = None
    positive = (errors > 0) & (t_grid >= settings.FIT_T_MIN)
    try:
        fit = decay_fit(t_grid[positive], errors[positive], "power")
    except DegenerateFitError as e:
        logger.warning(f"⚠️ No Whitham decay fit: {e.message}")
    return WhithamComparison(times=t_grid, errors=errors, a=curve.a, d=curve.d, fit=fit)


def whitham_multiplier_gap(curve: CriticalCurve, cutoff: CutoffProfile, t_grid: Sequence[float]) -> float:
    """max over samples of |exp(lambda_c t) - exp((i a xi - d xi^2) t)| / (|xi|^3 t) on the cutoff support"""
    worst = 0.0
    for xi, lam in zip(curve.xi_samples, curve.lambda_c):
        if xi == 0.0 or cutoff(xi) == 0.0:
            continue
        for t in t_grid:
            if t <= 0:
                continue
            gap = abs(np.exp(lam * t) - np.exp((1j * curve.a * xi - curve.d * xi ** 2) * t))
            worst = max(worst, gap / (abs(xi) ** 3 * t))
    return worst


def difference_quotient_bound(curve: CriticalCurve, cutoff: CutoffProfile,
                              xi_grid: Optional[Sequence[float]] = None, n_points: int = 64) -> float:
    """sup over xi and x of |rho(xi) (Phi_xi - phi')(x) / (i xi)|"""
    if xi_grid is None:
        xi_grid = curve.xi_samples
    x = np.arange(n_points) * curve.T / n_points
    n = 2 * curve.M + 1
    worst = 0.0
    for xi in xi_grid:
        weight = cutoff(xi)
        if xi == 0.0 or weight == 0.0:
            continue
        _, phi, _ = curve.at(float(xi))
        diff = (phi - curve.phi_prime).reshape(2, n)
        values = fourier.evaluate_series(diff, curve.T, x)
        pointwise = np.sqrt(np.sum(np.abs(values) ** 2, axis=0))
        worst = max(worst, weight * float(np.max(pointwise)) / abs(xi))
    return worst


class SubharmonicDecomposition:
    """
    Per-slice data of one perturbation f: Galerkin coefficients, cutoff
    weights and critical eigen-triples. Parts at any t follow from one
    exponential per slice and reassemble exp(A t) f exactly.
    """

    def __init__(self, service: "SemigroupService", curve: CriticalCurve, cutoff: CutoffProfile, f: FieldSample):
        if curve.M != service.M:
            raise ValidationError(f"curve truncation M={curve.M} differs from M={service.M}", field="curve")
        if cutoff.xi1 > curve.xi1 * (1.0 + 1e-12) or cutoff.xi1 > float(np.max(curve.xi_samples)) * (1.0 + 1e-12):
            raise ValidationError(f"cutoff xi1={cutoff.xi1} exceeds the critical curve range", field="cutoff")
        self.service = service
        self.curve = curve
        self.f = f
        self.lattice, self.g = service.slices(f)
        self.weights = np.asarray(cutoff(self.lattice.frequencies), dtype=float)
        self.real = f.is_real

        T = service.T
        phi_prime = service.bloch.phi_prime
        dim = len(phi_prime)
        self.phi_prime = phi_prime
        self.tilde0 = service.kernel_adjoint(curve)
        self.lam = np.zeros(self.lattice.N, dtype=complex)
        self.phi = np.zeros((self.lattice.N, dim), dtype=complex)
        self.coef = np.zeros(self.lattice.N, dtype=complex)
        for i, frac in enumerate(self.lattice.fractions):
            if self.weights[i] == 0.0:
                continue
            if frac == 0:
                lam, phi, tilde = 0j, phi_prime, self.tilde0
            else:
                lam, phi, tilde = service.bloch.critical_pair(service.bloch.lattice_eigensystem(frac), curve)
            self.lam[i] = lam
            self.phi[i] = phi
            self.coef[i] = T * np.vdot(tilde, self.g[i])

    def coefficients(self, t: float) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        """Full evolution and the five parts as per-slice stacked coefficients"""
        full = self.service.propagate(self.lattice, self.g, t)
        critical = (self.coef * np.exp(self.lam * t))[:, None]
        rho = self.weights[:, None]
        nonzero = np.array([frac != 0 for frac in self.lattice.fractions])[:, None]

        parts = {
            "p0_part": np.where(nonzero, 0.0, critical * self.phi_prime[None, :]),
            "phase_part": np.where(nonzero, rho * critical * self.phi_prime[None, :], 0.0),
            "sc_tilde": np.where(nonzero, rho * critical * (self.phi - self.phi_prime[None, :]), 0.0),
            "slf_tilde": rho * (full - critical * self.phi),
            "shf": (1.0 - rho) * full,
        }
        return full, parts

    def report(self, t: float) -> DecompositionReport:
        full_c, parts_c = self.coefficients(t)
        full = self.service.to_field(self.lattice, full_c, self.f.n_cell)
        parts = {name: self.service.to_field(self.lattice, parts_c[name], self.f.n_cell) for name in PART_NAMES}
        imag = 0.0
        if self.real:
            imag = float(np.max(np.abs(full.values.imag))) if full.values.size else 0.0
            full = full.real_part()
            parts = {name: part.real_part() for name, part in parts.items()}
        total = sum(part.values for part in parts.values())
        closure = full.with_values(total - full.values).norm()
        return DecompositionReport(
            N=self.lattice.N,
            t=float(t),
            full=full,
            parts=parts,
            norms={name: part.norm() for name, part in parts.items()},
            closure_residual=closure,
            imag_residue=imag,
        )

    def modulation(self, t: float) -> ModulationField:
        """gamma_N(., t) = (1/N) <Phi~_0, f>_{L^2_N} + s_{p,N}(t) f"""
        N, T = self.lattice.N, self.service.T
        active = self.weights > 0.0
        xi = self.lattice.frequencies[active]
        amplitudes = (self.weights * self.coef)[active]
        rates = self.lam[active]
        x = self.f.grid
        values = (np.exp(1j * np.outer(x, xi)) @ (amplitudes * np.exp(rates * t))) / (N * T)
        asymptotic = self.coef[self.lattice.zero_position] / (N * T)
        imag = 0.0
        if self.real:
            imag = float(np.max(np.abs(values.imag))) if values.size else 0.0
            values = values.real.astype(complex)
            asymptotic = asymptotic.real
        gamma = FieldSample(N=N, T=T, n_grid=self.f.n_grid, values=values)
        return ModulationField(
            N=N, t=float(t), T=T, gamma=gamma, asymptotic_phase=float(np.real(asymptotic)),
            xi=xi, amplitudes=amplitudes, rates=rates, imag_residue=imag,
        )


class SemigroupService:
    """Evolution and decompositions for one wave and truncation"""

    def __init__(self, bloch: BlochService, n_cell: Optional[int] = None):
        self.bloch = bloch
        self.wave = bloch.wave
        self.T = bloch.wave.T
        self.M = bloch.M
        self.n_cell = n_cell or cell_resolution(self.M)
        if 2 * self.M + 1 > self.n_cell:
            raise ValidationError(f"n_cell={self.n_cell} cannot hold modes |l| <= {self.M}", field="n_cell")

    # Fields

    def field(self, fn: Callable[[np.ndarray], np.ndarray], N: int) -> FieldSample:
        return sample_field(fn, N, self.T, self.n_cell)

    def kernel_field(self, N: int) -> FieldSample:
        """phi' extended NT-periodically"""
        coeffs = self.bloch.phi_prime.reshape(2, 2 * self.M + 1)
        return periodic_extension(coeffs, N, self.T, self.n_cell).real_part()

    def bump(self, N: int, width: float = 1.0, weights: Tuple[float, float] = (1.0, 0.0),
             center: Optional[float] = None) -> FieldSample:
        """Periodized Gaussian bump, normalized in L^1 + L^2"""
        length = N * self.T
        center = (N // 2) * self.T + self.T / 2.0 if center is None else center

        def profile(x):
            shape = sum(np.exp(-((x - center + p * length) ** 2) / (2.0 * width ** 2)) for p in range(-2, 3))
            return np.stack([weights[0] * shape, weights[1] * shape])

        f = self.field(profile, N)
        scale = f.l1_norm() + f.norm()
        return f.with_values(f.values / scale)

    def bump_family(self, width: float = 1.0, seed: Optional[int] = None) -> Callable[[int], FieldSample]:
        """One bump per NT window with seeded (v_r, v_i) weights shared across N"""
        rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
        weights = tuple(float(w) for w in rng.standard_normal(2))
        return lambda N: self.bump(N, width=width, weights=weights)

    # Slices

    def slices(self, f: FieldSample):
        if f.T != self.T:
            raise GridMismatchError(f"field period {f.T} differs from wave period {self.T}")
        if f.values.shape[:-1] != (2,):
            raise ValidationError("perturbations must have two components (v_r, v_i)", field="f")
        coeffs = bloch_T(f)
        if 2 * self.M + 1 > coeffs.n_cell:
            raise GridMismatchError(f"cell resolution {coeffs.n_cell} cannot hold modes |l| <= {self.M}")
        g = coeffs.centered(self.M).reshape(f.N, -1)
        return coeffs.lattice, g

    def to_field(self, lattice, stacked: np.ndarray, n_cell: int) -> FieldSample:
        centered = stacked.reshape(lattice.N, 2, 2 * self.M + 1)
        return inverse_bloch(from_centered(lattice, centered, n_cell))

    def exponential(self, fraction: Fraction, t: float) -> np.ndarray:
        es = self.bloch.lattice_eigensystem(fraction)
        return slice_exponential(es.matrix, t, es)

    def propagate(self, lattice, g: np.ndarray, t: float) -> np.ndarray:
        """exp(A_xi t) applied slice by slice, ordered by lattice index"""
        fractions = lattice.fractions

        def run(i: int) -> np.ndarray:
            return self.exponential(fractions[i], t) @ g[i]

        return np.array(ordered_map(run, range(lattice.N), self.bloch.max_workers))

    def evolve(self, f: FieldSample, t: float) -> FieldSample:
        """exp(A t) f through B_T, per-slice exponentials and the inverse transform"""
        lattice, g = self.slices(f)
        out = self.to_field(lattice, self.propagate(lattice, g, t), f.n_cell)
        return out.real_part() if f.is_real else out

    # Projections and decompositions

    def kernel_adjoint(self, curve: CriticalCurve) -> np.ndarray:
        """Phi~_0 rescaled so <Phi~_0, phi'>_{L^2(0,T)} = 1"""
        idx = np.flatnonzero(curve.xi_samples == 0.0)
        if idx.size == 0:
            raise ValidationError("critical curve has no xi = 0 sample", field="curve")
        tilde = curve.phi_tilde_xi[idx[0]]
        pairing = self.T * np.vdot(tilde, self.bloch.phi_prime)
        return tilde / np.conj(pairing)

    def project_P0N(self, curve: CriticalCurve, f: FieldSample) -> FieldSample:
        """P_{0,N} f = (1/N) <Phi~_0, f>_{L^2_N} phi'"""
        tilde = self.kernel_adjoint(curve).reshape(2, 2 * self.M + 1)
        c = periodic_pairing(tilde, f) / f.N
        kernel = periodic_extension(self.bloch.phi_prime.reshape(2, -1), f.N, self.T, f.n_cell).real_part()
        if f.is_real:
            c = c.real
        return kernel.with_values(c * kernel.values)

    def decomposition(self, curve: CriticalCurve, cutoff: CutoffProfile, f: FieldSample) -> SubharmonicDecomposition:
        return SubharmonicDecomposition(self, curve, cutoff, f)

    def decompose(self, curve: CriticalCurve, cutoff: CutoffProfile, f: FieldSample, t: float) -> DecompositionReport:
        report = self.decomposition(curve, cutoff, f).report(t)
        if report.closure_residual > 1e-8 * max(f.norm(), np.finfo(float).tiny):
            logger.warning(f"⚠️ Decomposition closure residual {report.closure_residual:.2e} at t={t}")
        return report

    def modulation_gamma(self, curve: CriticalCurve, cutoff: CutoffProfile, f: FieldSample, t: float) -> ModulationField:
        return self.decomposition(curve, cutoff, f).modulation(t)

    # Sweeps

    def uniform_sweep(
        self,
        curve: CriticalCurve,
        cutoff: CutoffProfile,
        f_family: Callable[[int], FieldSample],
        N_list: Sequence[int],
        t_grid: Sequence[float],
        delta_table: Optional[Dict[int, float]] = None,
    ) -> UniformSweep:
        """
        Per-N prefactors sup_t (1+t)^{1/4} ||(1 - P_{0,N}) exp(A t) f|| / ||f||_{L^1 cap L^2}
        and rates. The diffusive rate of a row is min(eta_N, d dxi^2) with eta_N
        scanned over Omega_N itself.
        """
        t_grid = np.asarray(sorted(t_grid), dtype=float)
        etas: List[float] = []
        delta_table = dict(delta_table or {})
        missing = [N for N in N_list if N not in delta_table]
        if missing:
            delta_table.update(self.bloch.delta_N_table(missing))
        rows: List[UniformSweepRow] = []
        decay_rows: List[Tuple] = []
        for N in N_list:
            logger.info(f"🔄 Uniform sweep N={N}")
            f = f_family(N)
            scale = f.l1_norm() + f.norm()
            split = self.decomposition(curve, cutoff, f)
            reports = [split.report(t) for t in t_grid]
            decay_rows.extend(r.csv_row() for r in reports)
            minus_p0 = np.array([r.norm_minus_p0 for r in reports]) / scale
            residual = np.array([r.residual_norm for r in reports])
            prefactor = float(np.max((1.0 + t_grid) ** 0.25 * minus_p0))

            window = fit_window(N, self.T, curve.d)
            residual_exponent = None
            try:
                residual_exponent = decay_fit(
                    t_grid, residual, "power", window=window, min_decades=settings.SLOW_FIT_MIN_DECADES
                ).fitted_exponent
            except DegenerateFitError:
                pass
            late_rate = None
            # beyond the crossover, above the roundoff floor
            late = (t_grid >= crossover_time(N, self.T, curve.d)) & (minus_p0 > 1e-11 * minus_p0.max())
            try:
                late_rate = decay_fit(t_grid[late], minus_p0[late] * scale, "exponential").fitted_exponent
            except DegenerateFitError:
                pass
            spacing = 2.0 * math.pi / (N * self.T)
            eta = self.bloch.off_critical_rate(curve, cutoff, N=N)
            etas.append(eta)
            rows.append(UniformSweepRow(
                N=N,
                prefactor=prefactor,
                late_rate=late_rate,
                delta_N=float(delta_table[N]),
                diffusive_rate=min(eta, curve.d * spacing ** 2) if N > 1 else float(delta_table[N]),
                residual_exponent=residual_exponent,
                fit_window=window,
            ))
        return UniformSweep(rows=rows, decay_rows=decay_rows, eta=float(min(etas)) if etas else math.inf)

    # Localized surrogate

    def localized_pipeline(
        self,
        curve: CriticalCurve,
        cutoff: CutoffProfile,
        v: FieldSample,
        t_grid: Sequence[float],
        strict: bool = False,
    ) -> LocalizedReport:
        """
        The decomposition on the window lattice Omega_{N_win}; times after the
        first window leak are dropped (strict: raise instead).
        """
        if len(t_grid) < 2:
            raise ValidationError("localized runs need at least two times", field="t_grid")
        leak = window_leak(v)
        if leak > settings.LEAK_TOL:
            raise WindowLeakError(leak)
        split = self.decomposition(curve, cutoff, v)
        times, minus_kernel, phase, residual, closure, leaks = [], [], [], [], [], []
        leak_free_until = math.inf
        for t in sorted(t_grid):
            report = split.report(t)
            leak = window_leak(report.full)
            if leak > settings.LEAK_TOL:
                if strict:
                    raise WindowLeakError(leak, t)
                logger.warning(f"⚠️ Window leak {leak:.2e} at t={t}; stopping the localized run")
                leak_free_until = float(t)
                break
            times.append(float(t))
            minus_kernel.append(report.norm_minus_p0)
            phase.append(report.norms["phase_part"])
            residual.append(report.residual_norm)
            closure.append(report.closure_residual)
            leaks.append(leak)
        if len(times) < 2:
            raise WindowLeakError(leak, leak_free_until)

        times_a = np.array(times)
        kernel_fit = residual_fit = None
        for label, series in (("kernel", minus_kernel), ("residual", residual)):
            try:
                fit = decay_fit(times_a, series, "power", window=(settings.FIT_T_MIN, math.inf),
                                min_decades=settings.SLOW_FIT_MIN_DECADES)
            except DegenerateFitError as e:
                logger.warning(f"⚠️ No {label} fit on the window: {e.message}")
                continue
            if label == "kernel":
                kernel_fit = fit
            else:
                residual_fit = fit
        return LocalizedReport(
            n_window=v.N,
            times=times_a,
            norm_minus_kernel=np.array(minus_kernel),
            norm_phase=np.array(phase),
            norm_residual=np.array(residual),
            closure_residuals=np.array(closure),
            leaks=np.array(leaks),
            leak_free_until=leak_free_until,
            kernel_fit=kernel_fit,
            residual_fit=residual_fit,
        )

    def whitham_run(
        self,
        curve: CriticalCurve,
        cutoff: CutoffProfile,
        width: float = 2.0,
        weights: Tuple[float, float] = (1.0, 0.0),
        t_grid: Optional[Sequence[float]] = None,
        n_window: Optional[int] = None,
    ) -> WhithamComparison:
        """
        Modulation of a windowed bump against the advection-diffusion flow of
        its own initial modulation. The default times start after the cutoff
        transition has decayed and the default window keeps them inside the
        power-law range.
        """
        t_grid = whitham_times(curve.d, cutoff.xi1) if t_grid is None else np.asarray(sorted(t_grid), dtype=float)
        if n_window is None:
            n_window = whitham_window(self.T, curve.d, float(t_grid[-1]))
        logger.info(f"🔄 Whitham comparison on a {n_window}-cell window, t in [{t_grid[0]:.4g}, {t_grid[-1]:.4g}]")
        v = self.bump(n_window, width=width, weights=weights, center=(n_window // 2) * self.T)
        initial = self.decomposition(curve, cutoff, v).modulation(0.0)
        return whitham_compare(curve, initial, t_grid)

    def window_bound(self, curve: CriticalCurve, cutoff: CutoffProfile, windows: Sequence[int] = (32, 64, 128),
                     width: float = 1.0) -> WindowBound:
        """
        rho(xi) |<Phi~_xi, v(xi, .)>| / ||v||_{L^1} over the lattice of each
        window, against T sup_xi ||Phi~_xi||_inf.
        """
        constants = []
        sup_tilde = 0.0
        x = np.arange(self.n_cell) * self.T / self.n_cell
        n = 2 * self.M + 1
        for n_window in windows:
            v = self.bump(n_window, width=width, center=(n_window // 2) * self.T)
            split = self.decomposition(curve, cutoff, v)
            worst = 0.0
            for i, frac in enumerate(split.lattice.fractions):
                if split.weights[i] == 0.0:
                    continue
                if frac == 0:
                    tilde = split.tilde0
                else:
                    _, _, tilde = self.bloch.critical_pair(self.bloch.lattice_eigensystem(frac), curve)
                values = fourier.evaluate_series(tilde.reshape(2, n), self.T, x)
                sup_tilde = max(sup_tilde, float(np.max(np.sqrt(np.sum(np.abs(values) ** 2, axis=0)))))
                worst = max(worst, split.weights[i] * abs(split.coef[i]))
            constants.append(worst / v.l1_norm())
        return WindowBound(windows=list(windows), constants=constants, bound=self.T * sup_tilde)
