"""
Bloch operators A_xi[phi] = -I + J L_xi[phi]: assembly, spectra, the
diffusive spectral stability verdict, the critical curve and resolvent scans.

Vectors are stacked (w_r, w_i) Fourier coefficients on modes -M..M; the
L^2(0,T) pairing of two such vectors is T * vdot(f, g).
"""

import logging
import math
import threading
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from app.config import settings
from app.core.exceptions import (
    BranchCrossingError,
    EigensolverFailure,
    SingularShiftError,
    TruncationTooSmallError,
    ValidationError,
)
from app.models.bloch import BlochMatrix, CriticalCurve, SpectralSlice, StabilityVerdict
from app.models.wave import LleParams, PeriodicWave
from app.services.transforms import lattice
from app.utils import fourier
from app.utils.parallel import ordered_map

logger = logging.getLogger(__name__)


def assemble_operator(params: LleParams, T: float, coeffs: np.ndarray, xi: float, M: int) -> np.ndarray:
    """Dense -I + J L_xi for the profile with centered coefficients coeffs"""
    a_r, a_i = fourier.split_components(coeffs)
    rr = fourier.dealiased_product([a_r, a_r], keep=2 * M)
    ii = fourier.dealiased_product([a_i, a_i], keep=2 * M)
    ri = fourier.dealiased_product([a_r, a_i], keep=2 * M)
    m11 = fourier.toeplitz_operator(3.0 * rr + ii, M)
    m22 = fourier.toeplitz_operator(rr + 3.0 * ii, M)
    m12 = fourier.toeplitz_operator(2.0 * ri, M)

    n = 2 * M + 1
    q = fourier.wavenumbers(M, T, xi)
    # -beta (d/dx + i xi)^2 acts as beta (q + xi)^2 on each mode
    diag = np.diag(params.beta * q ** 2 - params.alpha).astype(complex)
    L11 = diag + m11
    L22 = diag + m22
    identity = np.eye(n)
    A = np.empty((2 * n, 2 * n), dtype=complex)
    # J L = [[-L21, -L22], [L11, L12]]
    A[:n, :n] = -identity - m12
    A[:n, n:] = -L22
    A[n:, :n] = L11
    A[n:, n:] = -identity + m12
    return A


def assemble(wave: PeriodicWave, xi: float, M: Optional[int] = None) -> BlochMatrix:
    """Galerkin truncation of the Bloch operator at frequency xi"""
    M = M or wave.M
    if M < wave.M:
        raise TruncationTooSmallError(M, wave.M)
    half = math.pi / wave.T
    if not -half - 1e-12 <= xi < half + 1e-12:
        raise ValidationError(f"xi={xi} outside [-pi/T, pi/T)", field="xi")
    entries = assemble_operator(wave.params, wave.T, wave.coeffs, xi, M)
    return BlochMatrix(xi=xi, M=M, T=wave.T, entries=entries)


def sort_order(eigenvalues: np.ndarray) -> np.ndarray:
    """Descending real part, ties by ascending imaginary part"""
    return np.lexsort((eigenvalues.imag, -np.round(eigenvalues.real, 12)))


class Eigensystem:
    """Sorted eigenvalues with paired right and left eigenvectors of one matrix"""

    def __init__(self, matrix: BlochMatrix):
        self.matrix = matrix
        try:
            values, left, right = scipy.linalg.eig(matrix.entries, left=True, right=True)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise EigensolverFailure(matrix.xi, str(e))
        if not np.all(np.isfinite(values)):
            raise EigensolverFailure(matrix.xi, "non-finite eigenvalues")
        order = sort_order(values)
        self.values = values[order]
        self.right = right[:, order]
        self.left = left[:, order]
        self._inverse = None
        self._condition = None

    @property
    def xi(self) -> float:
        return self.matrix.xi

    @property
    def condition(self) -> float:
        """2-norm condition number of the eigenvector matrix"""
        if self._condition is None:
            self._condition = float(np.linalg.cond(self.right))
        return self._condition

    @property
    def inverse(self) -> np.ndarray:
        if self._inverse is None:
            self._inverse = scipy.linalg.inv(self.right)
        return self._inverse

    def zero_index(self) -> int:
        return int(np.argmin(np.abs(self.values)))

    def exponential(self, t: float) -> np.ndarray:
        """exp(A t) = V diag(exp(lambda t)) V^{-1}"""
        return (self.right * np.exp(self.values * t)[None, :]) @ self.inverse

    def slice(self, zero_mode: bool = False) -> SpectralSlice:
        values = self.values
        residual = float(np.min(np.abs(values))) if zero_mode else float("nan")
        if zero_mode:
            rest = np.delete(values, self.zero_index())
            max_re = float(np.max(rest.real)) if rest.size else -math.inf
        else:
            max_re = float(np.max(values.real))
        return SpectralSlice(
            xi=self.xi, eigenvalues=values, max_real_part=max_re, zero_mode_residual=residual,
        )


def spectrum(matrix: BlochMatrix, wave: Optional[PeriodicWave] = None) -> SpectralSlice:
    """
    Full dense eigensolve, sorted.

    With the wave supplied, the slice also records whether the window
    eigenvalues survive doubling M.
    """
    result = Eigensystem(matrix).slice(zero_mode=matrix.xi == 0.0)
    if wave is None:
        return result
    converged, moved = truncation_check(wave, matrix.xi, matrix.M)
    if not converged:
        logger.warning(f"⚠️ Eigenvalues at xi={matrix.xi:.6g} moved {moved:.2e} under M-doubling")
    return result.model_copy(update={"truncation_converged": converged})


def default_xi_grid(T: float, n_points: Optional[int] = None, refine: Optional[int] = None) -> np.ndarray:
    """Symmetric grid in [-pi/T, pi/T) containing 0, refined near 0"""
    n = n_points or settings.XI_GRID_POINTS
    refine = refine or settings.XI_REFINE_FACTOR
    h = 2.0 * math.pi / (n * T)
    base = (np.arange(n) - n // 2) * h
    base = base[base >= -math.pi / T]
    fine = np.arange(-2 * refine, 2 * refine + 1) * (h / refine)
    grid = np.unique(np.concatenate([base, fine]))
    grid[np.abs(grid) < 1e-15] = 0.0
    return np.unique(grid)


def truncation_check(wave: PeriodicWave, xi: float, M: int, window_re: Optional[float] = None,
                     tol: Optional[float] = None) -> Tuple[bool, float]:
    """Largest move of eigenvalues in the window Re > window_re, |lambda| <= (pi M / T)^2, when M doubles"""
    window_re = settings.TRUNCATION_WINDOW_RE if window_re is None else window_re
    tol = settings.TRUNCATION_TOL if tol is None else tol
    coarse = Eigensystem(assemble(wave, xi, M)).values
    fine = Eigensystem(assemble(wave, xi, 2 * M)).values
    radius = (math.pi * M / wave.T) ** 2
    window = coarse[(coarse.real > window_re) & (np.abs(coarse) <= radius)]
    if window.size == 0:
        return True, 0.0
    moves = np.min(np.abs(window[:, None] - fine[None, :]), axis=1)
    worst = float(np.max(moves))
    return worst < tol, worst


def resolvent_scan(matrix: BlochMatrix, mu_grid: Iterable[float], shift: float = 0.0,
                   strict: bool = False) -> np.ndarray:
    """
    ||((shift + i mu) - A_xi)^{-1}|| = 1 / sigma_min along a vertical line.

    Points on the spectrum give inf, or SingularShiftError when strict.
    """
    A = matrix.entries
    n = A.shape[0]
    scale = max(1.0, float(scipy.linalg.svdvals(A)[0]))
    norms = []
    for mu in mu_grid:
        sigma_min = float(scipy.linalg.svdvals((shift + 1j * mu) * np.eye(n) - A)[-1])
        if sigma_min <= settings.SINGULAR_SHIFT_TOL * scale:
            if strict:
                raise SingularShiftError(mu, sigma_min)
            logger.warning(f"⚠️ Resolvent singular at xi={matrix.xi:.6g}, mu={mu:.6g}")
            norms.append(math.inf)
        else:
            norms.append(1.0 / sigma_min)
    return np.array(norms)


def semigroup_norms(matrix: BlochMatrix, t_grid: Sequence[float],
                    projection: Optional[np.ndarray] = None) -> np.ndarray:
    """Empirical ||exp(A_xi t)||, or ||exp(A_xi t)(I - P)|| for a projection P"""
    A = matrix.entries
    complement = None if projection is None else np.eye(A.shape[0]) - projection
    norms = []
    for t in t_grid:
        U = scipy.linalg.expm(A * t)
        if complement is not None:
            U = U @ complement
        norms.append(float(np.linalg.norm(U, 2)))
    return np.array(norms)


def spectral_projection(curve: CriticalCurve, xi: float, g: np.ndarray) -> np.ndarray:
    """Pi(xi) g = <Phi~_xi, g> Phi_xi; eigenvectors are interpolated between samples"""
    g = np.asarray(g, dtype=complex)
    if g.shape != curve.phi_prime.shape:
        raise ValidationError(f"g has shape {g.shape}, expected {curve.phi_prime.shape}", field="g")
    try:
        _, phi, tilde = curve.at(float(xi))
    except ValueError as e:
        raise ValidationError(str(e), field="xi")
    return curve.T * np.vdot(tilde, g) * phi


class BlochService:
    """Spectral analysis of one periodic wave"""

    def __init__(self, wave: PeriodicWave, M: Optional[int] = None, max_workers: Optional[int] = None):
        self.wave = wave
        self.M = M or wave.M
        if self.M < wave.M:
            raise TruncationTooSmallError(self.M, wave.M)
        self.max_workers = max_workers or settings.MAX_WORKERS
        self._cache: Dict[object, Eigensystem] = {}
        self._lock = threading.Lock()
        self.phi_prime = wave.derivative_vector(self.M)

    # Eigensystems

    def eigensystem(self, xi: float, key: Optional[object] = None) -> Eigensystem:
        """Cached eigensystem; lattice frequencies are keyed by the exact fraction j/N"""
        key = float(xi) if key is None else key
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        es = Eigensystem(assemble(self.wave, float(xi), self.M))
        with self._lock:
            self._cache.setdefault(key, es)
            return self._cache[key]

    def lattice_eigensystem(self, fraction: Fraction) -> Eigensystem:
        xi = 2.0 * math.pi * fraction.numerator / (fraction.denominator * self.wave.T)
        return self.eigensystem(xi, key=fraction)

    def eigensystems(self, xis: Sequence[float]) -> List[Eigensystem]:
        return ordered_map(self.eigensystem, list(xis), self.max_workers)

    def pairing(self, f: np.ndarray, g: np.ndarray) -> complex:
        """<f, g> in L^2(0, T)"""
        return complex(self.wave.T * np.vdot(f, g))

    def kernel_residual(self) -> float:
        """||A_0 phi'|| / ||phi'||"""
        A0 = assemble(self.wave, 0.0, self.M).entries
        norm = np.linalg.norm(self.phi_prime)
        if norm == 0.0:
            return math.inf
        return float(np.linalg.norm(A0 @ self.phi_prime) / norm)

    def alignment(self, v: np.ndarray) -> float:
        """Sine of the angle between v and phi'"""
        p = self.phi_prime
        pp = np.vdot(p, p).real
        if pp == 0.0 or np.linalg.norm(v) == 0.0:
            return 1.0
        perp = v - (np.vdot(p, v) / pp) * p
        return float(np.linalg.norm(perp) / np.linalg.norm(v))

    # Verdict

    def check_diffusive_stability(
        self,
        xi_grid: Optional[Sequence[float]] = None,
        N_list: Optional[Sequence[int]] = None,
        check_truncation: bool = True,
    ) -> StabilityVerdict:
        """Conditions (i)-(iii) of diffusive spectral stability on a xi grid"""
        T = self.wave.T
        grid = np.asarray(default_xi_grid(T) if xi_grid is None else sorted(xi_grid), dtype=float)
        if not np.any(grid == 0.0):
            raise ValidationError("xi grid must contain 0", field="xi_grid")
        N_list = list(settings.DEFAULT_N_LIST if N_list is None else N_list)
        logger.info(f"🚀 Stability scan: {len(grid)} frequencies, M={self.M}, N={N_list}")

        systems = self.eigensystems(grid)
        by_xi = {float(es.xi): es for es in systems}
        zero = by_xi[0.0]
        z = zero.zero_index()
        zero_residual = float(abs(zero.values[z]))
        rest0 = np.delete(zero.values, z)
        n_near_zero = int(np.sum(np.abs(zero.values) <= settings.ZERO_EIG_TOL))

        offending: List[float] = []
        theta = math.inf
        max_real = -math.inf
        for es in systems:
            if es.xi == 0.0:
                top = float(np.max(rest0.real))
            else:
                top = float(np.max(es.values.real))
                theta = min(theta, -top / es.xi ** 2)
            max_real = max(max_real, top)
            if top >= 0.0:
                offending.append(float(es.xi))
        condition_i = not offending and zero_residual <= settings.ZERO_EIG_TOL
        theta = max(0.0, theta if math.isfinite(theta) else 0.0)
        condition_ii = condition_i and theta > 0.0

        # simple zero eigenvalue with eigenvector phi'
        secondary_gap = float(-np.max(rest0.real)) if rest0.size else math.inf
        separation = float(np.min(np.abs(rest0))) if rest0.size else math.inf
        right = zero.right[:, z]
        left = zero.left[:, z]
        simplicity = abs(np.vdot(left, right)) / (np.linalg.norm(left) * np.linalg.norm(right))
        alignment = self.alignment(right)
        condition_iii = (
            n_near_zero == 1
            and separation > 10.0 * settings.ZERO_EIG_TOL
            and simplicity > 1e-8
            and alignment < settings.ALIGNMENT_TOL
        )

        delta_table = self.delta_N_table(N_list)
        xi1, delta1 = self._inner_radius(systems, secondary_gap)
        xi0 = xi1 / 2.0
        outer = [float(np.max(es.values.real)) for es in systems if abs(es.xi) > xi0]
        delta0 = -max(outer) if outer else math.inf

        truncation_ok = None
        if check_truncation:
            probes = [0.0, float(grid[len(grid) // 4])]
            truncation_ok = all(truncation_check(self.wave, xi, self.M)[0] for xi in probes)

        verdict = StabilityVerdict(
            condition_i=condition_i,
            condition_ii=condition_ii,
            theta=theta,
            condition_iii=bool(condition_iii),
            delta_N_table=delta_table,
            xi0=xi0,
            delta0=delta0,
            xi1=xi1,
            delta1=delta1,
            max_real_part=max_real,
            secondary_gap=secondary_gap,
            zero_mode_residual=zero_residual,
            kernel_residual=self.kernel_residual(),
            kernel_alignment=alignment,
            offending_xi=offending,
            truncation_converged=truncation_ok,
            xi_grid=grid,
        )
        if verdict.stable:
            logger.info(f"✅ Diffusively spectrally stable: theta={theta:.4e}, xi1={xi1:.4e}, delta1={delta1:.4e}")
        else:
            failed = ", ".join(c.value for c in verdict.failing_conditions())
            logger.warning(f"❌ Stability check failed ({failed}); offending xi: {offending[:5]}")
        return verdict

    def delta_N_table(self, N_list: Iterable[int]) -> Dict[int, float]:
        """delta_N = -max Re of the spectrum over Omega_N, zero eigenvalue removed"""
        table = {}
        for N in N_list:
            fractions = [Fraction(j, N) for j in lattice(N, self.wave.T).indices]
            systems = ordered_map(self.lattice_eigensystem, fractions, self.max_workers)
            top = -math.inf
            for frac, es in zip(fractions, systems):
                values = np.delete(es.values, es.zero_index()) if frac == 0 else es.values
                top = max(top, float(np.max(values.real)))
            table[int(N)] = -top
        return table

    def _inner_radius(self, systems: Sequence[Eigensystem], secondary_gap: float) -> Tuple[float, float]:
        """xi1: largest radius on which the critical branch stays delta1-separated from the rest"""
        delta1 = secondary_gap / 2.0
        radii = sorted({abs(float(es.xi)) for es in systems if es.xi != 0.0})
        xi1 = math.pi / self.wave.T
        previous = 0.0
        for r in radii:
            ok = True
            for es in systems:
                if abs(abs(float(es.xi)) - r) > 1e-15:
                    continue
                re = es.values.real
                if not (re[0] > -delta1 and (len(re) < 2 or re[1] < -delta1)):
                    ok = False
            if not ok:
                xi1 = previous
                break
            previous = r
        return xi1, delta1

    # Critical curve

    def critical_curve(
        self,
        xi_max: float,
        n_samples: int = 17,
        verdict: Optional[StabilityVerdict] = None,
    ) -> CriticalCurve:
        """Track lambda_c through 0 by eigenvector overlap and fit i a xi - d xi^2"""
        if n_samples < 8:
            raise ValidationError("n_samples must be at least 8", field="n_samples")
        if np.linalg.norm(self.phi_prime) == 0.0:
            raise ValidationError("constant waves have no translation mode", field="wave")
        if verdict is not None and xi_max > verdict.xi1 * (1.0 + 1e-12):
            raise ValidationError(f"xi_max={xi_max} exceeds xi1={verdict.xi1}", field="xi_max")
        half = n_samples // 2
        positive = xi_max * np.arange(0, half + 1) / half
        xis = np.concatenate([-positive[:0:-1], positive])
        systems = dict(zip(xis.tolist(), self.eigensystems(xis)))

        zero = systems[0.0]
        z = zero.zero_index()
        phi, tilde = self._normalize(zero.right[:, z], zero.left[:, z])
        lam = {0.0: complex(zero.values[z])}
        phis = {0.0: phi}
        tildes = {0.0: tilde}
        for direction in (positive[1:], -positive[1:]):
            reference = phi
            for xi in direction:
                es = systems[float(xi)]
                overlaps = np.abs(reference.conj() @ es.right) / (
                    np.linalg.norm(reference) * np.linalg.norm(es.right, axis=0))
                j = int(np.argmax(overlaps))
                if overlaps[j] < settings.OVERLAP_MIN:
                    raise BranchCrossingError(xi, overlaps[j])
                v, w = self._normalize(es.right[:, j], es.left[:, j])
                lam[float(xi)] = complex(es.values[j])
                phis[float(xi)] = v
                tildes[float(xi)] = w
                reference = v

        order = sorted(lam)
        xi_samples = np.array(order)
        lambda_c = np.array([lam[x] for x in order])
        _, d_fit, _ = fit_critical_branch(xi_samples, lambda_c)
        a, d = self.taylor_coefficients(xi_max, lam[0.0])
        if abs(d - d_fit) > 0.05 * abs(d):
            logger.warning(f"⚠️ Taylor d={d:.6f} and least-squares d={d_fit:.6f} disagree")
        fit_residual = float(np.max(np.abs(lambda_c - (1j * a * xi_samples - d * xi_samples ** 2))))
        nonzero = xi_samples != 0.0
        theta = float(np.min(-lambda_c.real[nonzero] / xi_samples[nonzero] ** 2))
        xi1 = verdict.xi1 if verdict is not None else xi_max
        delta1 = verdict.delta1 if verdict is not None else float(-np.max(np.delete(zero.values, z).real) / 2.0)
        curve = CriticalCurve(
            T=self.wave.T,
            M=self.M,
            xi_samples=xi_samples,
            lambda_c=lambda_c,
            phi_xi=np.array([phis[x] for x in order]),
            phi_tilde_xi=np.array([tildes[x] for x in order]),
            phi_prime=self.phi_prime,
            a=a,
            d=d,
            theta=max(theta, 0.0),
            xi1=xi1,
            delta1=delta1,
            fit_residual=fit_residual,
        )
        logger.info(f"✅ Critical curve: a={a:.3e}, d={d:.6f}, fit residual={fit_residual:.2e}")
        return curve

    def taylor_coefficients(self, xi_max: float, lam0: complex = 0j) -> Tuple[float, float]:
        """
        a and d from central differences of lambda_c at +-h and +-2h,
        Richardson-combined; h = min(CURVE_TAYLOR_STEP, xi_max / 4).
        """
        h = min(settings.CURVE_TAYLOR_STEP, xi_max / 4.0)
        steps = [-2.0 * h, -h, h, 2.0 * h]
        lam = {}
        for xi, es in zip(steps, self.eigensystems(steps)):
            lam[xi] = complex(es.values[int(np.argmin(np.abs(es.values - lam0)))])

        def odd(s: float) -> complex:
            return (lam[s] - lam[-s]) / (2.0 * s)

        def even(s: float) -> complex:
            return (lam[s] + lam[-s] - 2.0 * lam0) / (2.0 * s * s)

        a = float(((4.0 * odd(h) - odd(2.0 * h)) / 3.0).imag)
        d = float(-((4.0 * even(h) - even(2.0 * h)) / 3.0).real)
        return a, d

    def _normalize(self, right: np.ndarray, left: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Scale so <phi', Phi> = ||phi'||^2 and <Phi~, Phi> = 1"""
        p = self.phi_prime
        phi = right * (np.vdot(p, p) / np.vdot(p, right))
        tilde = left / np.conj(self.pairing(left, phi))
        return phi, tilde

    def critical_pair(self, es: Eigensystem, curve: CriticalCurve) -> Tuple[complex, np.ndarray, np.ndarray]:
        """Exact eigen-triple of the critical branch at a frequency inside the curve range"""
        _, reference, _ = curve.at(es.xi)
        overlaps = np.abs(reference.conj() @ es.right) / (
            np.linalg.norm(reference) * np.linalg.norm(es.right, axis=0))
        j = int(np.argmax(overlaps))
        if overlaps[j] < settings.OVERLAP_MIN:
            raise BranchCrossingError(es.xi, overlaps[j])
        phi, tilde = self._normalize(es.right[:, j], es.left[:, j])
        return complex(es.values[j]), phi, tilde

    # Off-critical rate

    def off_critical_rate(self, curve: CriticalCurve, cutoff, xi_grid: Optional[Sequence[float]] = None,
                          N: Optional[int] = None) -> float:
        """
        eta: decay rate of the parts without the critical mode, i.e. -max Re over
        the cutoff complement and over the non-critical spectrum on its support.

        With N the scan runs over the lattice Omega_N (reusing the cached
        lattice eigensystems) instead of the continuous grid.
        """
        if N is not None:
            fractions = [Fraction(j, N) for j in lattice(N, self.wave.T).indices]
            systems = ordered_map(self.lattice_eigensystem, fractions, self.max_workers)
        else:
            grid = default_xi_grid(self.wave.T) if xi_grid is None else np.asarray(xi_grid)
            systems = self.eigensystems(grid)
        top = -math.inf
        for es in systems:
            weight = cutoff(es.xi)
            if weight < 1.0:
                top = max(top, float(np.max(es.values.real)))
            if weight > 0.0:
                lam, _, _ = self.critical_pair(es, curve)
                rest = np.delete(es.values, int(np.argmin(np.abs(es.values - lam))))
                top = max(top, float(np.max(rest.real)))
        return -top


def fit_critical_branch(xi: np.ndarray, lam: np.ndarray) -> Tuple[float, float, float]:
    """
    Least squares lambda_c ~ i a xi - d xi^2 (+ i c3 xi^3 + c4 xi^4).

    Returns (a, d, max |lambda_c - (i a xi - d xi^2)|).
    """
    im_basis = np.column_stack([xi, xi ** 3])
    re_basis = np.column_stack([-xi ** 2, xi ** 4])
    if len(xi) < 4:
        im_basis, re_basis = im_basis[:, :1], re_basis[:, :1]
    a = float(np.linalg.lstsq(im_basis, lam.imag, rcond=None)[0][0])
    d = float(np.linalg.lstsq(re_basis, lam.real, rcond=None)[0][0])
    residual = float(np.max(np.abs(lam - (1j * a * xi - d * xi ** 2))))
    return a, d, residual


def constant_state_eigenvalues(params: LleParams, phi_star: complex, q: np.ndarray) -> np.ndarray:
    """Closed-form -1 +- sqrt(-det L_q) of the constant state, shape (len(q), 2)"""
    P, Q = phi_star.real, phi_star.imag
    base = params.beta * np.asarray(q, dtype=float) ** 2 - params.alpha
    l11 = base + 3 * P ** 2 + Q ** 2
    l22 = base + P ** 2 + 3 * Q ** 2
    l12 = 2 * P * Q
    root = np.sqrt(-(l11 * l22 - l12 ** 2) + 0j)
    return np.column_stack([-1.0 + root, -1.0 - root])
