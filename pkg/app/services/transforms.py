"""
Subharmonic Bloch transform B_T, its inverse, Parseval and product identities,
and the windowed surrogate of the localized Bloch transform.

Conventions: g_hat(zeta) = int_0^{NT} exp(-i zeta y) g(y) dy, discretized as
the DFT scaled by NT / n_grid. Frequency 2 pi k / (NT) is split as
xi_j + 2 pi l / T with k = j + l N.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import scipy.fft
import scipy.signal
from pydantic import BaseModel, ConfigDict

from app.config import settings
from app.core.exceptions import GridMismatchError, ValidationError, WindowLeakError
from app.models.field import BlochCoefficients, FieldSample, SubharmonicLattice
from app.utils import fourier

logger = logging.getLogger(__name__)


def lattice_indices(N: int) -> np.ndarray:
    if N % 2 == 0:
        return np.arange(-N // 2, N // 2)
    return np.arange(-(N - 1) // 2, (N - 1) // 2 + 1)


def lattice(N: int, T: float) -> SubharmonicLattice:
    """Omega_N: 0 included, N points, all in [-pi/T, pi/T)"""
    if N < 1:
        raise ValidationError("N must be at least 1", field="N")
    if T <= 0:
        raise ValidationError("T must be positive", field="T")
    j = lattice_indices(N)
    spacing = 2.0 * math.pi / (N * T)
    return SubharmonicLattice(N=N, T=T, indices=j, frequencies=j * spacing, spacing=spacing)


def cell_resolution(M: int) -> int:
    """Smallest power of two >= 4M + 2 (at least 8)"""
    n = 8
    while n < 4 * M + 2:
        n *= 2
    return n


@lru_cache(maxsize=64)
def _slot_table(N: int, n_cell: int) -> np.ndarray:
    """DFT index of (xi_j, slot s) for every lattice index and slot"""
    s = np.arange(n_cell)
    ell = np.where(s < n_cell // 2, s, s - n_cell)
    k = lattice_indices(N)[:, None] + ell[None, :] * N
    table = k % (N * n_cell)
    table.setflags(write=False)
    return table


def sample_field(fn: Callable[[np.ndarray], np.ndarray], N: int, T: float, n_cell: int) -> FieldSample:
    """Field from a callable evaluated on the NT grid; fn may return shape (..., n_grid)"""
    n = N * n_cell
    x = np.arange(n) * (N * T / n)
    values = np.asarray(fn(x), dtype=complex)
    return FieldSample(N=N, T=T, n_grid=n, values=values)


def periodic_extension(coeffs: np.ndarray, N: int, T: float, n_cell: int) -> FieldSample:
    """A T-periodic function given by centered coefficients, sampled over [0, NT)"""
    n = N * n_cell
    x = np.arange(n) * (N * T / n)
    return FieldSample(N=N, T=T, n_grid=n, values=fourier.evaluate_series(coeffs, T, x))


def bloch_T(g: FieldSample) -> BlochCoefficients:
    if g.n_grid % g.N != 0:
        raise GridMismatchError(f"n_grid={g.n_grid} is not divisible by N={g.N}")
    lat = lattice(g.N, g.T)
    n_cell = g.n_grid // g.N
    spectrum = scipy.fft.fft(g.values, axis=-1) * (g.length / g.n_grid)
    values = np.moveaxis(spectrum[..., _slot_table(g.N, n_cell)], -2, 0)
    return BlochCoefficients(lattice=lat, n_cell=n_cell, values=values)


def inverse_bloch(coeffs: BlochCoefficients) -> FieldSample:
    """g(x) = (1/NT) sum_xi exp(i xi x) B_T(g)(xi, x) on the grid"""
    lat = coeffs.lattice
    n = lat.N * coeffs.n_cell
    spectrum = np.zeros(coeffs.values.shape[1:-1] + (n,), dtype=complex)
    spectrum[..., _slot_table(lat.N, coeffs.n_cell)] = np.moveaxis(coeffs.values, 0, -2)
    values = scipy.fft.ifft(spectrum, axis=-1) * (n / (lat.N * lat.T))
    return FieldSample(N=lat.N, T=lat.T, n_grid=n, values=values)


def from_centered(lat: SubharmonicLattice, centered: np.ndarray, n_cell: int) -> BlochCoefficients:
    """Bloch coefficients from per-slice centered arrays of shape (N, ..., 2M+1)"""
    return BlochCoefficients(lattice=lat, n_cell=n_cell, values=fourier.centered_to_fft(centered, n_cell))


def _check_same_grid(f: FieldSample, g: FieldSample) -> None:
    if (f.N, f.T, f.n_grid) != (g.N, g.T, g.n_grid) or f.values.shape != g.values.shape:
        raise GridMismatchError(
            f"fields live on different grids: (N={f.N}, n={f.n_grid}) vs (N={g.N}, n={g.n_grid})"
        )


def parseval_subharmonic(f: FieldSample, g: FieldSample) -> Tuple[complex, complex]:
    """<f, g>_{L^2(0,NT)} and (1/(N T^2)) sum_xi <B_T f, B_T g>_{L^2(0,T)}"""
    _check_same_grid(f, g)
    bf, bg = bloch_T(f), bloch_T(g)
    lhs = f.inner(g)
    # <u, v>_{L^2(0,T)} = T sum_l conj(u_l) v_l
    rhs = (1.0 / (f.N * f.T ** 2)) * f.T * np.vdot(bf.values, bg.values)
    return lhs, complex(rhs)


def upsample(g: FieldSample, factor: int) -> FieldSample:
    """Band-limited resampling onto a grid factor times finer"""
    if factor == 1:
        return g
    values = scipy.signal.resample(g.values, factor * g.n_grid, axis=-1)
    return FieldSample(N=g.N, T=g.T, n_grid=factor * g.n_grid, values=values)


def product_identity_check(f_coeffs: np.ndarray, g: FieldSample, pad: int = 2) -> float:
    """
    Largest relative violation of B_T(fg)(xi, .) = f B_T(g)(xi, .) over all
    xi and of <f, g>_{L^2(0,NT)} = (1/T) <f, B_T(g)(0, .)>_{L^2(0,T)}.

    f is T-periodic with centered coefficients; the product is formed on a
    grid pad times finer than g's.
    """
    fine = upsample(g, pad)
    f_values = fourier.evaluate_series(f_coeffs, g.T, fine.grid)
    left = bloch_T(fine.with_values(fine.values * f_values)).cell_values()
    bg = bloch_T(fine)
    g_cell = bg.cell_values()
    f_cell = f_values[:fine.n_cell]
    right = f_cell * g_cell
    scale = max(1.0, float(np.max(np.abs(left))))
    product_error = float(np.max(np.abs(left - right))) / scale

    direct = fine.dx * np.vdot(np.broadcast_to(f_values, fine.values.shape), fine.values)
    zero = g_cell[bg.lattice.zero_position]
    via_slice = (1.0 / g.T) * (g.T / fine.n_cell) * np.vdot(np.broadcast_to(f_cell, zero.shape), zero)
    pairing_error = abs(direct - via_slice) / max(1.0, abs(direct))
    return max(product_error, float(pairing_error))


def periodic_pairing(f_coeffs: np.ndarray, g: FieldSample) -> complex:
    """<f, g>_{L^2(0,NT)} for T-periodic f, through the xi = 0 slice of B_T(g)"""
    M = fourier.half_width(f_coeffs)
    bg = bloch_T(g)
    if 2 * M + 1 > bg.n_cell:
        raise GridMismatchError(f"cell resolution {bg.n_cell} cannot hold modes |l| <= {M}")
    zero = bg.centered(M)[bg.lattice.zero_position]
    # (1/T) T sum_l conj(f_l) B_l
    return complex(np.vdot(np.broadcast_to(f_coeffs, zero.shape), zero))


def window_leak(v: FieldSample, edge: Optional[int] = None) -> float:
    """Largest |v| on the outer edge of the window, relative to ||v||"""
    edge = edge or max(1, v.n_cell // 2)
    norm = v.norm()
    if norm == 0.0:
        return 0.0
    values = v.values.reshape(-1, v.n_grid)
    boundary = np.concatenate([values[:, :edge], values[:, -edge:]], axis=1)
    return float(np.max(np.abs(boundary)) / norm)


class LocalizedBloch(BaseModel):
    """Windowed surrogate of the localized Bloch transform"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    coefficients: BlochCoefficients
    leak: float
    parseval_discrepancy: float

    @property
    def xi(self) -> np.ndarray:
        return self.coefficients.lattice.frequencies


def bloch_localized(v: FieldSample, T: Optional[float] = None, n_xi: Optional[int] = None) -> LocalizedBloch:
    """
    Samples of the localized Bloch transform on the lattice of the window.

    The window of v.N cells is zero-extended to n_xi cells when a finer
    xi-resolution is requested.
    """
    if T is not None and T != v.T:
        raise GridMismatchError(f"field period {v.T} does not match T={T}")
    leak = window_leak(v)
    if leak > settings.LEAK_TOL:
        raise WindowLeakError(leak)
    n_xi = n_xi or v.N
    if n_xi < v.N:
        raise ValidationError(f"n_xi={n_xi} is smaller than the window of {v.N} cells", field="n_xi")
    if n_xi > v.N:
        pad = np.zeros(v.values.shape[:-1] + ((n_xi - v.N) * v.n_cell,), dtype=complex)
        v = FieldSample(N=n_xi, T=v.T, n_grid=n_xi * v.n_cell, values=np.concatenate([v.values, pad], axis=-1))

    coefficients = bloch_T(v)
    lhs = v.norm() ** 2
    # (1/(2 pi T)) int ||v(xi)||^2_{L^2(0,T)} dxi as a Riemann sum with step 2 pi / (NT)
    rhs = float(np.sum(np.abs(coefficients.values) ** 2)) / (v.N * v.T)
    discrepancy = abs(lhs - rhs) / max(lhs, np.finfo(float).tiny)
    logger.debug(f"📝 Localized transform: {n_xi} frequencies, leak={leak:.2e}, Parseval={discrepancy:.2e}")
    return LocalizedBloch(coefficients=coefficients, leak=leak, parseval_discrepancy=discrepancy)


def random_identity_check(N: int, T: float, n_cell: int, rng: np.random.Generator,
                          samples: int = 100, M_f: int = 3) -> Dict[str, float]:
    """
    Worst relative errors of Parseval, inverse representation and the
    product identities over random complex fields and T-periodic factors.
    """
    n = N * n_cell
    worst = {"parseval": 0.0, "inverse": 0.0, "product": 0.0}
    for _ in range(samples):
        f = FieldSample(N=N, T=T, n_grid=n, values=rng.standard_normal(n) + 1j * rng.standard_normal(n))
        g = FieldSample(N=N, T=T, n_grid=n, values=rng.standard_normal(n) + 1j * rng.standard_normal(n))
        lhs, rhs = parseval_subharmonic(f, g)
        worst["parseval"] = max(worst["parseval"], abs(lhs - rhs) / max(abs(lhs), f.norm() * g.norm()))
        back = inverse_bloch(bloch_T(g))
        worst["inverse"] = max(worst["inverse"], float(np.max(np.abs(back.values - g.values))) /
                               float(np.max(np.abs(g.values))))
        f_coeffs = rng.standard_normal(2 * M_f + 1) + 1j * rng.standard_normal(2 * M_f + 1)
        worst["product"] = max(worst["product"], product_identity_check(f_coeffs, g))
    return worst


def lattice_riemann_sum(G: Callable[[np.ndarray], np.ndarray], N: int, T: float) -> float:
    """(1/NT) sum over Omega_N of G; approximates (1/2 pi) int G over [-pi/T, pi/T)"""
    values = np.asarray(G(lattice(N, T).frequencies), dtype=float)
    return math.fsum(values) / (N * T)
