"""
Fourier-series helpers on one period.

Coefficient arrays are "centered": index i holds mode k = i - M for a
truncation half-width M, so an array of length 2M+1 covers k = -M..M and
represents f(x) = sum_k c_k exp(2 pi i k x / T).
"""

from typing import Sequence

import numpy as np
import scipy.fft
import scipy.linalg


def half_width(coeffs: np.ndarray) -> int:
    n = coeffs.shape[-1]
    if n % 2 != 1:
        raise ValueError(f"centered coefficient arrays have odd length, got {n}")
    return (n - 1) // 2


def mode_indices(M: int) -> np.ndarray:
    return np.arange(-M, M + 1)


def wavenumbers(M: int, T: float, xi: float = 0.0) -> np.ndarray:
    """Wavenumbers 2 pi k / T + xi for k = -M..M"""
    return 2.0 * np.pi * mode_indices(M) / T + xi


def split_components(coeffs: np.ndarray):
    """Coefficients of the real and imaginary parts of a complex function"""
    reflected = np.conj(coeffs[..., ::-1])
    return (coeffs + reflected) / 2.0, (coeffs - reflected) / 2.0j


def pad_coefficients(coeffs: np.ndarray, M_new: int) -> np.ndarray:
    """Zero-pad or truncate a centered array to half-width M_new"""
    M = half_width(coeffs)
    out = np.zeros(coeffs.shape[:-1] + (2 * M_new + 1,), dtype=complex)
    m = min(M, M_new)
    out[..., M_new - m:M_new + m + 1] = coeffs[..., M - m:M + m + 1]
    return out


def centered_to_fft(coeffs: np.ndarray, L: int) -> np.ndarray:
    M = half_width(coeffs)
    arr = np.zeros(coeffs.shape[:-1] + (L,), dtype=complex)
    arr[..., mode_indices(M) % L] = coeffs
    return arr


def fft_to_centered(arr: np.ndarray, M: int) -> np.ndarray:
    L = arr.shape[-1]
    return arr[..., mode_indices(M) % L]


def dealiased_product(factors: Sequence[np.ndarray], keep: int) -> np.ndarray:
    """
    Coefficients |k| <= keep of the product of band-limited factors.

    The factors are sampled on a zero-padded grid with more than
    sum(M_f) + keep points, so no product mode aliases into the kept band.
    With two factors and keep = M this is the 3/2 rule; with three it is
    the factor-2 rule needed for the cubic nonlinearity.
    """
    bandwidth = sum(half_width(f) for f in factors)
    L = scipy.fft.next_fast_len(bandwidth + keep + 1)
    values = np.ones(L, dtype=complex)
    for f in factors:
        values = values * (L * scipy.fft.ifft(centered_to_fft(f, L)))
    return fft_to_centered(scipy.fft.fft(values) / L, keep)


def toeplitz_operator(g_hat: np.ndarray, M: int) -> np.ndarray:
    """Matrix of multiplication by g on modes -M..M: entry (k, j) is g_{k-j}"""
    g = pad_coefficients(g_hat, 2 * M)
    center = 2 * M
    column = g[center:center + 2 * M + 1]
    row = g[center::-1][:2 * M + 1]
    return scipy.linalg.toeplitz(column, row)


def evaluate_series(
    coeffs: np.ndarray,
    T: float,
    x: np.ndarray,
    derivative: int = 0,
    xi: float = 0.0,
) -> np.ndarray:
    """Evaluate sum_k (i q_k)^d c_k exp(i q_k x), q_k = 2 pi k / T + xi, on the last axis"""
    M = half_width(coeffs)
    q = wavenumbers(M, T, xi)
    weights = coeffs * (1j * q) ** derivative if derivative else coeffs
    phases = np.exp(1j * np.outer(np.asarray(x, dtype=float), q))
    return weights @ phases.T


def differentiate(coeffs: np.ndarray, T: float, order: int = 1) -> np.ndarray:
    M = half_width(coeffs)
    return coeffs * (1j * wavenumbers(M, T)) ** order


def cell_coefficients(values: np.ndarray) -> np.ndarray:
    """Centered coefficients of uniform samples over one period (Nyquist bin dropped)"""
    n = values.shape[-1]
    M = (n - 1) // 2
    return fft_to_centered(scipy.fft.fft(values, axis=-1) / n, M)
