"""
Stationary wave service: constant states, bifurcation seeds and the
Fourier-Galerkin Newton solver for the profile equation

    -i beta phi'' - (1 + i alpha) phi + i |phi|^2 phi + F = 0.
"""

import logging
import math
from typing import List, Optional

import numpy as np
import scipy.linalg

from app.config import settings
from app.core.exceptions import (
    NoConvergenceError,
    SingularJacobianError,
    ValidationError,
)
from app.models.wave import BifurcationSeed, LleParams, PeriodicWave
from app.utils import fourier

logger = logging.getLogger(__name__)


def constant_state_roots(params: LleParams) -> np.ndarray:
    """All constant solutions, ordered by increasing |phi|^2"""
    alpha, F = params.alpha, params.F
    if F == 0.0:
        return np.array([0j])
    # rho (1 + (alpha - rho)^2) = F^2
    cubic = [1.0, -2.0 * alpha, 1.0 + alpha ** 2, -F ** 2]
    roots = np.roots(cubic)
    rhos = []
    for r in roots:
        if abs(r.imag) > 1e-9 * max(1.0, abs(r)) or r.real < 0:
            continue
        rho = r.real
        for _ in range(3):
            f = rho * (1.0 + (alpha - rho) ** 2) - F ** 2
            df = 1.0 + (alpha - rho) ** 2 - 2.0 * rho * (alpha - rho)
            if df == 0.0:
                break
            rho -= f / df
        rhos.append(rho)
    rhos = sorted(set(np.round(rhos, 14)))
    return np.array([F / (1.0 + 1j * (alpha - rho)) for rho in rhos])


def constant_state(params: LleParams, branch: int = 0) -> complex:
    """
    Constant solution of (1 + i alpha) phi - i |phi|^2 phi = F.

    branch 0 is the root continuously connected to zero as F -> 0
    (smallest |phi|^2); other branches are ordered by |phi|^2.
    """
    roots = constant_state_roots(params)
    if not 0 <= branch < len(roots):
        raise ValidationError(f"branch {branch} not available ({len(roots)} real roots)", field="branch")
    if len(roots) > 1:
        logger.info(f"📝 {len(roots)} constant states: |phi|^2 = {[float(abs(r) ** 2) for r in roots]}")
    return complex(roots[branch])


def constant_residual(params: LleParams, phi: complex) -> float:
    return abs((1.0 + 1j * params.alpha) * phi - 1j * abs(phi) ** 2 * phi - params.F)


class WaveService:
    """Profile-equation solver"""

    def __init__(self, tol: Optional[float] = None, max_iter: Optional[int] = None):
        self.tol = tol if tol is not None else settings.NEWTON_TOL
        self.max_iter = max_iter if max_iter is not None else settings.NEWTON_MAX_ITER

    # Seeds

    def constant_wave(self, params: LleParams, T: float, M: Optional[int] = None, branch: int = 0) -> PeriodicWave:
        M = M or settings.DEFAULT_M
        coeffs = np.zeros(2 * M + 1, dtype=complex)
        coeffs[M] = constant_state(params, branch)
        wave = PeriodicWave(params=params, T=T, M=M, coeffs=coeffs, even=True)
        return wave.with_coeffs(coeffs, residual_norm=self.collocation_residual(wave))

    def bifurcation_seed(self, alpha: float, mu: float, M: Optional[int] = None, beta: float = -1.0) -> PeriodicWave:
        """Truncated small-amplitude expansion of the even bifurcating wave"""
        try:
            seed = BifurcationSeed(alpha=alpha, mu=mu)
        except ValueError as e:
            raise ValidationError(f"Invalid bifurcation seed: {e}", field="alpha")
        M = M or settings.DEFAULT_M
        params = LleParams(alpha=alpha, beta=beta, F=seed.F)
        phi_star = constant_state(LleParams(alpha=alpha, beta=beta, F=seed.F1))
        coeffs = np.zeros(2 * M + 1, dtype=complex)
        coeffs[M] = phi_star
        coeffs[M - 1] = coeffs[M + 1] = seed.amplitude / 2.0
        wave = PeriodicWave(params=params, T=seed.T, M=M, coeffs=coeffs, even=True)
        logger.info(f"🌱 Seed alpha={alpha}, mu={mu}: T={seed.T:.6f}, |A|={abs(seed.amplitude):.6e}")
        return wave.with_coeffs(coeffs, residual_norm=self.collocation_residual(wave))

    # Residuals

    def galerkin_residual(self, wave: PeriodicWave, coeffs: np.ndarray) -> np.ndarray:
        """Profile residual on modes -M..M with an exactly dealiased cubic term"""
        p = wave.params
        M = fourier.half_width(coeffs)
        q = fourier.wavenumbers(M, wave.T)
        cubic = fourier.dealiased_product([coeffs, coeffs, np.conj(coeffs[::-1])], keep=M)
        residual = 1j * p.beta * q ** 2 * coeffs - (1.0 + 1j * p.alpha) * coeffs + 1j * cubic
        residual[M] += p.F
        return residual

    def collocation_residual(self, wave: PeriodicWave, n_points: Optional[int] = None) -> float:
        """Sup-norm residual on a uniform grid at least 4x finer than 2M+1"""
        n = n_points or 4 * (2 * wave.M + 1) + 1
        x = np.arange(n) * wave.T / n
        phi = wave.evaluate(x)
        phi_xx = wave.evaluate(x, derivative=2)
        p = wave.params
        r = -1j * p.beta * phi_xx - (1.0 + 1j * p.alpha) * phi + 1j * np.abs(phi) ** 2 * phi + p.F
        return float(np.max(np.abs(r)))

    # Newton

    def _jacobian(self, wave: PeriodicWave, coeffs: np.ndarray) -> np.ndarray:
        """Linearization on stacked (w_r, w_i) coefficients, i.e. A_0 of the iterate"""
        from app.services.blochop import assemble_operator

        return assemble_operator(wave.params, wave.T, coeffs, xi=0.0, M=fourier.half_width(coeffs))

    @staticmethod
    def _real_basis(M: int, even: bool) -> np.ndarray:
        """
        Map from real unknowns to the Hermitian coefficient vector of one real
        function: (a_0, Re a_k, Im a_k) in general, (a_0, a_k) with a_{-k} = a_k
        real when even.
        """
        n = 2 * M + 1
        H = np.zeros((n, M + 1 if even else n), dtype=complex)
        H[M, 0] = 1.0
        for k in range(1, M + 1):
            H[M + k, k] = H[M - k, k] = 1.0
            if not even:
                H[M + k, M + k] = 1j
                H[M - k, M + k] = -1j
        return H

    @staticmethod
    def _coords(stacked: np.ndarray, M: int, even: bool) -> np.ndarray:
        """Left inverse of the real basis, applied along axis 0 of stacked (w_r, w_i) data"""
        n = 2 * M + 1
        parts = []
        for block in (stacked[:n], stacked[n:]):
            parts.append(block[M:].real)
            if not even:
                parts.append(block[M + 1:].imag)
        return np.concatenate(parts, axis=0)

    def _stacked_residual(self, wave: PeriodicWave, coeffs: np.ndarray) -> np.ndarray:
        g = self.galerkin_residual(wave, coeffs)
        g_r, g_i = fourier.split_components(g)
        return np.concatenate([g_r, g_i])

    def newton_solve(
        self,
        seed: PeriodicWave,
        tol: Optional[float] = None,
        max_iter: Optional[int] = None,
        adapt: bool = True,
    ) -> PeriodicWave:
        """
        Newton iteration on the Galerkin system, doubling M until the tail
        max_{|k|>M/2}|c_k| drops below TAIL_TOL.
        """
        tol = tol if tol is not None else self.tol
        max_iter = max_iter if max_iter is not None else self.max_iter
        if tol <= 0:
            raise ValidationError("tol must be positive", field="tol")
        if not np.all(np.isfinite(seed.coeffs)):
            raise ValidationError("seed coefficients must be finite", field="coeffs")

        wave = seed
        while True:
            wave = self._solve_fixed_M(wave, tol, max_iter)
            tail = wave.tail()
            if not adapt or (tail < settings.TAIL_TOL and wave.residual_norm <= tol):
                break
            if 2 * wave.M > settings.MAX_M:
                raise NoConvergenceError(
                    f"Tail {tail:.2e} above {settings.TAIL_TOL:.0e} at maximal M={wave.M}",
                    wave.residual_history,
                )
            logger.info(f"🔄 Doubling truncation M={wave.M} -> {2 * wave.M} (tail={tail:.2e})")
            wave = wave.with_coeffs(fourier.pad_coefficients(wave.coeffs, 2 * wave.M))

        if wave.residual_norm > tol:
            raise NoConvergenceError(
                f"Collocation residual {wave.residual_norm:.2e} above tol {tol:.0e}", wave.residual_history
            )
        logger.info(
            f"✅ Newton converged: M={wave.M}, iterations={wave.iterations}, "
            f"residual={wave.residual_norm:.2e}"
        )
        return wave

    def _solve_fixed_M(self, seed: PeriodicWave, tol: float, max_iter: int) -> PeriodicWave:
        M = seed.M
        even = seed.even and bool(np.allclose(seed.coeffs, seed.coeffs[::-1], rtol=1e-10, atol=1e-14))
        H1 = self._real_basis(M, even)
        H = scipy.linalg.block_diag(H1, H1)
        coeffs = np.array(seed.coeffs, dtype=complex)
        if not even:
            # phase condition <phi'_seed, phi - phi_seed> = 0 as a bordering row
            border = self._coords(seed.derivative_vector(), M, even)
            seed_coords = self._coords(self._split(coeffs), M, even)

        history: List[float] = []
        step_size = math.inf
        for iteration in range(max_iter + 1):
            stacked = self._stacked_residual(seed, coeffs)
            residual = float(np.sum(np.abs(self.galerkin_residual(seed, coeffs))))
            history.append(residual)
            logger.debug(f"🔄 Newton iteration {iteration}: residual={residual:.3e}")
            if residual <= 0.1 * tol:
                break
            # stagnation at round-off once the tolerance is met
            if residual <= tol and step_size <= 1e-14 * (1.0 + np.max(np.abs(coeffs))):
                break
            if iteration == max_iter:
                raise NoConvergenceError(
                    f"Newton did not converge in {max_iter} iterations (residual {residual:.2e})", history
                )
            J_real = self._coords(self._jacobian(seed, coeffs) @ H, M, even)
            rhs = -self._coords(stacked, M, even)
            if even:
                matrix = J_real
            else:
                n = J_real.shape[0]
                matrix = np.zeros((n + 1, n + 1))
                matrix[:n, :n] = J_real
                matrix[:n, n] = border
                matrix[n, :n] = border
                offset = border @ (self._coords(self._split(coeffs), M, even) - seed_coords)
                rhs = np.concatenate([rhs, [-offset]])
            cond = np.linalg.cond(matrix)
            if not np.isfinite(cond) or cond > settings.JACOBIAN_COND_MAX:
                raise SingularJacobianError(cond)
            step = scipy.linalg.solve(matrix, rhs)[:H.shape[1]]
            delta = H @ step
            half = len(delta) // 2
            update = delta[:half] + 1j * delta[half:]
            step_size = float(np.max(np.abs(update)))
            coeffs = coeffs + update
            if even:
                coeffs = 0.5 * (coeffs + coeffs[::-1])

        wave = seed.with_coeffs(coeffs, even=even, iterations=len(history) - 1, residual_history=tuple(history))
        return wave.with_coeffs(
            coeffs, even=even, iterations=len(history) - 1,
            residual_history=tuple(history), residual_norm=self.collocation_residual(wave),
        )

    @staticmethod
    def _split(coeffs: np.ndarray) -> np.ndarray:
        a_r, a_i = fourier.split_components(coeffs)
        return np.concatenate([a_r, a_i])

    def evaluate(self, wave: PeriodicWave, grid, derivative: int = 0) -> np.ndarray:
        """phi (or its derivative) at the grid points by Fourier summation"""
        return wave.evaluate(grid, derivative)
