import math
from fractions import Fraction

import numpy as np
import pytest

from app.core.exceptions import SingularShiftError, TruncationTooSmallError, ValidationError
from app.models.bloch import StabilityCondition
from app.services.blochop import (
    BlochService,
    Eigensystem,
    assemble,
    constant_state_eigenvalues,
    default_xi_grid,
    fit_critical_branch,
    resolvent_scan,
    semigroup_norms,
    sort_order,
    spectral_projection,
    spectrum,
)
from app.utils import fourier


class TestAssembly:
    def test_dimension(self, wave):
        matrix = assemble(wave, 0.1)
        assert matrix.entries.shape == (matrix.dimension, matrix.dimension)
        assert matrix.dimension == 2 * (2 * wave.M + 1)

    def test_xi_outside_brillouin_zone(self, wave):
        with pytest.raises(ValidationError):
            assemble(wave, math.pi / wave.T + 0.1)

    def test_truncation_below_profile(self, wave):
        with pytest.raises(TruncationTooSmallError):
            assemble(wave, 0.0, M=wave.M // 2)

    def test_constant_state_closed_form(self, unstable_constant):
        xi = 0.3
        phi_star = unstable_constant.coefficient(0)
        q = fourier.wavenumbers(unstable_constant.M, unstable_constant.T, xi)
        expected = constant_state_eigenvalues(unstable_constant.params, phi_star, q).ravel()
        computed = Eigensystem(assemble(unstable_constant, xi)).values
        assert len(computed) == len(expected)
        for lam in expected:
            assert np.min(np.abs(computed - lam)) < 1e-10

    def test_sort_order(self):
        values = np.array([-1 + 2j, 0.5 + 0j, -1 - 2j, -3 + 0j])
        ordered = values[sort_order(values)]
        assert ordered[0] == 0.5
        assert ordered[1] == -1 - 2j
        assert ordered[-1] == -3


class TestKernel:
    def test_translation_mode(self, bloch):
        assert bloch.kernel_residual() <= 1e-8

    def test_alignment_of_phi_prime(self, bloch):
        assert bloch.alignment(bloch.phi_prime) < 1e-12
        assert bloch.alignment(np.zeros_like(bloch.phi_prime)) == 1.0

    def test_pairing(self, bloch, wave):
        v = bloch.phi_prime
        assert bloch.pairing(v, v).real == pytest.approx(wave.T * float(np.vdot(v, v).real))


class TestVerdict:
    def test_bifurcating_wave_is_stable(self, verdict):
        assert verdict.stable
        assert verdict.failing_conditions() == []
        assert verdict.offending_xi == []

    def test_verdict_quantities(self, verdict, wave):
        assert verdict.theta > 0
        assert verdict.secondary_gap > 0
        assert verdict.delta1 == pytest.approx(verdict.secondary_gap / 2)
        assert 0 < verdict.xi1 <= math.pi / wave.T
        assert verdict.xi0 == pytest.approx(verdict.xi1 / 2)
        assert verdict.zero_mode_residual <= 1e-8
        assert verdict.kernel_alignment < 1e-6
        assert verdict.truncation_converged is True

    def test_delta_table(self, verdict):
        assert sorted(verdict.delta_N_table) == [1, 2, 4]
        assert all(delta > 0 for delta in verdict.delta_N_table.values())
        assert verdict.delta_N_table[1] == pytest.approx(verdict.secondary_gap)

    def test_grid_must_contain_zero(self, bloch, wave):
        with pytest.raises(ValidationError):
            bloch.check_diffusive_stability(xi_grid=[-0.1, 0.1], check_truncation=False)

    def test_unstable_constant_state(self, unstable_constant):
        verdict = BlochService(unstable_constant).check_diffusive_stability(N_list=[1, 2], check_truncation=False)
        assert not verdict.stable
        failed = verdict.failing_conditions()
        assert StabilityCondition.SPECTRUM_IN_LEFT_HALF_PLANE in failed
        assert StabilityCondition.QUADRATIC_TOUCH in failed
        assert verdict.offending_xi
        assert verdict.max_real_part > 0

    def test_lattice_cache_is_exact(self, bloch):
        half = bloch.lattice_eigensystem(Fraction(1, 2))
        same = bloch.lattice_eigensystem(Fraction(2, 4))
        assert half is same


class TestCriticalCurve:
    def test_branch_through_zero(self, curve):
        zero = int(np.flatnonzero(curve.xi_samples == 0.0)[0])
        assert abs(curve.lambda_c[zero]) <= 1e-8
        off = curve.xi_samples != 0.0
        assert np.all(curve.lambda_c.real[off] < 0)

    def test_diffusion_coefficient(self, curve):
        assert curve.d > 0
        assert curve.theta > 0
        # even profile: the branch is real
        assert abs(curve.a) < 1e-6
        smallest = np.argmin(np.where(curve.xi_samples != 0.0, np.abs(curve.xi_samples), np.inf))
        xi = curve.xi_samples[smallest]
        assert -curve.lambda_c[smallest].real / xi ** 2 == pytest.approx(curve.d, rel=0.1)

    def test_biorthogonal_normalization(self, curve):
        assert np.allclose(curve.pairings, 1.0, atol=1e-10)

    def test_interpolation_keeps_pairing(self, curve):
        xi = 0.5 * (curve.xi_samples[-1] + curve.xi_samples[-2])
        lam, phi, tilde = curve.at(xi)
        assert curve.T * np.vdot(tilde, phi) == pytest.approx(1.0)
        assert lam.real < 0
        with pytest.raises(ValueError):
            curve.at(2.0 * curve.xi_samples[-1])

    def test_too_few_samples(self, bloch, verdict):
        with pytest.raises(ValidationError):
            bloch.critical_curve(verdict.xi1, 7, verdict)

    def test_beyond_xi1(self, bloch, verdict):
        with pytest.raises(ValidationError):
            bloch.critical_curve(2.0 * verdict.xi1, 17, verdict)

    def test_constant_wave_has_no_branch(self, unstable_constant):
        with pytest.raises(ValidationError):
            BlochService(unstable_constant).critical_curve(0.1, 9)

    def test_fit_recovers_coefficients(self):
        xi = np.linspace(-0.1, 0.1, 17)
        lam = 0.3j * xi - 2.0 * xi ** 2 + 0.1j * xi ** 3 + 0.5 * xi ** 4
        a, d, residual = fit_critical_branch(xi, lam)
        assert a == pytest.approx(0.3)
        assert d == pytest.approx(2.0)
        assert residual < 1e-3

    def test_taylor_coefficients(self, bloch, curve):
        h = 1e-4
        values = bloch.eigensystem(h).values
        lam = values[np.argmin(np.abs(values))]
        assert -lam.real / h ** 2 == pytest.approx(curve.d, rel=1e-3)
        _, d_fit, _ = fit_critical_branch(curve.xi_samples, curve.lambda_c)
        assert d_fit == pytest.approx(curve.d, rel=0.05)

    def test_off_critical_rate(self, bloch, curve, cutoff):
        assert bloch.off_critical_rate(curve, cutoff) > 0

    def test_lattice_off_critical_rate(self, bloch, curve, cutoff, verdict):
        # only xi = 0 of Omega_4 lies in the cutoff support
        assert bloch.off_critical_rate(curve, cutoff, N=4) == pytest.approx(verdict.delta_N_table[4], rel=1e-12)
        delta16 = bloch.delta_N_table([16])[16]
        assert bloch.off_critical_rate(curve, cutoff, N=16) >= delta16 - 1e-14


class TestSpectralProjection:
    def _random(self, rng, curve):
        n = len(curve.phi_prime)
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)

    def test_fixes_its_range(self, curve):
        i = len(curve.xi_samples) - 2
        phi = curve.phi_xi[i]
        projected = spectral_projection(curve, curve.xi_samples[i], phi)
        assert np.linalg.norm(projected - phi) <= 1e-12 * np.linalg.norm(phi)

    def test_idempotent_between_samples(self, curve, rng):
        xi = 0.5 * (curve.xi_samples[-1] + curve.xi_samples[-2])
        g = self._random(rng, curve)
        once = spectral_projection(curve, xi, g)
        twice = spectral_projection(curve, xi, once)
        assert np.linalg.norm(twice - once) <= 1e-10 * np.linalg.norm(once)
        rest = spectral_projection(curve, xi, g - once)
        assert np.linalg.norm(rest) <= 1e-10 * np.linalg.norm(g)

    def test_commutes_with_operator(self, wave, curve, rng):
        i = len(curve.xi_samples) - 3
        xi = float(curve.xi_samples[i])
        g = self._random(rng, curve)
        projected = spectral_projection(curve, xi, g)
        A = assemble(wave, xi, curve.M).entries
        residual = A @ projected - curve.lambda_c[i] * projected
        assert np.linalg.norm(residual) <= 1e-8 * max(np.linalg.norm(g), np.linalg.norm(projected))

    def test_invalid_input(self, curve):
        with pytest.raises(ValidationError):
            spectral_projection(curve, 0.0, np.zeros(3))
        with pytest.raises(ValidationError):
            spectral_projection(curve, 2.0 * curve.xi_samples[-1], curve.phi_prime)


class TestScans:
    def test_default_grid(self, wave):
        grid = default_xi_grid(wave.T)
        assert 0.0 in grid
        assert np.all(np.diff(grid) > 0)
        assert grid[0] >= -math.pi / wave.T
        assert grid[-1] < math.pi / wave.T

    def test_spectrum_slice(self, wave):
        result = spectrum(assemble(wave, 0.0), wave)
        assert result.zero_mode_residual <= 1e-8
        assert result.max_real_part < 0
        assert result.truncation_converged is True

    def test_resolvent_at_zero_eigenvalue(self, wave):
        matrix = assemble(wave, 0.0)
        assert math.isinf(resolvent_scan(matrix, [0.0])[0])
        with pytest.raises(SingularShiftError):
            resolvent_scan(matrix, [0.0], strict=True)

    def test_resolvent_right_of_spectrum(self, wave):
        norms = resolvent_scan(assemble(wave, 0.1), [-1.0, 0.0, 1.0], shift=0.5)
        assert np.all(np.isfinite(norms))
        # ||(z - A)^{-1}|| >= 1 / dist(z, spectrum)
        assert np.all(norms >= 1.0 / (0.5 + 5.0))

    def test_semigroup_norms(self, wave):
        norms = semigroup_norms(assemble(wave, 0.1), [0.0, 1.0])
        assert norms[0] == pytest.approx(1.0)
        assert np.isfinite(norms[1])
