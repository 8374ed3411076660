import math

import numpy as np
import pytest

from app.core.exceptions import NoConvergenceError, ValidationError
from app.models.wave import ALPHA_CRITICAL, BifurcationSeed, LleParams, threshold_pump
from app.services.wave import WaveService, constant_residual, constant_state, constant_state_roots


class TestConstantStates:
    def test_threshold_pump(self):
        assert threshold_pump(1.0) == pytest.approx(1.0)
        assert threshold_pump(0.0) == pytest.approx(math.sqrt(2.0))

    def test_zero_pump_gives_zero_state(self):
        assert constant_state(LleParams(alpha=1.0, F=0.0)) == 0j

    def test_single_root_below_bistability(self):
        params = LleParams(alpha=1.0, F=1.5)
        roots = constant_state_roots(params)
        assert len(roots) == 1
        assert constant_residual(params, roots[0]) < 1e-12

    def test_three_roots_in_bistable_range(self):
        # rho (1 + (3 - rho)^2) = 4 has three positive roots
        params = LleParams(alpha=3.0, F=2.0)
        roots = constant_state_roots(params)
        assert len(roots) == 3
        assert np.all(np.diff(np.abs(roots) ** 2) > 0)
        for phi in roots:
            assert constant_residual(params, phi) < 1e-12
        assert constant_state(params, branch=2) == pytest.approx(roots[2])

    def test_missing_branch(self):
        with pytest.raises(ValidationError):
            constant_state(LleParams(alpha=1.0, F=1.5), branch=1)

    def test_beta_must_be_unit(self):
        with pytest.raises(ValueError):
            LleParams(alpha=1.0, beta=0.5, F=1.0)


class TestBifurcationSeed:
    def test_period_at_alpha_one(self):
        seed = BifurcationSeed(alpha=1.0, mu=1e-2)
        assert seed.k_c == pytest.approx(1.0)
        assert seed.T == pytest.approx(2.0 * math.pi)
        assert seed.F == pytest.approx(math.sqrt(1.01))

    def test_alpha_above_critical_rejected(self, wave_service):
        with pytest.raises(ValidationError) as exc:
            wave_service.bifurcation_seed(ALPHA_CRITICAL, 1e-2)
        assert exc.value.details["field"] == "alpha"

    def test_mu_must_be_positive(self, wave_service):
        with pytest.raises(ValidationError):
            wave_service.bifurcation_seed(1.0, 0.0)

    def test_seed_is_even(self, seed_wave):
        assert seed_wave.even
        assert np.allclose(seed_wave.coeffs, seed_wave.coeffs[::-1])


class TestNewton:
    def test_converged_residual(self, wave):
        assert wave.residual_norm <= 1e-10
        assert wave.tail() < 1e-12

    def test_residual_on_independent_grid(self, wave_service, wave):
        assert wave_service.collocation_residual(wave, n_points=1001) <= 1e-10

    def test_period_and_evenness_kept(self, wave):
        assert wave.T == pytest.approx(2.0 * math.pi, rel=1e-14)
        assert wave.even
        assert np.allclose(wave.coeffs, wave.coeffs[::-1], atol=1e-14)

    def test_amplitude_close_to_seed(self, wave, seed_wave):
        seed_amp = abs(seed_wave.first_harmonic_amplitude)
        assert abs(wave.first_harmonic_amplitude) == pytest.approx(seed_amp, rel=0.1)

    def test_history_recorded(self, wave):
        assert len(wave.residual_history) == wave.iterations + 1
        assert wave.residual_history[-1] <= wave.residual_history[0]

    def test_constant_state_is_a_fixed_point(self, wave_service):
        constant = wave_service.constant_wave(LleParams(alpha=1.0, F=1.5), T=2.0 * math.pi, M=8)
        solved = wave_service.newton_solve(constant)
        assert solved.iterations == 0
        assert solved.residual_norm <= 1e-12

    def test_nonpositive_tol_rejected(self, wave_service, seed_wave):
        with pytest.raises(ValidationError):
            wave_service.newton_solve(seed_wave, tol=0.0)

    def test_iteration_budget(self, wave_service, seed_wave):
        with pytest.raises(NoConvergenceError):
            wave_service.newton_solve(seed_wave, max_iter=0)
