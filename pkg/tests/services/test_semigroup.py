import math

import numpy as np
import pytest

from app.config import settings
from app.core.exceptions import DegenerateFitError, GridMismatchError, ValidationError
from app.models.dynamics import PART_NAMES, CutoffProfile, ModulationField
from app.models.field import FieldSample
from app.services.blochop import assemble
from app.services.semigroup import (
    crossover_time,
    decay_fit,
    difference_quotient_bound,
    fit_window,
    heat_solution,
    slice_exponential,
    whitham_compare,
    whitham_multiplier_gap,
    whitham_times,
    whitham_window,
)


class TestCutoff:
    def test_plateau_and_support(self):
        rho = CutoffProfile(xi1=0.2)
        assert rho(0.0) == 1.0
        assert rho(0.1) == 1.0
        assert rho(0.2) == 0.0
        assert rho(0.5) == 0.0

    def test_even_and_monotone(self):
        rho = CutoffProfile(xi1=0.2)
        xi = np.linspace(0.1, 0.2, 101)
        values = rho(xi)
        assert np.all(np.diff(values) <= 1e-15)
        assert np.allclose(values, rho(-xi))
        assert 0.0 < rho(0.15) < 1.0


class TestDecayFit:
    def test_power_law(self):
        t = np.geomspace(1.0, 1000.0, 30)
        fit = decay_fit(t, 3.0 * (1.0 + t) ** -0.5, "power")
        assert fit.fitted_exponent == pytest.approx(0.5)
        assert fit.prefactor == pytest.approx(3.0)
        assert fit.r_squared == pytest.approx(1.0)

    def test_exponential(self):
        t = np.linspace(0.0, 20.0, 30)
        fit = decay_fit(t, 2.0 * np.exp(-0.4 * t), "exponential")
        assert fit.fitted_exponent == pytest.approx(0.4)

    def test_window(self):
        t = np.geomspace(1.0, 1000.0, 40)
        fit = decay_fit(t, (1.0 + t) ** -0.25, "power", window=(10.0, 1000.0), min_decades=0.25)
        assert fit.fit_window[0] >= 10.0
        assert fit.fitted_exponent == pytest.approx(0.25)

    def test_degenerate_inputs(self):
        t = np.linspace(1.0, 10.0, 20)
        with pytest.raises(DegenerateFitError):
            decay_fit(t[:5], np.exp(-t[:5]), "exponential")
        with pytest.raises(DegenerateFitError):
            decay_fit(t, np.ones_like(t), "power")
        with pytest.raises(DegenerateFitError):
            decay_fit(t, -np.ones_like(t), "power")
        with pytest.raises(ValidationError):
            decay_fit(t, np.exp(-t), "linear")

    def test_crossover(self):
        assert crossover_time(4, 2.0 * math.pi, 1.0) == pytest.approx(16.0)
        t_min, t_max = fit_window(4, 2.0 * math.pi, 1.0, t_min=5.0, factor=0.5)
        assert (t_min, t_max) == (5.0, pytest.approx(8.0))
        with pytest.raises(ValidationError):
            crossover_time(4, 2.0 * math.pi, 0.0)


class TestSliceExponential:
    def test_identity_at_zero(self, wave):
        matrix = assemble(wave, 0.1)
        assert np.array_equal(slice_exponential(matrix, 0.0), np.eye(matrix.dimension))

    def test_negative_time(self, wave):
        with pytest.raises(ValidationError):
            slice_exponential(assemble(wave, 0.1), -1.0)

    def test_semigroup_property(self, bloch):
        es = bloch.eigensystem(0.05)
        one = slice_exponential(es.matrix, 1.0, es)
        two = slice_exponential(es.matrix, 2.0, es)
        assert np.allclose(one @ one, two, atol=1e-10)


class TestEvolution:
    def test_kernel_is_stationary(self, semigroup):
        f = semigroup.kernel_field(4)
        evolved = semigroup.evolve(f, 10.0)
        assert evolved.with_values(evolved.values - f.values).norm() <= 1e-8 * f.norm()

    def test_zero_time_reproduces_smooth_field(self, semigroup):
        f = semigroup.bump(4, weights=(0.3, -0.7))
        back = semigroup.evolve(f, 0.0)
        assert back.with_values(back.values - f.values).norm() <= 1e-10 * f.norm()
        assert back.is_real

    def test_bump_normalization(self, semigroup):
        f = semigroup.bump(2, weights=(1.0, 0.5))
        assert f.values.shape == (2, f.n_grid)
        assert f.l1_norm() + f.norm() == pytest.approx(1.0)

    def test_bump_family_is_seeded(self, semigroup):
        first = semigroup.bump_family(seed=7)(2)
        second = semigroup.bump_family(seed=7)(2)
        assert np.array_equal(first.values, second.values)

    def test_wrong_period(self, semigroup):
        f = FieldSample(N=2, T=1.0, n_grid=2 * semigroup.n_cell, values=np.zeros((2, 2 * semigroup.n_cell)))
        with pytest.raises(GridMismatchError):
            semigroup.evolve(f, 1.0)

    def test_one_component_rejected(self, semigroup):
        f = FieldSample(N=2, T=semigroup.T, n_grid=2 * semigroup.n_cell, values=np.zeros(2 * semigroup.n_cell))
        with pytest.raises(ValidationError):
            semigroup.evolve(f, 1.0)


class TestDecomposition:
    def test_projection_of_kernel(self, semigroup, curve):
        f = semigroup.kernel_field(4)
        projected = semigroup.project_P0N(curve, f)
        assert projected.with_values(projected.values - f.values).norm() <= 1e-8 * f.norm()

    def test_kernel_adjoint_normalized(self, semigroup, curve):
        tilde = semigroup.kernel_adjoint(curve)
        assert semigroup.T * np.vdot(tilde, semigroup.bloch.phi_prime) == pytest.approx(1.0)

    @pytest.mark.parametrize("N", [1, 4])
    def test_parts_close(self, semigroup, curve, cutoff, N):
        f = semigroup.bump(N, weights=(1.0, -0.5))
        for t in (0.0, 3.0, 30.0):
            report = semigroup.decompose(curve, cutoff, f, t)
            assert set(report.parts) == set(PART_NAMES)
            assert report.closure_residual <= 1e-9 * f.norm()
            assert report.full.is_real

    def test_kernel_field_is_all_p0(self, semigroup, curve, cutoff):
        f = semigroup.kernel_field(4)
        report = semigroup.decompose(curve, cutoff, f, 5.0)
        assert report.norm_minus_p0 <= 1e-8 * f.norm()
        assert report.norms["p0_part"] == pytest.approx(f.norm(), rel=1e-8)

    def test_cutoff_beyond_curve_rejected(self, semigroup, curve):
        f = semigroup.bump(2)
        with pytest.raises(ValidationError):
            semigroup.decomposition(curve, CutoffProfile(xi1=2.0 * curve.xi1), f)

    def test_modulation_of_kernel_is_constant(self, semigroup, curve, cutoff):
        f = semigroup.kernel_field(2)
        gamma = semigroup.modulation_gamma(curve, cutoff, f, 4.0)
        # f = phi' is the shift by one unit of phase
        assert gamma.asymptotic_phase == pytest.approx(1.0, rel=1e-8)
        assert gamma.deviation() <= 1e-8


class TestWhitham:
    def test_heat_solution_at_zero(self):
        xi = np.array([-0.2, 0.0, 0.2])
        amps = np.array([1.0, 2.0, 1.0], dtype=complex)
        x = np.linspace(0.0, 10.0, 5)
        w = heat_solution(0.0, 1.0, xi, amps, 4.0, 0.0, x)
        assert np.allclose(w, (2.0 + 2.0 * np.cos(0.2 * x)) / 4.0)

    def test_exact_multipliers_give_zero_error(self, curve):
        T = curve.T
        xi = np.array([-0.02, 0.0, 0.02])
        rates = 1j * curve.a * xi - curve.d * xi ** 2
        gamma = FieldSample(N=4, T=T, n_grid=8, values=np.zeros(8, dtype=complex))
        initial = ModulationField(N=4, t=0.0, T=T, gamma=gamma, asymptotic_phase=0.0,
                                  xi=xi, amplitudes=np.ones(3, dtype=complex), rates=rates)
        comparison = whitham_compare(curve, initial, [0.0, 10.0, 100.0])
        assert np.all(comparison.errors == 0.0)
        assert comparison.fit is None

    def test_error_is_the_mode_sum(self, curve, rng):
        N, T = 8, curve.T
        xi = 2.0 * math.pi * np.array([-2, -1, 1, 2]) / (N * T)
        amps = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        rates = 1j * curve.a * xi - (curve.d + 0.1) * xi ** 2
        gamma = FieldSample(N=N, T=T, n_grid=8, values=np.zeros(8, dtype=complex))
        initial = ModulationField(N=N, t=0.0, T=T, gamma=gamma, asymptotic_phase=0.0,
                                  xi=xi, amplitudes=amps, rates=rates)
        t = 3.0
        gap = amps * (np.exp(rates * t) - np.exp((1j * curve.a * xi - curve.d * xi ** 2) * t))
        expected = math.sqrt(float(np.sum(np.abs(gap) ** 2)) / (N * T))
        assert whitham_compare(curve, initial, [t]).errors[0] == pytest.approx(expected, rel=1e-10)

    def test_late_time_grid_and_window(self, curve, cutoff):
        times = whitham_times(curve.d, cutoff.xi1)
        assert len(times) == settings.WHITHAM_TIMES
        assert times[0] == pytest.approx(settings.WHITHAM_ONSET / (curve.d * cutoff.xi1 ** 2))
        assert times[-1] / times[0] == pytest.approx(10.0 ** settings.WHITHAM_DECADES)
        N = whitham_window(curve.T, curve.d, times[-1])
        assert fit_window(N, curve.T, curve.d)[1] >= times[-1]
        assert fit_window(N - 1, curve.T, curve.d)[1] < times[-1]
        with pytest.raises(ValidationError):
            whitham_times(curve.d, 0.0)

    @pytest.mark.slow
    def test_modulation_follows_whitham(self, semigroup, curve, cutoff):
        comparison = semigroup.whitham_run(curve, cutoff, width=2.0, weights=(1.0, 0.4))
        assert comparison.errors[-1] < comparison.errors[0]
        assert comparison.fit is not None
        assert comparison.fit.fitted_exponent >= 0.70

    def test_multiplier_gap_is_cubic(self, curve, cutoff):
        times = [1.0, 10.0, 100.0]
        gap = whitham_multiplier_gap(curve, cutoff, times)
        assert 0.0 < gap < math.inf
        xi = curve.xi_samples
        quadratic = curve.model_copy(update={"lambda_c": 1j * curve.a * xi - curve.d * xi ** 2})
        assert whitham_multiplier_gap(quadratic, cutoff, times) == 0.0

    def test_difference_quotient_bounded(self, curve, cutoff):
        bound = difference_quotient_bound(curve, cutoff)
        assert 0.0 < bound < math.inf
        assert difference_quotient_bound(curve, CutoffProfile(xi1=1e-9 * curve.xi1)) == 0.0


class TestSweeps:
    def test_uniform_sweep_rows(self, semigroup, curve, cutoff, verdict):
        t_grid = np.concatenate([[0.0], np.geomspace(1.0, 50.0, 9)])
        sweep = semigroup.uniform_sweep(curve, cutoff, semigroup.bump_family(seed=3), [1, 2], t_grid,
                                        delta_table=verdict.delta_N_table)
        assert [row.N for row in sweep.rows] == [1, 2]
        assert len(sweep.decay_rows) == 2 * len(t_grid)
        assert all(row.prefactor > 0 for row in sweep.rows)
        assert sweep.rows[0].diffusive_rate == pytest.approx(verdict.delta_N_table[1])
        eta2 = semigroup.bloch.off_critical_rate(curve, cutoff, N=2)
        assert sweep.rows[1].diffusive_rate == pytest.approx(min(eta2, curve.d * (math.pi / semigroup.T) ** 2))
        assert sweep.eta == pytest.approx(min(eta2, semigroup.bloch.off_critical_rate(curve, cutoff, N=1)))
        assert sweep.prefactor_spread >= 1.0

    @pytest.mark.slow
    def test_prefactor_uniform_in_N(self, semigroup, curve, cutoff):
        t_grid = np.concatenate([[0.0], np.geomspace(1.0, 2000.0, 61)])
        sweep = semigroup.uniform_sweep(curve, cutoff, semigroup.bump_family(), [1, 2, 4, 8, 16, 32], t_grid)
        assert sweep.prefactor_spread <= 3.0
        row8 = next(row for row in sweep.rows if row.N == 8)
        assert row8.late_rate == pytest.approx(row8.delta_N, rel=0.25)
        assert row8.diffusive_rate == pytest.approx(row8.delta_N, rel=0.25)
        large = [row for row in sweep.rows if row.N >= 16]
        assert large and all(row.residual_exponent is not None for row in large)
        assert min(row.residual_exponent for row in large) >= 0.70

    @pytest.mark.slow
    def test_localized_run(self, semigroup, curve, cutoff):
        v = semigroup.bump(64, width=2.0, weights=(1.0, 0.4), center=32 * semigroup.T)
        report = semigroup.localized_pipeline(curve, cutoff, v, np.concatenate([[0.0], np.geomspace(1.0, 200.0, 40)]))
        assert np.all(report.closure_residuals <= 1e-8 * v.norm())
        assert np.all(report.leaks <= 1e-10)
        assert report.kernel_fit is not None
        assert report.kernel_fit.fitted_exponent >= 0.2
        assert report.residual_fit is not None
        assert report.residual_fit.fitted_exponent >= 0.70

    @pytest.mark.slow
    def test_window_bound(self, semigroup, curve, cutoff):
        bound = semigroup.window_bound(curve, cutoff, windows=(32, 64))
        assert all(c <= bound.bound * (1.0 + 1e-6) for c in bound.constants)
