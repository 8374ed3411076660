import math

import numpy as np
import pytest

from app.core.exceptions import GridMismatchError, ValidationError, WindowLeakError
from app.models.field import FieldSample
from app.services.transforms import (
    bloch_T,
    bloch_localized,
    cell_resolution,
    inverse_bloch,
    lattice,
    lattice_riemann_sum,
    parseval_subharmonic,
    periodic_extension,
    periodic_pairing,
    random_identity_check,
    sample_field,
    window_leak,
)

T = 2.0 * math.pi


def random_field(rng, N, n_cell=16):
    n = N * n_cell
    return FieldSample(N=N, T=T, n_grid=n, values=rng.standard_normal(n) + 1j * rng.standard_normal(n))


def gaussian(N, width=1.0, n_cell=32):
    center = N * T / 2

    def fn(x):
        return np.exp(-((x - center) ** 2) / (2.0 * width ** 2))

    return sample_field(fn, N, T, n_cell)


class TestLattice:
    @pytest.mark.parametrize("N", [1, 2, 3, 4, 7, 8])
    def test_points(self, N):
        lat = lattice(N, T)
        assert len(lat.frequencies) == N
        assert 0.0 in lat.frequencies
        assert np.all(lat.frequencies >= -math.pi / T)
        assert np.all(lat.frequencies < math.pi / T)
        assert lat.spacing == pytest.approx(2.0 * math.pi / (N * T))

    def test_nesting(self):
        assert lattice(8, T).contains(lattice(4, T))
        assert not lattice(4, T).contains(lattice(8, T))
        assert not lattice(6, T).contains(lattice(4, T))

    def test_invalid(self):
        with pytest.raises(ValidationError):
            lattice(0, T)
        with pytest.raises(ValidationError):
            lattice(4, -1.0)

    def test_cell_resolution(self):
        assert cell_resolution(1) == 8
        assert cell_resolution(32) == 256
        assert cell_resolution(32) >= 4 * 32 + 2


class TestBlochTransform:
    @pytest.mark.parametrize("N", [1, 2, 3, 8])
    def test_inverse(self, rng, N):
        g = random_field(rng, N)
        back = inverse_bloch(bloch_T(g))
        assert np.max(np.abs(back.values - g.values)) <= 1e-12 * np.max(np.abs(g.values))

    @pytest.mark.parametrize("N", [1, 2, 4, 16])
    def test_parseval(self, rng, N):
        f, g = random_field(rng, N), random_field(rng, N)
        lhs, rhs = parseval_subharmonic(f, g)
        assert abs(lhs - rhs) <= 1e-12 * f.norm() * g.norm()

    def test_periodic_function_lives_on_zero_slice(self):
        coeffs = np.zeros(7, dtype=complex)
        coeffs[[2, 3, 5]] = [0.5, 1.0, 0.25j]
        g = periodic_extension(coeffs, 4, T, 16)
        values = bloch_T(g).values
        zero = lattice(4, T).zero_position
        others = np.delete(values, zero, axis=0)
        assert np.max(np.abs(others)) <= 1e-12 * np.max(np.abs(values[zero]))

    def test_periodic_pairing(self, rng):
        f_coeffs = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        g = random_field(rng, 4)
        f = periodic_extension(f_coeffs, 4, T, 16)
        assert periodic_pairing(f_coeffs, g) == pytest.approx(f.inner(g), rel=1e-10)

    def test_grid_mismatch(self, rng):
        with pytest.raises(GridMismatchError):
            parseval_subharmonic(random_field(rng, 2), random_field(rng, 4))

    def test_random_identities(self, rng):
        worst = random_identity_check(4, T, 16, rng, samples=5)
        assert worst["parseval"] <= 1e-12
        assert worst["inverse"] <= 1e-12
        assert worst["product"] <= 1e-10


class TestLocalized:
    def test_leak_of_centered_gaussian(self):
        assert window_leak(gaussian(16)) <= 1e-10

    def test_leak_of_periodic_field(self):
        f = periodic_extension(np.array([0.5, 1.0, 0.5], dtype=complex), 4, T, 16)
        assert window_leak(f) > 0.1

    def test_parseval_on_window(self):
        result = bloch_localized(gaussian(16))
        assert result.parseval_discrepancy <= 1e-12
        assert len(result.xi) == 16

    def test_zero_extension(self):
        result = bloch_localized(gaussian(16), n_xi=32)
        assert len(result.xi) == 32
        assert result.parseval_discrepancy <= 1e-12
        with pytest.raises(ValidationError):
            bloch_localized(gaussian(16), n_xi=8)

    def test_leaking_window_rejected(self):
        with pytest.raises(WindowLeakError):
            bloch_localized(periodic_extension(np.array([0.5, 1.0, 0.5], dtype=complex), 4, T, 16))


class TestRiemannSum:
    @pytest.mark.parametrize("N", [1, 3, 8])
    def test_constant(self, N):
        assert lattice_riemann_sum(lambda xi: np.ones_like(xi), N, T) == pytest.approx(1.0 / T)

    def test_converges_to_integral(self):
        # (1/2 pi) int exp(-xi^2) over [-1/2, 1/2]
        exact = math.sqrt(math.pi) * math.erf(0.5) / (2.0 * math.pi)
        coarse = abs(lattice_riemann_sum(lambda xi: np.exp(-xi ** 2), 8, T) - exact)
        fine = abs(lattice_riemann_sum(lambda xi: np.exp(-xi ** 2), 64, T) - exact)
        assert fine < coarse
