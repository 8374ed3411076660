"""
Shared fixtures: one converged bifurcating wave (alpha = 1, mu = 1e-2) and
the spectral objects built on it. Session scoped, since the eigensolves
behind the verdict dominate the test time.
"""

import numpy as np
import pytest

from app.config import settings
from app.models.dynamics import CutoffProfile
from app.models.wave import LleParams
from app.services.blochop import BlochService
from app.services.semigroup import SemigroupService
from app.services.wave import WaveService

ALPHA = 1.0
MU = 1e-2


@pytest.fixture(scope="session")
def wave_service():
    return WaveService()


@pytest.fixture(scope="session")
def seed_wave(wave_service):
    return wave_service.bifurcation_seed(ALPHA, MU)


@pytest.fixture(scope="session")
def wave(wave_service, seed_wave):
    return wave_service.newton_solve(seed_wave)


@pytest.fixture(scope="session")
def bloch(wave):
    return BlochService(wave)


@pytest.fixture(scope="session")
def verdict(bloch):
    return bloch.check_diffusive_stability(N_list=[1, 2, 4])


@pytest.fixture(scope="session")
def curve(bloch, verdict):
    return bloch.critical_curve(verdict.xi1, 17, verdict)


@pytest.fixture(scope="session")
def cutoff(curve):
    return CutoffProfile(xi1=curve.xi1)


@pytest.fixture(scope="session")
def semigroup(bloch):
    return SemigroupService(bloch)


@pytest.fixture(scope="session")
def unstable_constant(wave_service):
    """Constant state at alpha = 1, F = 1.5: modulationally unstable near q = 1.5"""
    return wave_service.constant_wave(LleParams(alpha=1.0, F=1.5), T=2.0 * np.pi, M=8)


@pytest.fixture
def rng():
    return np.random.default_rng(settings.DEFAULT_SEED)
