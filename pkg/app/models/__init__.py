"""
Numerical value objects of the stability toolkit
"""

# Import base classes first
from .base import ArrayModel, to_plain

# Profile models
from .wave import ALPHA_CRITICAL, BifurcationSeed, LleParams, PeriodicWave, threshold_pump

# Lattice and field models
from .field import BlochCoefficients, FieldSample, SubharmonicLattice

# Spectral models
from .bloch import BlochMatrix, CriticalCurve, SpectralSlice, StabilityCondition, StabilityVerdict

# Dynamics models
from .dynamics import (
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

# Lattice-sum models
from .riemann import (
    CrossoverReport,
    GaussianSumInput,
    SharpnessRecord,
    SharpnessSummary,
    UniformBoundReport,
)

# Export all models
__all__ = [
    # Base classes
    "ArrayModel",
    "to_plain",

    # Profile models
    "LleParams",
    "BifurcationSeed",
    "PeriodicWave",
    "threshold_pump",
    "ALPHA_CRITICAL",

    # Lattice and field models
    "SubharmonicLattice",
    "FieldSample",
    "BlochCoefficients",

    # Spectral models
    "BlochMatrix",
    "SpectralSlice",
    "CriticalCurve",
    "StabilityVerdict",

    # Dynamics models
    "CutoffProfile",
    "DecompositionReport",
    "ModulationField",
    "DecayFit",
    "LocalizedReport",
    "WhithamComparison",
    "UniformSweep",
    "UniformSweepRow",
    "WindowBound",

    # Lattice-sum models
    "GaussianSumInput",
    "SharpnessRecord",
    "SharpnessSummary",
    "UniformBoundReport",
    "CrossoverReport",

    # Enums and constants
    "StabilityCondition",
    "PART_NAMES",
]
