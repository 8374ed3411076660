"""
File-format and run-config schemas
"""

from .wave import WaveFile, load_wave, save_wave
from .bloch import CurveFile, VerdictFile, load_curve, load_verdict, save_curve, save_spectrum, save_verdict
from .field import (
    BlochCoefficientFile, FieldFile, load_bloch_coefficients, load_field, save_bloch_coefficients, save_field,
)
from .run import RunConfig, PrecisionMode, TimeGridSpec, load_run_config, render_template
from .manifest import Manifest, ManifestFile, StageRecord, load_manifest, save_manifest

__all__ = [
    # Artifact files
    "WaveFile", "load_wave", "save_wave",
    "CurveFile", "VerdictFile", "load_curve", "load_verdict", "save_curve", "save_verdict", "save_spectrum",
    "FieldFile", "BlochCoefficientFile", "load_field", "save_field", "load_bloch_coefficients",
    "save_bloch_coefficients",

    # Run configuration
    "RunConfig", "PrecisionMode", "TimeGridSpec", "load_run_config", "render_template",

    # Manifest
    "Manifest", "ManifestFile", "StageRecord", "load_manifest", "save_manifest",
]
