import math

import pytest

from app.core.exceptions import AcceptanceFailure, HashMismatchError
from app.schemas.manifest import load_manifest
from app.schemas.run import RunConfig
from app.services.pipeline import STAGES, Pipeline


def constant_config(output_dir, **overrides) -> RunConfig:
    """Cheap run on an unstable constant state"""
    data = {
        "params": {"alpha": 1.0, "F": 1.5},
        "mu": None,
        "T": 2.0 * math.pi,
        "M": 8,
        "N_list": [1, 2],
        "t_grid": {"start": 0.0, "stop": 10.0, "count": 5},
        "xi_grid": {"n_points": 41},
        "localized": {"enabled": False},
        "sharpness": {"N_list": [4, 8], "t_list": [1.0, 4.0]},
        "precision_mode": "standard",
        "plots": False,
        "output_dir": str(output_dir),
    }
    data.update(overrides)
    return RunConfig.model_validate(data)


@pytest.fixture
def finished_run(tmp_path):
    config = constant_config(tmp_path / "run")
    pipeline = Pipeline(config, max_workers=1)
    pipeline.run()
    return config, pipeline


def test_unstable_wave_stops_after_verdict(finished_run):
    config, pipeline = finished_run
    out = pipeline.out
    assert pipeline.executed == [s.name for s in STAGES]
    assert (out / "wave.json").exists()
    assert (out / "verdict.json").exists()
    assert (out / "spectrum.csv").exists()
    assert not (out / "curve.json").exists()
    assert not (out / "uniform.csv").exists()
    assert (out / "sharp.csv").exists()
    text = (out / "report.md").read_text()
    assert "diffusively spectrally stable: no" in text

    manifest = load_manifest(out)
    assert manifest.stage("curve").outputs == []
    assert [f.path for f in manifest.files] == sorted(f.path for f in manifest.files)


def test_rerun_skips_everything(finished_run):
    config, pipeline = finished_run
    before = (pipeline.out / "manifest.json").read_bytes()
    again = Pipeline(config, max_workers=1)
    again.run()
    assert again.executed == []
    assert again.skipped == [s.name for s in STAGES]
    assert (pipeline.out / "manifest.json").read_bytes() == before


def test_changed_config_reruns_downstream(finished_run):
    config, pipeline = finished_run
    changed = constant_config(pipeline.out, xi_grid={"n_points": 43})
    again = Pipeline(changed, max_workers=1)
    again.run()
    assert again.skipped[0] == "wave"
    assert "sharpness" in again.skipped
    assert "verdict" in again.executed


def test_modified_input_stops_the_run(finished_run):
    config, pipeline = finished_run
    wave_file = pipeline.out / "wave.json"
    wave_file.write_text(wave_file.read_text() + "\n")
    with pytest.raises(HashMismatchError) as exc:
        Pipeline(config, max_workers=1).run()
    assert exc.value.details["path"] == "wave.json"
    assert exc.value.stage == "verdict"

    forced = Pipeline(config, force=True, max_workers=1)
    forced.run()
    assert "verdict" in forced.executed
    assert "wave" in forced.skipped


def test_acceptance_flags_unstable_wave(finished_run):
    config, pipeline = finished_run
    checks = {c.name: c for c in pipeline.acceptance()}
    assert not checks["verdict_stable"].passed
    assert checks["transform_identities"].passed
    assert checks["sharpness_weighted_bounded"].passed
    with pytest.raises(AcceptanceFailure):
        Pipeline(config, max_workers=1).run(check=True)


@pytest.mark.slow
def test_bifurcating_run(tmp_path):
    config = RunConfig(N_list=[1, 2, 4, 8], output_dir=str(tmp_path / "run"), plots=True)
    pipeline = Pipeline(config)
    pipeline.run()
    for name in ("wave.json", "verdict.json", "curve.json", "uniform.csv", "decay.csv",
                 "localized.csv", "whitham.csv", "sharp.csv", "sharp_summary.json", "report.md"):
        assert (pipeline.out / name).exists(), name
    assert "diffusively spectrally stable: yes" in (pipeline.out / "report.md").read_text()

    checks = {c.name: c for c in pipeline.acceptance()}
    for name in ("profile_residual", "profile_amplitude", "profile_period", "verdict_stable",
                 "kernel_residual", "curve_diffusive", "curve_even", "decomposition_closure",
                 "transform_identities", "whitham_exponent"):
        assert checks[name].passed, (name, checks[name].detail)
