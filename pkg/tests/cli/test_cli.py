import json
import math

import numpy as np
import pytest
import yaml

from app.cli import build_parser
from app.core.exceptions import EXIT_OK, EXIT_VALIDATION
from app.main import main
from app.models.dynamics import PART_NAMES
from app.models.field import FieldSample
from app.schemas.bloch import save_curve
from app.schemas.field import load_bloch_coefficients, load_field, save_field
from app.schemas.wave import load_wave, save_wave


def last_json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def test_parser_has_every_command():
    parser = build_parser()
    for command in ("solve", "spectrum", "verdict", "curve", "evolve", "decompose", "sweep", "whitham",
                    "sharpness", "pipeline", "report", "config-template"):
        args = parser.parse_args([command] + _required(command))
        assert args.command == command


def _required(command: str) -> list:
    if command in ("spectrum", "verdict", "curve", "sweep", "whitham"):
        extra = ["--wave", "wave.json"]
        if command in ("sweep", "whitham"):
            extra += ["--curve", "curve.json"]
        return extra
    if command in ("evolve", "decompose"):
        extra = ["--wave", "wave.json", "--N", "2", "--t", "1.0"]
        if command == "decompose":
            extra += ["--curve", "curve.json"]
        return extra
    if command == "pipeline":
        return ["--config", "run.yaml"]
    if command == "report":
        return ["--manifest", "out"]
    return []


def test_missing_command_exits():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_config_template(tmp_path, capsys):
    path = tmp_path / "run.yaml"
    assert main(["config-template", "--output", str(path)]) == EXIT_OK
    assert last_json(capsys)["success"] is True
    assert "mu" in yaml.safe_load(path.read_text())


def test_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "run.yaml"
    path.write_text("mu: -1.0\n")
    assert main(["pipeline", "--config", str(path)]) == EXIT_VALIDATION
    out = last_json(capsys)
    assert out["success"] is False
    assert out["error"]["field"] == "mu"


def test_solve_constant_wave(tmp_path, capsys):
    path = tmp_path / "wave.json"
    code = main(["solve", "--alpha", "1.0", "--F", "1.5", "--T", repr(2.0 * math.pi), "--M", "8",
                 "--output", str(path)])
    assert code == EXIT_OK
    out = last_json(capsys)
    assert out["data"]["M"] == 8
    wave = load_wave(path)
    assert wave.T == 2.0 * math.pi
    assert wave.residual_norm <= 1e-12


def test_solve_needs_a_pump(tmp_path, capsys):
    assert main(["solve", "--output", str(tmp_path / "wave.json")]) == EXIT_VALIDATION
    assert not (tmp_path / "wave.json").exists()
    assert last_json(capsys)["success"] is False


def test_solve_rejects_alpha_above_critical(tmp_path, capsys):
    assert main(["solve", "--alpha", "2.0", "--mu", "0.01", "--output", str(tmp_path / "wave.json")]) == EXIT_VALIDATION
    assert last_json(capsys)["error"]["field"] == "alpha"


def test_verdict_of_unstable_state(tmp_path, capsys):
    wave_path = tmp_path / "wave.json"
    main(["solve", "--alpha", "1.0", "--F", "1.5", "--T", repr(2.0 * math.pi), "--M", "8",
          "--output", str(wave_path)])
    capsys.readouterr()
    code = main(["verdict", "--wave", str(wave_path), "--n-points", "21", "--skip-truncation",
                 "--output", str(tmp_path / "verdict.json")])
    assert code == EXIT_OK
    data = last_json(capsys)["data"]
    assert data["stable"] is False
    assert data["failing_conditions"]
    assert (tmp_path / "verdict.json").exists()


def test_sharpness_command(tmp_path, capsys):
    code = main(["sharpness", "--N-list", "8", "16", "--t-list", "1.0", "--standard",
                 "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    data = last_json(capsys)["data"]
    assert set(data["slopes"]) == {"plain", "weighted"}
    assert (tmp_path / "sharp.csv").exists()


def test_out_is_an_alias():
    parser = build_parser()
    args = parser.parse_args(["decompose"] + _required("decompose") + ["--out", "parts_dir"])
    assert args.output_dir == "parts_dir"
    args = parser.parse_args(["solve", "--out", "w.json"])
    assert args.output == "w.json"


def _constant_wave_file(tmp_path, capsys):
    path = tmp_path / "wave.json"
    main(["solve", "--alpha", "1.0", "--F", "1.5", "--T", repr(2.0 * math.pi), "--M", "8", "--out", str(path)])
    capsys.readouterr()
    return path


def test_evolve_reads_a_field_file(tmp_path, capsys):
    wave_path = _constant_wave_file(tmp_path, capsys)
    T = 2.0 * math.pi
    x = np.arange(128) * 2.0 * T / 128
    shape = np.exp(-((x - T) ** 2) / 2.0)
    f = FieldSample(N=2, T=T, n_grid=128, values=np.stack([shape, 0.5 * shape]).astype(complex))
    field_path = save_field(f, tmp_path / "field.json")
    code = main(["evolve", "--wave", str(wave_path), "--f", str(field_path), "--t", "0.0", "0.5",
                 "--out", str(tmp_path / "evolve.csv")])
    assert code == EXIT_OK
    data = last_json(capsys)["data"]
    assert data["N"] == 2
    assert data["norms"][0] == pytest.approx(f.norm(), rel=1e-8)
    assert (tmp_path / "evolve.csv").exists()


def test_evolve_needs_a_field(tmp_path, capsys):
    wave_path = _constant_wave_file(tmp_path, capsys)
    assert main(["evolve", "--wave", str(wave_path), "--t", "1.0"]) == EXIT_VALIDATION
    assert last_json(capsys)["error"]["field"] == "N"


def test_decompose_writes_part_fields(tmp_path, capsys, wave, curve):
    wave_path = save_wave(wave, tmp_path / "wave.json")
    curve_path = save_curve(curve, tmp_path / "curve.json")
    out = tmp_path / "parts"
    code = main(["decompose", "--wave", str(wave_path), "--curve", str(curve_path), "--N", "2",
                 "--t", "0.0", "1.0", "--out", str(out)])
    assert code == EXIT_OK
    data = last_json(capsys)["data"]
    assert "decay.csv" in data["files"] and "bloch_coefficients.json" in data["files"]
    assert len(data["files"]) == 2 * (1 + len(PART_NAMES)) + 2

    full = load_field(out / "full_t1.json")
    parts = [load_field(out / f"{name}_t1.json") for name in PART_NAMES]
    total = sum(p.values for p in parts)
    assert np.linalg.norm(total - full.values) <= 1e-8 * np.linalg.norm(full.values)
    coeffs = load_bloch_coefficients(out / "bloch_coefficients.json")
    assert coeffs.lattice.N == 2
    assert sorted(coeffs.per_xi) == [-1, 0]
