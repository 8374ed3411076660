import hashlib
import math

import numpy as np

from app.utils.io import atomic_write_text, dumps_json, read_csv, read_json, sha256_file, write_csv, write_json
from app.utils.parallel import ordered_map


def test_atomic_write_creates_parents(tmp_path):
    path = atomic_write_text(tmp_path / "a" / "b" / "out.txt", "hello\n")
    assert path.read_text() == "hello\n"
    assert [p.name for p in path.parent.iterdir()] == ["out.txt"]


def test_sha256(tmp_path):
    path = atomic_write_text(tmp_path / "x.txt", "abc")
    assert sha256_file(path) == hashlib.sha256(b"abc").hexdigest()


def test_json_keeps_full_precision(tmp_path):
    value = {"x": 0.1 + 0.2, "inf": math.inf}
    write_json(tmp_path / "v.json", value)
    back = read_json(tmp_path / "v.json")
    assert back["x"] == 0.1 + 0.2
    assert math.isinf(back["inf"])
    assert dumps_json(value).endswith("\n")


def test_csv_round_trip(tmp_path):
    rows = [(1, np.float64(1.0) / 3.0, "plain"), (2, 2.5, "")]
    path = write_csv(tmp_path / "t.csv", ("N", "value", "label"), rows)
    text = path.read_text()
    assert "np.float64" not in text
    back = read_csv(path)
    assert float(back[0]["value"]) == 1.0 / 3.0
    assert back[1]["label"] == ""


def test_csv_is_deterministic(tmp_path):
    rows = [(1, 0.1), (2, 0.2)]
    first = write_csv(tmp_path / "a.csv", ("N", "v"), rows).read_bytes()
    second = write_csv(tmp_path / "b.csv", ("N", "v"), rows).read_bytes()
    assert first == second


def test_ordered_map_keeps_order():
    def square(x):
        return x * x

    assert ordered_map(square, range(20), max_workers=4) == [x * x for x in range(20)]
    assert ordered_map(square, [3], max_workers=4) == [9]
    assert ordered_map(square, range(5), max_workers=1) == [0, 1, 4, 9, 16]
