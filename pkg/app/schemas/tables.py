"""
CSV artifact schemas and the validation run before a file enters the manifest
"""

from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from app.core.exceptions import ValidationError
from app.models.dynamics import DECAY_COLUMNS, UNIFORM_COLUMNS
from app.models.riemann import SHARPNESS_COLUMNS, SharpnessSummary
from app.schemas.bloch import SPECTRUM_COLUMNS, CurveFile, VerdictFile
from app.schemas.field import BlochCoefficientFile, FieldFile
from app.schemas.wave import WaveFile
from app.utils.io import PathLike, read_csv, read_json

LOCALIZED_COLUMNS = ("t", "norm_minus_kernel", "norm_phase", "norm_residual", "closure_residual", "leak")
WHITHAM_COLUMNS = ("t", "error")

CSV_SCHEMAS: Dict[str, Tuple[str, ...]] = {
    "spectrum": SPECTRUM_COLUMNS,
    "uniform": UNIFORM_COLUMNS,
    "decay": DECAY_COLUMNS,
    "sharp": SHARPNESS_COLUMNS,
    "localized": LOCALIZED_COLUMNS,
    "whitham": WHITHAM_COLUMNS,
}


JSON_SCHEMAS: Dict[str, type] = {
    "wave": WaveFile,
    "verdict": VerdictFile,
    "curve": CurveFile,
    "sharp_summary": SharpnessSummary,
    "field": FieldFile,
    "bloch_coefficients": BlochCoefficientFile,
}

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _check_csv(path: Path, columns: Tuple[str, ...]) -> None:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
    if tuple(header) != tuple(columns):
        raise ValidationError(f"{path.name}: header {header} differs from {list(columns)}", field=path.name)
    for i, row in enumerate(read_csv(path)):
        if None in row or any(v is None for v in row.values()):
            raise ValidationError(f"{path.name}: row {i + 1} has the wrong number of fields", field=path.name)


def _check_text(path: Path) -> None:
    if not path.read_text(encoding="utf-8").strip():
        raise ValidationError(f"{path.name} is empty", field=path.name)


def _check_png(path: Path) -> None:
    with open(path, "rb") as fh:
        if fh.read(8) != PNG_MAGIC:
            raise ValidationError(f"{path.name} is not a PNG file", field=path.name)


def validator_for(schema_name: str) -> Callable[[Path], None]:
    if schema_name in JSON_SCHEMAS:
        model = JSON_SCHEMAS[schema_name]
        return lambda path: model.model_validate(read_json(path))
    if schema_name in CSV_SCHEMAS:
        columns = CSV_SCHEMAS[schema_name]
        return lambda path: _check_csv(path, columns)
    if schema_name == "markdown":
        return _check_text
    if schema_name == "png":
        return _check_png
    raise ValidationError(f"unknown artifact schema '{schema_name}'", field="schema")


def validate_artifact(path: PathLike, schema_name: str) -> None:
    """Raise ValidationError unless the file parses under its schema"""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"{path} was not written", field=path.name)
    try:
        validator_for(schema_name)(path)
    except ValidationError:
        raise
    except Exception as e:
        raise ValidationError(f"{path.name} fails schema '{schema_name}': {e}", field=path.name)


def float_column(rows: List[dict], name: str) -> List[Optional[float]]:
    """Column as floats; blank cells become None"""
    return [float(r[name]) if r[name] not in ("", None) else None for r in rows]
