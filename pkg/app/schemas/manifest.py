"""
Pipeline manifest schema
"""

from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from app.utils.io import PathLike, read_json, write_json

MANIFEST_NAME = "manifest.json"


class ManifestFile(BaseModel):
    """One produced file, relative to the output directory"""
    path: str
    sha256: str = Field(..., min_length=64, max_length=64)
    stage: str
    schema_name: str


class StageRecord(BaseModel):
    """Inputs (config sections and upstream files, by hash) and outputs of a stage"""
    name: str
    inputs: Dict[str, str]
    outputs: List[str]


class Manifest(BaseModel):
    """Content-addressed record of a pipeline run"""
    app_name: str
    config_hash: str
    files: List[ManifestFile] = []
    stages: List[StageRecord] = []

    def file(self, path: str) -> Optional[ManifestFile]:
        return next((f for f in self.files if f.path == path), None)

    def stage(self, name: str) -> Optional[StageRecord]:
        return next((s for s in self.stages if s.name == name), None)

    def record(self, stage: StageRecord, files: List[ManifestFile]) -> None:
        """Replace the stage entry and its files; files stay sorted by path"""
        produced = {f.path for f in files}
        self.files = sorted([f for f in self.files if f.path not in produced] + files, key=lambda f: f.path)
        names = [s.name for s in self.stages]
        if stage.name in names:
            self.stages[names.index(stage.name)] = stage
        else:
            self.stages.append(stage)


def save_manifest(manifest: Manifest, directory: PathLike) -> Path:
    return write_json(Path(directory) / MANIFEST_NAME, manifest.model_dump())


def load_manifest(path: PathLike) -> Manifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    return Manifest.model_validate(read_json(path))
