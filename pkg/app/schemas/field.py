"""
Field and Bloch-coefficient file schemas
"""

from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.models.base import to_plain
from app.models.field import BlochCoefficients, FieldSample
from app.schemas.wave import complex_array
from app.services.transforms import lattice
from app.utils.io import PathLike, read_json, write_json

Pairs = List[Tuple[float, float]]


class FieldFile(BaseModel):
    """Schema for a sampled NT-periodic field: one row of [re, im] pairs per component"""
    N: int = Field(..., ge=1)
    T: float = Field(..., gt=0.0)
    n_grid: int = Field(..., ge=1)
    values: List[Pairs]

    @model_validator(mode="after")
    def check_grid(self) -> "FieldFile":
        if not self.values:
            raise ValueError("a field needs at least one component")
        if any(len(row) != self.n_grid for row in self.values):
            raise ValueError(f"every component must hold n_grid = {self.n_grid} samples")
        return self

    @classmethod
    def from_field(cls, f: FieldSample) -> "FieldFile":
        values = np.asarray(f.values, dtype=complex).reshape(-1, f.n_grid)
        return cls(N=f.N, T=f.T, n_grid=f.n_grid, values=to_plain(values))

    def to_field(self) -> FieldSample:
        values = complex_array(self.values)
        if values.shape[0] == 1:
            values = values[0]
        return FieldSample(N=self.N, T=self.T, n_grid=self.n_grid, values=values)


class BlochCoefficientFile(BaseModel):
    """Schema for B_T(g): per lattice index j, one row of slot-ordered [re, im] pairs per component"""
    N: int = Field(..., ge=1)
    T: float = Field(..., gt=0.0)
    n_cell: int = Field(..., ge=1)
    coefficients: Dict[str, List[Pairs]]

    @model_validator(mode="after")
    def check_lattice(self) -> "BlochCoefficientFile":
        expected = {str(int(j)) for j in lattice(self.N, self.T).indices}
        if set(self.coefficients) != expected:
            raise ValueError(f"coefficients must be keyed by the lattice indices of Omega_{self.N}")
        for key, rows in self.coefficients.items():
            if any(len(row) != self.n_cell for row in rows):
                raise ValueError(f"slice j={key} must hold n_cell = {self.n_cell} coefficients per component")
        return self

    @classmethod
    def from_coefficients(cls, coeffs: BlochCoefficients) -> "BlochCoefficientFile":
        per_xi = {
            str(j): to_plain(np.asarray(v, dtype=complex).reshape(-1, coeffs.n_cell))
            for j, v in coeffs.per_xi.items()
        }
        return cls(N=coeffs.lattice.N, T=coeffs.lattice.T, n_cell=coeffs.n_cell, coefficients=per_xi)

    def to_coefficients(self) -> BlochCoefficients:
        lat = lattice(self.N, self.T)
        stacked = np.array([complex_array(self.coefficients[str(int(j))]) for j in lat.indices])
        if stacked.shape[1] == 1:
            stacked = stacked[:, 0]
        return BlochCoefficients(lattice=lat, n_cell=self.n_cell, values=stacked)


def save_field(f: FieldSample, path: PathLike) -> Path:
    return write_json(path, FieldFile.from_field(f).model_dump())


def load_field(path: PathLike) -> FieldSample:
    return FieldFile.model_validate(read_json(path)).to_field()


def save_bloch_coefficients(coeffs: BlochCoefficients, path: PathLike) -> Path:
    return write_json(path, BlochCoefficientFile.from_coefficients(coeffs).model_dump())


def load_bloch_coefficients(path: PathLike) -> BlochCoefficients:
    return BlochCoefficientFile.model_validate(read_json(path)).to_coefficients()
