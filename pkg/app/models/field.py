"""
Lattice and field models for subharmonic Bloch analysis
"""

import math
from fractions import Fraction
from typing import Dict, List

import numpy as np
from pydantic import Field, model_validator

from app.models.base import ArrayModel


class SubharmonicLattice(ArrayModel):
    """Bloch frequencies xi_j = 2 pi j / (N T) of NT-periodic functions"""

    N: int = Field(..., ge=1)
    T: float = Field(..., gt=0.0)
    indices: np.ndarray
    frequencies: np.ndarray
    spacing: float

    @property
    def fractions(self) -> List[Fraction]:
        """Frequencies as exact multiples j/N of 2 pi / T"""
        return [Fraction(int(j), self.N) for j in self.indices]

    @property
    def zero_position(self) -> int:
        return int(np.flatnonzero(self.indices == 0)[0])

    def position(self, j: int) -> int:
        return int(j - self.indices[0])

    def contains(self, other: "SubharmonicLattice") -> bool:
        """Exact inclusion of other's frequencies in this lattice"""
        if other.T != self.T:
            return False
        return set(other.fractions) <= set(self.fractions)


class FieldSample(ArrayModel):
    """
    Samples of an NT-periodic field on the uniform grid x_m = m NT / n_grid.

    The last axis is the grid; a leading axis of length 2 holds the (v_r, v_i)
    components of a two-component perturbation.
    """

    N: int = Field(..., ge=1)
    T: float = Field(..., gt=0.0)
    n_grid: int = Field(..., ge=1)
    values: np.ndarray

    @model_validator(mode="after")
    def check_grid(self) -> "FieldSample":
        if self.values.shape[-1] != self.n_grid:
            raise ValueError(f"values hold {self.values.shape[-1]} samples, expected n_grid={self.n_grid}")
        return self

    @property
    def length(self) -> float:
        return self.N * self.T

    @property
    def n_cell(self) -> int:
        return self.n_grid // self.N

    @property
    def dx(self) -> float:
        return self.length / self.n_grid

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n_grid) * self.dx

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or not np.any(self.values.imag)

    def inner(self, other: "FieldSample") -> complex:
        """<self, other> in L^2(0, NT), summed over components"""
        return complex(self.dx * np.vdot(self.values, other.values))

    def norm(self) -> float:
        return float(math.sqrt(self.dx) * np.linalg.norm(self.values))

    def l1_norm(self) -> float:
        magnitude = np.abs(self.values)
        if self.values.ndim > 1:
            magnitude = np.sqrt(np.sum(magnitude.reshape(-1, self.n_grid) ** 2, axis=0))
        return float(self.dx * np.sum(magnitude))

    def with_values(self, values: np.ndarray) -> "FieldSample":
        return FieldSample(N=self.N, T=self.T, n_grid=self.n_grid, values=values)

    def real_part(self) -> "FieldSample":
        return self.with_values(np.real(self.values).astype(complex))


class BlochCoefficients(ArrayModel):
    """
    B_T(g)(xi_j, .) for every xi_j of the lattice.

    values has shape (N, ..., n_cell); the last axis holds the T-periodic
    Fourier coefficient of mode l in slot l mod n_cell.
    """

    lattice: SubharmonicLattice
    n_cell: int = Field(..., ge=1)
    values: np.ndarray

    @model_validator(mode="after")
    def check_shape(self) -> "BlochCoefficients":
        if self.values.shape[0] != self.lattice.N or self.values.shape[-1] != self.n_cell:
            raise ValueError(
                f"values must have shape (N={self.lattice.N}, ..., n_cell={self.n_cell}), got {self.values.shape}"
            )
        return self

    @property
    def per_xi(self) -> Dict[int, np.ndarray]:
        """Slot-ordered coefficient arrays keyed by the lattice index j"""
        return {int(j): self.values[i] for i, j in enumerate(self.lattice.indices)}

    def centered(self, M: int) -> np.ndarray:
        """Modes -M..M of every slice, shape (N, ..., 2M+1)"""
        if 2 * M + 1 > self.n_cell:
            raise ValueError(f"M={M} needs at least {2 * M + 1} slots, have {self.n_cell}")
        return self.values[..., np.arange(-M, M + 1) % self.n_cell]

    def cell_values(self) -> np.ndarray:
        """B_T(g)(xi_j, x_m) at the cell grid points x_m = m T / n_cell"""
        return np.fft.ifft(self.values, axis=-1) * self.n_cell
