"""Fourier basis on a uniform grid and grid-averaged curve decomposition."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, ResolutionExceeded


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``t_l = a + (b - a) * l / r`` for ``l = 1..r``."""

    a: float
    b: float
    r: int

    def __post_init__(self):
        if not self.b > self.a:
            raise InvalidParameter(f"grid needs b > a, got a={self.a}, b={self.b}")
        if int(self.r) != self.r or self.r < 2:
            raise InvalidParameter(f"grid needs an integer r >= 2, got {self.r}")

    @property
    def points(self):
        return self.a + (self.b - self.a) * np.arange(1, self.r + 1) / self.r

    @property
    def spacing(self):
        return (self.b - self.a) / self.r


@dataclass
class CurveSet:
    """Curves sampled on a shared grid; ``values`` is (n_rep, n_units, r)."""

    grid: Grid
    values: np.ndarray
    labels: list = field(default_factory=list)
    interpolated: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 2:
            self.values = self.values[None]
        if self.values.ndim != 3 or self.values.shape[2] != self.grid.r:
            raise DimensionMismatch(
                f"values shape {self.values.shape} does not match grid with r={self.grid.r}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameter("curve values must be finite")
        if not self.labels:
            self.labels = [str(k + 1) for k in range(self.n_units)]

    @property
    def n_rep(self):
        return self.values.shape[0]

    @property
    def n_units(self):
        return self.values.shape[1]


@dataclass
class FourierCoeffs:
    """Coefficients ``coeffs[i, j-1, k]`` of replicate i, frequency j, unit k."""

    coeffs: np.ndarray
    labels: list = field(default_factory=list)

    @property
    def n_rep(self):
        return self.coeffs.shape[0]

    @property
    def p(self):
        return self.coeffs.shape[1]

    @property
    def n_units(self):
        return self.coeffs.shape[2]


def basis_eval(j, grid):
    """Values of the j-th basis function (1-based) at the grid points.

    ``psi_1 = 1``, ``psi_2m = sin(pi m u)``, ``psi_2m+1 = cos(pi m u)`` with
    ``u = 2 (t - a) / (b - a) - 1``.
    """
    if j < 1:
        raise InvalidParameter(f"basis index must be >= 1, got {j}")
    if j == 1:
        return np.ones(grid.r)
    u = 2.0 * (grid.points - grid.a) / (grid.b - grid.a) - 1.0
    m = j // 2
    return np.sin(np.pi * m * u) if j % 2 == 0 else np.cos(np.pi * m * u)


def basis_matrix(p, grid):
    """(p, r) matrix whose row j-1 is :func:`basis_eval` ``(j, grid)``."""
    return np.vstack([basis_eval(j, grid) for j in range(1, p + 1)])


def decompose(curves, p):
    """Grid-averaged projections ``(1/r) sum_l Y(t_l) psi_j(t_l)``, j = 1..p."""
    if p > curves.grid.r:
        raise ResolutionExceeded(f"p={p} exceeds the grid resolution r={curves.grid.r}")
    if p < 1:
        raise InvalidParameter("p must be >= 1")
    psi = basis_matrix(p, curves.grid)
    # (n_rep, n_units, r) x (r, p) -> (n_rep, p, n_units)
    coeffs = np.einsum("ikl,jl->ijk", curves.values, psi) / curves.grid.r
    return FourierCoeffs(coeffs, list(curves.labels))


def reconstruct(coeffs, grid):
    """Inverse of :func:`decompose` for curves spanned by the first p basis
    functions: frequencies j >= 2 carry the factor 2 lost to grid averaging.
    """
    if coeffs.p > grid.r:
        raise ResolutionExceeded(f"p={coeffs.p} exceeds the grid resolution r={grid.r}")
    psi = basis_matrix(coeffs.p, grid)
    scale = np.full(coeffs.p, 2.0)
    scale[0] = 1.0
    values = np.einsum("ijk,jl->ikl", coeffs.coeffs * scale[None, :, None], psi)
    return CurveSet(grid, values, list(coeffs.labels))
