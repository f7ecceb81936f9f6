"""Uniform centered grids on R^d, sampled functions, and dense operator
matrices with the quadrature weight folded into application.

Grid points are x_k = -R + k h with h = 2R/n, k = 0..n-1.  The dual grid has
spacing pi/R and covers [-pi n/(2R), pi n/(2R)), so h_x * h_xi * n = 2 pi and
the weighted discrete Fourier map is an isometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symplectic import DimensionError


@dataclass(frozen=True)
class GridSpec:
    d: int
    n: int
    R: float

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError(f"d must be >= 1, got {self.d}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if self.R <= 0:
            raise ValueError(f"R must be positive, got {self.R}")

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.n

    @property
    def dual_h(self) -> float:
        return np.pi / self.R

    def points(self) -> np.ndarray:
        """1D axis points; the full grid is the d-fold product."""
        return -self.R + self.h * np.arange(self.n)

    def dual_points(self, stride: int = 1) -> np.ndarray:
        if stride < 1 or self.n % stride:
            raise ValueError(f"stride {stride} must divide n={self.n}")
        full = (np.arange(self.n) - self.n // 2) * self.dual_h
        return full[::stride]

    def size(self) -> int:
        return self.n**self.d

    def to_dict(self) -> dict:
        return {"d": self.d, "n": self.n, "R": self.R}


@dataclass(frozen=True)
class GridFunction:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        if values.size != self.spec.size():
            raise DimensionError(
                f"expected {self.spec.size()} values, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function has non-finite values")

    @classmethod
    def sample(cls, spec: GridSpec, func) -> "GridFunction":
        """Sample a callable on the grid.  The callable takes d arrays (a
        meshgrid) and returns complex values."""
        axes = [spec.points()] * spec.d
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(spec, np.asarray(func(*mesh), dtype=complex).reshape(-1))

    def reshaped(self) -> np.ndarray:
        return self.values.reshape((self.spec.n,) * self.spec.d)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values) * self.spec.h ** (self.spec.d / 2))

    def inner(self, other: "GridFunction") -> complex:
        if self.spec != other.spec:
            raise DimensionError("grid specs differ")
        return complex(np.vdot(other.values, self.values) * self.spec.h**self.spec.d)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if self.spec != other.spec:
            raise DimensionError("grid specs differ")
        return GridFunction(self.spec, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        if self.spec != other.spec:
            raise DimensionError("grid specs differ")
        return GridFunction(self.spec, self.values - other.values)

    def __mul__(self, scalar) -> "GridFunction":
        return GridFunction(self.spec, self.values * scalar)

    __rmul__ = __mul__

    def boundary_mass(self) -> float:
        """Largest magnitude on the outermost grid layer, relative to the max."""
        arr = np.abs(self.reshaped())
        peak = arr.max()
        if peak == 0:
            return 0.0
        edge = 0.0
        for axis in range(self.spec.d):
            edge = max(edge, np.take(arr, 0, axis=axis).max(),
                       np.take(arr, -1, axis=axis).max())
        return float(edge / peak)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense kernel matrix K(x_k, x_l); application includes the quadrature
    weight h^d so that apply approximates (Af)(x) = int K(x, y) f(y) dy."""

    spec: GridSpec
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", entries)
        m = self.spec.size()
        if entries.shape != (m, m):
            raise DimensionError(f"expected shape {(m, m)}, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("operator matrix has non-finite entries")

    @property
    def weight(self) -> float:
        return self.spec.h**self.spec.d

    def apply(self, f: GridFunction) -> GridFunction:
        if f.spec != self.spec:
            raise DimensionError("grid specs differ")
        return GridFunction(self.spec, self.weight * (self.entries @ f.values))

    def compose(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.spec != other.spec:
            raise DimensionError("grid specs differ")
        return OperatorMatrix(self.spec, self.weight * (self.entries @ other.entries))

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.spec, self.entries.conj().T)

    def weighted(self) -> np.ndarray:
        """Matrix of the operator on the weighted l2 space (unitary iff the
        operator is an l2 isometry on the grid)."""
        return self.weight * self.entries

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.weighted(), 2))

    def eigenvalues_hermitian(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.weighted())


def identity_operator(spec: GridSpec) -> OperatorMatrix:
    return OperatorMatrix(spec, np.eye(spec.size()) / spec.h**spec.d)


def operator_distance(K1: OperatorMatrix, K2: OperatorMatrix, relative: bool = True) -> float:
    diff = np.linalg.norm(K1.weighted() - K2.weighted(), 2)
    if not relative:
        return float(diff)
    scale = max(np.linalg.norm(K1.weighted(), 2), np.linalg.norm(K2.weighted(), 2), 1e-300)
    return float(diff / scale)


def fourier_matrix(spec: GridSpec, sign: float = -1.0) -> np.ndarray:
    """Dense matrix of (2 pi)^{-d/2} int e^{sign i <x, y>} f(y) dy sampled on
    the same grid (trapezoid weight h^d included)."""
    pts = spec.points()
    if spec.d == 1:
        return (2 * np.pi) ** (-0.5) * spec.h * np.exp(sign * 1j * np.outer(pts, pts))
    axes = [pts] * spec.d
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, spec.d)
    phase = X @ X.T
    return (2 * np.pi) ** (-spec.d / 2) * spec.h**spec.d * np.exp(sign * 1j * phase)


def dual_fourier_matrix(spec: GridSpec, stride: int = 1, sign: float = -1.0) -> np.ndarray:
    """Matrix mapping axis samples to dual-grid samples of the 1D transform
    (2 pi)^{-1/2} int e^{sign i xi y} f(y) dy."""
    xi = spec.dual_points(stride)
    y = spec.points()
    return (2 * np.pi) ** (-0.5) * spec.h * np.exp(sign * 1j * np.outer(xi, y))


def hermite_values(k: int, x: np.ndarray) -> np.ndarray:
    """L2-normalized Hermite function h_k; h_0 = pi^{-1/4} e^{-x^2/2}."""
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = np.pi ** (-0.25) * np.exp(-0.5 * x**2)
    for j in range(1, k + 1):
        h, h_prev = np.sqrt(2.0 / j) * x * h - np.sqrt((j - 1.0) / j) * h_prev, h
    return h


def hermite_grid_function(spec: GridSpec, ks) -> GridFunction:
    """Tensor-product Hermite function with per-axis indices ks."""
    if isinstance(ks, int):
        ks = (ks,) * spec.d
    if len(ks) != spec.d:
        raise DimensionError(f"need {spec.d} indices, got {len(ks)}")

    def func(*mesh):
        out = np.ones_like(mesh[0], dtype=complex)
        for axis, k in enumerate(ks):
            out = out * hermite_values(k, mesh[axis])
        return out

    return GridFunction.sample(spec, func)


def gaussian_window(spec: GridSpec) -> GridFunction:
    """psi_0 = pi^{-d/4} e^{-|x|^2 / 2}."""
    return hermite_grid_function(spec, 0)
