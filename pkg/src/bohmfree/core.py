"""Uniform 1D grids, sampled fields and second-order finite differences."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Raised when an input falls outside the domain of an operation."""


class GridError(DomainError):
    pass


@dataclass(frozen=True)
class Units:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise DomainError(f"hbar must be positive and finite, got {self.hbar}")
        if not (self.mass > 0 and np.isfinite(self.mass)):
            raise DomainError(f"mass must be positive and finite, got {self.mass}")


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_max <= self.x_min:
            raise GridError(f"invalid bounds: x_min={self.x_min}, x_max={self.x_max}")
        if int(self.n) != self.n or self.n < 8:
            raise GridError(f"too few points: n={self.n} (need at least 8)")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def describe(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n": self.n, "dx": self.dx}


def make_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), int(n))


def grid_with_spacing(x_min: float, x_max: float, dx: float) -> Grid1D:
    """Grid starting at ``x_min`` with spacing exactly ``dx``; ``x_max`` is rounded to fit."""
    n = int(round((x_max - x_min) / dx)) + 1
    return make_grid(x_min, x_min + (n - 1) * dx, n)


def _checked(values, n: int, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    if arr.shape != (n,):
        raise DomainError(f"field has shape {arr.shape}, grid expects ({n},)")
    if not np.all(np.isfinite(arr)):
        raise DomainError("field contains non-finite values")
    return arr


@dataclass(frozen=True)
class RealField:
    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _checked(self.values, self.grid.n, float))

    def __add__(self, other):
        return RealField(self.grid, self.values + _raw(other))

    def __sub__(self, other):
        return RealField(self.grid, self.values - _raw(other))

    def __mul__(self, other):
        return RealField(self.grid, self.values * _raw(other))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class ComplexField:
    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _checked(self.values, self.grid.n, complex))

    @property
    def real(self) -> RealField:
        return RealField(self.grid, self.values.real)

    @property
    def imag(self) -> RealField:
        return RealField(self.grid, self.values.imag)

    def density(self) -> RealField:
        return RealField(self.grid, np.abs(self.values) ** 2)


def _raw(other):
    return other.values if isinstance(other, (RealField, ComplexField)) else other


def sample(grid: Grid1D, func) -> RealField:
    return RealField(grid, func(grid.x))


def diff1(f: np.ndarray, dx: float) -> np.ndarray:
    """Central first derivative, second-order one-sided at both ends."""
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx)
    return out


def diff2(f: np.ndarray, dx: float) -> np.ndarray:
    """Central second derivative, second-order one-sided (4-point) at both ends."""
    out = np.empty_like(f)
    inv = 1.0 / (dx * dx)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) * inv
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) * inv
    return out


def d1(field: RealField) -> RealField:
    return RealField(field.grid, diff1(field.values, field.grid.dx))


def d2(field: RealField) -> RealField:
    return RealField(field.grid, diff2(field.values, field.grid.dx))


def trapezoid_weights(n: int, dx: float) -> np.ndarray:
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def l2_norm(field: RealField | ComplexField) -> float:
    """sqrt(integral |f|^2 dx) with the trapezoid rule."""
    g = field.grid
    return float(np.sqrt(np.sum(np.abs(field.values) ** 2 * trapezoid_weights(g.n, g.dx))))
