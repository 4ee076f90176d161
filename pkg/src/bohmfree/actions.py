"""Closed-form free-particle actions and their Hamilton-Jacobi residual.

Two families of solutions of (S')^2/2m + dS/dt = 0 are supported:

* separable:      S = k x - k^2 t / 2m
* non-separable:  S = m (x - x0)^2 / 2 (t - t0),  defined for t > t0 only
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, Grid1D, RealField, Units


class TimeDomainError(DomainError):
    pass


SEPARABLE = "separable"
NON_SEPARABLE = "non_separable"


@dataclass(frozen=True)
class FreeAction:
    variant: str
    k: float = 0.0
    x0: float = 0.0
    t0: float = 0.0
    units: Units = field(default_factory=Units)

    def __post_init__(self):
        if self.variant not in (SEPARABLE, NON_SEPARABLE):
            raise DomainError(f"unknown action variant {self.variant!r}")
        for name in ("k", "x0", "t0"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @classmethod
    def separable(cls, k: float, units: Units | None = None) -> "FreeAction":
        return cls(SEPARABLE, k=float(k), units=units or Units())

    @classmethod
    def non_separable(cls, x0: float, t0: float, units: Units | None = None) -> "FreeAction":
        return cls(NON_SEPARABLE, x0=float(x0), t0=float(t0), units=units or Units())

    def check_time(self, t: float) -> None:
        # strict: the action is singular at t = t0
        if self.variant == NON_SEPARABLE and not t > self.t0:
            raise TimeDomainError(f"non-separable action needs t > t0 (t={t}, t0={self.t0})")

    def params(self) -> dict:
        if self.variant == SEPARABLE:
            return {"variant": SEPARABLE, "k": self.k}
        return {"variant": NON_SEPARABLE, "x0": self.x0, "t0": self.t0}

    # analytic pieces -------------------------------------------------
    def value(self, x, t: float):
        self.check_time(t)
        m = self.units.mass
        x = np.asarray(x, dtype=float)
        if self.variant == SEPARABLE:
            return self.k * x - self.k**2 * t / (2.0 * m)
        return m * (x - self.x0) ** 2 / (2.0 * (t - self.t0))

    def dx(self, x, t: float):
        """dS/dx, the momentum p."""
        self.check_time(t)
        x = np.asarray(x, dtype=float)
        if self.variant == SEPARABLE:
            return np.full_like(x, self.k)
        return self.units.mass * (x - self.x0) / (t - self.t0)

    def dxx(self, x, t: float):
        self.check_time(t)
        x = np.asarray(x, dtype=float)
        if self.variant == SEPARABLE:
            return np.zeros_like(x)
        return np.full_like(x, self.units.mass / (t - self.t0))

    def dt(self, x, t: float):
        self.check_time(t)
        m = self.units.mass
        x = np.asarray(x, dtype=float)
        if self.variant == SEPARABLE:
            return np.full_like(x, -self.k**2 / (2.0 * m))
        return -m * (x - self.x0) ** 2 / (2.0 * (t - self.t0) ** 2)


def eval_action(a: FreeAction, x: float, t: float) -> float:
    return float(a.value(x, t))


def momentum_field(a: FreeAction, grid: Grid1D, t: float) -> RealField:
    return RealField(grid, a.dx(grid.x, t))


def hj_residual(a: FreeAction, grid: Grid1D, t: float) -> RealField:
    """(S')^2/2m + dS/dt on the grid, both derivatives analytic."""
    x = grid.x
    return RealField(grid, a.dx(x, t) ** 2 / (2.0 * a.units.mass) + a.dt(x, t))


def hj_residual_of(s_x, s_t, grid: Grid1D, units: Units) -> RealField:
    """Residual for arbitrary derivative callables; used for negative controls."""
    x = grid.x
    return RealField(grid, np.asarray(s_x(x)) ** 2 / (2.0 * units.mass) + np.asarray(s_t(x)))
