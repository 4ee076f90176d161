"""Crank-Nicolson evolution of assembled states under their external potential."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .actions import NON_SEPARABLE, FreeAction, TimeDomainError
from .amplitudes import AmplitudeProfile, WaveState, amplitude_at
from .core import ComplexField, DomainError, Units, trapezoid_weights
from .potentials import PotentialFamily, eval_potential

WALL_TOLERANCE = 1e-8


class WallContaminationError(DomainError):
    pass


class SingularSolveError(RuntimeError):
    pass


@dataclass
class EvolutionRun:
    initial: WaveState
    family: PotentialFamily
    t_start: float
    t_end: float
    steps: int
    boundary: str = "dirichlet-zero"
    snapshots: list = field(default_factory=list)  # (time, ComplexField)
    step_drift: list = field(default_factory=list)
    probability_drift: float = 0.0
    wall_leakage: float = 0.0

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.steps

    @property
    def max_step_drift(self) -> float:
        return max(self.step_drift) if self.step_drift else 0.0


def _norm2(psi: np.ndarray, dx: float) -> float:
    return float(np.sum(np.abs(psi) ** 2 * trapezoid_weights(psi.size, dx)))


def cn_step(psi: ComplexField, p: PotentialFamily | None, t: float, dt: float, units: Units,
            potential: Callable | None = None) -> ComplexField:
    """One Crank-Nicolson step with zero Dirichlet walls.

    The potential is sampled at the midpoint time ``t + dt/2``.  ``potential``
    (a callable ``V(x, t)``) overrides the family's potential.
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    grid = psi.grid
    x = grid.x[1:-1]
    tm = t + 0.5 * dt
    if potential is not None:
        v = np.broadcast_to(np.asarray(potential(x, tm), dtype=float), x.shape)
    else:
        v = eval_potential(p, x, tm)
    hbar, m = units.hbar, units.mass
    kin = hbar**2 / (2.0 * m * grid.dx**2)
    alpha = 0.5j * dt / hbar
    diag = 2.0 * kin + v
    off = -kin
    n = x.size
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = alpha * off
    ab[1, :] = 1.0 + alpha * diag
    ab[2, :-1] = alpha * off
    y = psi.values[1:-1]
    rhs = (1.0 - alpha * diag) * y
    rhs[1:] -= alpha * off * y[:-1]
    rhs[:-1] -= alpha * off * y[1:]
    try:
        inner = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - (I + iH) is never singular
        raise SingularSolveError(str(exc)) from exc
    out = np.zeros(grid.n, dtype=complex)
    out[1:-1] = inner
    return ComplexField(grid, out)


def _edge(psi: np.ndarray) -> float:
    return float(max(abs(psi[1]), abs(psi[-2])))


def _check_walls(psi: np.ndarray, peak: float, tol: float, t: float):
    edge = _edge(psi)
    if edge > tol * peak:
        raise WallContaminationError(
            f"|psi| at the walls reaches {edge / peak:.3g} of the peak at t={t:.6g} (limit {tol:g}); "
            "widen the domain"
        )


def evolve(initial: WaveState, family: PotentialFamily, t_end: float, steps: int, *,
           snapshots: int = 5, potential: Callable | None = None,
           reference: Callable | None = None,
           wall_tolerance: float = WALL_TOLERANCE) -> EvolutionRun:
    """Evolve ``initial`` from its own time to ``t_end`` in ``steps`` CN steps.

    ``snapshots`` evenly spaced snapshots are stored (the final time included,
    the initial state always first).

    The wall guard requires |psi| next to both walls to stay below
    ``wall_tolerance`` times the initial peak.  With ``reference`` (a callable
    ``A(x, t)`` giving the expected amplitude) the guard is applied to the
    expected state at every step, so that the O(dx^2) dispersive radiation
    shed by the discretised packet does not trip it; that radiation is
    recorded as ``wall_leakage`` instead.  Without it the evolved psi is guarded.
    """
    if steps < 1:
        raise DomainError("steps must be at least 1")
    t_start = initial.time
    if not t_end > t_start:
        raise DomainError("t_end must exceed the initial time")
    if family.variant == NON_SEPARABLE and not t_start > family.action.t0:
        raise TimeDomainError(f"run starts at t={t_start} but the potential needs t > t0={family.action.t0}")
    grid = initial.grid
    psi = initial.psi().values.copy()
    psi[0] = psi[-1] = 0.0
    peak = float(np.max(np.abs(psi)))
    _check_walls(psi, peak, wall_tolerance, t_start)
    dt = (t_end - t_start) / steps
    edges = grid.x[[0, 1, -2, -1]]
    marks = set(np.unique(np.round(np.linspace(0, steps, snapshots + 1)).astype(int)[1:]))
    run = EvolutionRun(initial, family, t_start, t_end, steps)
    run.snapshots.append((t_start, ComplexField(grid, psi)))
    n0 = _norm2(psi, grid.dx)
    prev = n0
    current = ComplexField(grid, psi)
    for i in range(1, steps + 1):
        t = t_start + (i - 1) * dt
        current = cn_step(current, family, t, dt, initial.units, potential)
        if reference is None:
            _check_walls(current.values, peak, wall_tolerance, t + dt)
        else:
            _check_walls(initial.scale * np.asarray(reference(edges, t + dt)), peak, wall_tolerance, t + dt)
        run.wall_leakage = max(run.wall_leakage, _edge(current.values) / peak)
        nrm = _norm2(current.values, grid.dx)
        run.step_drift.append(abs(nrm - prev) / n0)
        prev = nrm
        if i in marks:
            run.snapshots.append((t_start + i * dt, current))
    run.probability_drift = abs(prev - n0) / n0
    return run


def analytic_density(a: FreeAction, amp: AmplitudeProfile, x: np.ndarray, t: float, scale: float = 1.0):
    return (scale * amplitude_at(a, amp, x, t)) ** 2


def density_transport_error(run: EvolutionRun, a: FreeAction, p: PotentialFamily, amp: AmplitudeProfile) -> float:
    """max over snapshots of ||rho_evolved - rho_exact||_2 / ||rho_exact||_2."""
    grid = run.initial.grid
    w = trapezoid_weights(grid.n, grid.dx)
    worst = 0.0
    for t, psi in run.snapshots:
        exact = analytic_density(a, amp, grid.x, t, run.initial.scale)
        num = np.abs(psi.values) ** 2
        err = math.sqrt(np.sum((num - exact) ** 2 * w)) / math.sqrt(np.sum(exact**2 * w))
        worst = max(worst, err)
    return worst


def phase_agreement(run: EvolutionRun, a: FreeAction, threshold: float = 1e-3) -> float:
    """Largest deviation of the unwrapped evolved phase from S / hbar.

    Compared where |psi| exceeds ``threshold`` times its peak, after removing
    the mean offset at each snapshot (a global phase is unobservable).
    """
    grid = run.initial.grid
    hbar = a.units.hbar
    worst = 0.0
    for t, psi in run.snapshots:
        vals = psi.values
        keep = np.abs(vals) > threshold * np.abs(vals).max()
        idx = np.flatnonzero(keep)
        seg = slice(idx[0], idx[-1] + 1)
        phase = np.unwrap(np.angle(vals[seg]))
        diff = phase - a.value(grid.x[seg], t) / hbar
        d = diff[keep[seg]]
        worst = max(worst, float(np.max(np.abs(d - d.mean()))))
    return worst
