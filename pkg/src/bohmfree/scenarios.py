"""Default verification set-ups for every catalog family and the full check sweep."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .actions import SEPARABLE, FreeAction
from .amplitudes import (
    DEFAULT_ODE_TOL,
    AmplitudeProfile,
    assemble_state,
    make_profile,
)
from .core import DomainError, Grid1D, Units, grid_with_spacing
from .potentials import FAMILY_TAGS, SEPARABLE_TAGS, PotentialFamily
from .verify import (
    characteristic_grid,
    cancellation_residual,
    continuity_residual,
    hj_report,
    jump_condition_check,
    liouville_invariant,
    schrodinger_residual,
    skipped_report,
)

SEPARABLE_TIME = 0.5
NON_SEPARABLE_TIME = 1.5
DEFAULT_K = 1.0
DEFAULT_X0 = 0.25
DEFAULT_T0 = -0.5
DEFAULT_DX = 5e-3
LIOUVILLE_STEP = 0.5
# Coulomb windows start where the coarsest grid (dx = 0.02) resolves the 1/s scale
COULOMB_S_LO = 0.4

# reduced-coordinate window checked for each family
REDUCED_RANGES = {
    "constant_force": (-5.0, 2.5),
    "delta_trap": (-5.0, 5.0),
    "moving_coulomb": (COULOMB_S_LO, 5.0),
    "cosine_wave": (-4.0, 4.0),
    "harmonic_z": (-4.0, 4.0),
    "poschl_teller": (-5.0, 5.0),
    "modified_harmonic_z": (-5.0, 5.0),
    "modified_poschl_teller": (-5.0, 5.0),
    "time_decreasing_force": (-5.0, 1.5),
    "decaying_harmonic": (-4.0, 4.0),
    "coulomb_like": (COULOMB_S_LO, 5.0),
    "modified_decaying_harmonic": (-5.0, 5.0),
}

# wide enough for the tails to fall below the normalisation threshold
NORMALIZATION_RANGES = {
    "modified_harmonic_z": (-8.0, 8.0),
    "modified_poschl_teller": (-25.0, 25.0),
    "modified_decaying_harmonic": (-8.0, 8.0),
}


@dataclass(frozen=True)
class Scenario:
    family: PotentialFamily
    s_lo: float
    s_hi: float
    t: float
    ode_tol: float = DEFAULT_ODE_TOL
    prefer: str = "auto"
    seed: dict = field(default_factory=dict)
    amplitude_family: PotentialFamily | None = None
    explicit_grid: Grid1D | None = None

    @property
    def action(self) -> FreeAction:
        return self.family.action

    def grid(self, dx: float = DEFAULT_DX, t: float | None = None) -> Grid1D:
        if self.explicit_grid is not None and t is None:
            return self.explicit_grid
        t = self.t if t is None else t
        lo, hi = self.family.coordinate.inverse(np.array([self.s_lo, self.s_hi]), t)
        return grid_with_spacing(float(lo), float(hi), dx)

    def profile(self, pad: float = 0.05) -> AmplitudeProfile:
        p = self.amplitude_family or self.family
        span = self.s_hi - self.s_lo
        lo = self.s_lo - pad * span
        if p.singular:
            lo = max(0.5 * self.s_lo, self.s_lo - pad * span)
        return make_profile(p, lo, self.s_hi + pad * span, prefer=self.prefer, tol=self.ode_tol, **self.seed)


def default_scenario(tag: str, units: Units | None = None, **params) -> Scenario:
    units = units or Units()
    if tag in SEPARABLE_TAGS:
        action = FreeAction.separable(DEFAULT_K, units)
        t = SEPARABLE_TIME
    else:
        action = FreeAction.non_separable(DEFAULT_X0, DEFAULT_T0, units)
        t = NON_SEPARABLE_TIME
    lo, hi = REDUCED_RANGES[tag]
    return Scenario(PotentialFamily(tag, params, action), lo, hi, t)


def default_scenarios(units: Units | None = None) -> list[Scenario]:
    return [default_scenario(tag, units) for tag in FAMILY_TAGS]


def default_dt(dx: float) -> float:
    """Time step for centred differences: dx^2, so spatial error dominates."""
    return dx * dx


def run_checks(sc: Scenario, dx: float = DEFAULT_DX, dt: float | None = None, tol_scale: float = 1.0,
               overrides: dict | None = None) -> list[dict]:
    """Every applicable check for one scenario, as report dictionaries."""
    p, a = sc.family, sc.action
    if p.tag == "delta_trap":
        jump = jump_condition_check(p.params["gamma"], p.params["beta"], p.units).to_dict()
        reason = "delta potential is a distribution; verified through the jump condition"
        return [jump] + [skipped_report(n, reason) for n in ("hj", "cancellation", "continuity",
                                                           "schrodinger", "liouville")]
    dt = default_dt(dx) if dt is None else dt
    overrides = overrides or {}

    def const(check):
        table = overrides.get(check, {})
        return table.get(p.tag)

    grid = sc.grid(dx)
    amp = sc.profile()
    state = assemble_state(a, p, amp, grid, sc.t)
    reports = [hj_report(a, grid, sc.t)]
    reports.append(cancellation_residual(state, p, constant=const("cancellation"), tol_scale=tol_scale))
    reports.append(continuity_residual(a, p, amp, grid, sc.t, dt, constant=const("continuity"),
                                       tol_scale=tol_scale))
    reports.append(schrodinger_residual(a, p, amp, grid, sc.t, dt, constant=const("schrodinger"),
                                        tol_scale=tol_scale))
    reports.append(liouville_check(sc, amp, grid))
    return [r.to_dict() for r in reports]


def liouville_check(sc: Scenario, amp: AmplitudeProfile, grid: Grid1D):
    """Separable: interpolated translation test.  Non-separable: matched characteristics."""
    a, p = sc.action, sc.family
    if a.variant == SEPARABLE:
        t2 = sc.t + LIOUVILLE_STEP
        g2 = characteristic_grid(a, grid, sc.t, t2)
        # offset so the comparison really interpolates
        off = 0.37 * grid.dx
        g2 = Grid1D(g2.x_min + off, g2.x_max - grid.dx + off, g2.n - 1)
    else:
        t2 = a.t0 + 1.5 * (sc.t - a.t0)
        g2 = characteristic_grid(a, grid, sc.t, t2)
    s1 = assemble_state(a, p, amp, grid, sc.t)
    s2 = assemble_state(a, p, amp, g2, t2)
    return liouville_invariant(a, [s1, s2])


# -- evolution ----------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionCase:
    family: PotentialFamily
    x_min: float
    x_max: float
    t_start: float
    t_end: float
    dx: float = 0.02
    dt: float = 2e-3
    snapshots: int = 5

    @property
    def steps(self) -> int:
        return max(1, int(round((self.t_end - self.t_start) / self.dt)))


# square-integrable families only; windows keep the transported packet clear of the walls
EVOLUTION_WINDOWS = {
    "modified_poschl_teller": (-20.0, 30.0, 0.0, 5.0),
    "modified_harmonic_z": (-15.0, 20.0, 0.0, 5.0),
    "modified_decaying_harmonic": (-25.0, 25.0, DEFAULT_T0 + 1.0, DEFAULT_T0 + 3.0),
}


def default_evolution(tag: str, units: Units | None = None, **params) -> EvolutionCase:
    if tag not in EVOLUTION_WINDOWS:
        raise NotSquareIntegrableError(
            f"{tag} has no square-integrable amplitude; oscillatory or growing states would be "
            "corrupted by the Dirichlet walls, so they are verified by residuals only"
        )
    sc = default_scenario(tag, units, **params)
    x_min, x_max, t_start, t_end = EVOLUTION_WINDOWS[tag]
    return EvolutionCase(sc.family, x_min, x_max, t_start, t_end)


class NotSquareIntegrableError(DomainError):
    pass


def evolution_profile(case: EvolutionCase, grid: Grid1D) -> AmplitudeProfile:
    """Profile covering every reduced coordinate the run visits."""
    coord = case.family.coordinate
    ends = np.concatenate([coord(np.array([grid.x_min, grid.x_max]), t) for t in (case.t_start, case.t_end)])
    lo, hi = float(ends.min()), float(ends.max())
    pad = 0.01 * (hi - lo)
    return make_profile(case.family, lo - pad, hi + pad, n=2001)


def run_evolution(case: EvolutionCase, *, control: bool = False, wall_tolerance: float | None = None):
    """Evolve the normalised constructed state; returns (run, summary dict)."""
    from .amplitudes import amplitude_at, normalize_if_integrable
    from .propagate import WALL_TOLERANCE, density_transport_error, evolve, phase_agreement

    p, a = case.family, case.family.action
    grid = grid_with_spacing(case.x_min, case.x_max, case.dx)
    amp = evolution_profile(case, grid)
    state = normalize_if_integrable(assemble_state(a, p, amp, grid, case.t_start))
    run = evolve(
        state, p, case.t_end, case.steps,
        snapshots=case.snapshots,
        potential=(lambda x, t: np.zeros_like(x)) if control else None,
        reference=lambda x, t: amplitude_at(a, amp, x, t),
        wall_tolerance=WALL_TOLERANCE if wall_tolerance is None else wall_tolerance,
    )
    summary = {
        "family": p.tag,
        "control_zero_potential": control,
        "probability_drift": run.probability_drift,
        "max_step_drift": run.max_step_drift,
        "density_transport_error": density_transport_error(run, a, p, amp),
        "phase_agreement": phase_agreement(run, a),
        "wall_leakage": run.wall_leakage,
        "snapshot_times": [t for t, _ in run.snapshots],
        "grid": grid.describe(),
        "dt": run.dt,
        "steps": run.steps,
        "norm_status": state.norm_status,
    }
    return run, summary
