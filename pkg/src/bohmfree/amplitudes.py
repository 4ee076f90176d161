"""Amplitudes that cancel each catalog potential, and wave-state assembly.

Every amplitude solves the reduced linear ODE ``A'' = (2 m / hbar^2) V(s) A``
in the reduced coordinate ``s`` (z or y).  Closed forms are provided where they
exist; ``integrate_amplitude_ode`` solves the ODE directly and serves as the
independent route for all families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .actions import NON_SEPARABLE, FreeAction
from .core import DomainError, Grid1D, RealField, ComplexField, Units, l2_norm, make_grid
from .potentials import (
    ODE_ONLY,
    PIECEWISE,
    PotentialFamily,
    SingularityError,
    VariantMismatchError,
    reduced_profile,
)
from .specfun import (
    airy_ai,
    airy_ai_prime,
    bessel_k,
    parabolic_cylinder_dmhalf,
    parabolic_cylinder_dmhalf_prime,
)

CLOSED = "closed-form"
ODE = "ode-oracle"
PIECEWISE_SOURCE = "analytic-piecewise"

DEFAULT_S_MIN = 0.05
DEFAULT_ODE_TOL = 1e-12
NORMALIZED = "normalized"
NOT_NORMALIZABLE = "not-normalizable"


class NoClosedFormError(DomainError):
    pass


class RangeError(DomainError):
    pass


class StepFailureError(RuntimeError):
    pass


# -- closed forms ------------------------------------------------------------

def legendre_degree(p: PotentialFamily) -> float:
    """n with n (n + 1) = 2 m gamma / hbar^2."""
    u = p.units
    return (math.sqrt(1.0 + 8.0 * u.mass * p.params["gamma"] / u.hbar**2) - 1.0) / 2.0


def integer_legendre_degree(p: PotentialFamily) -> int | None:
    n = legendre_degree(p)
    r = round(n)
    return int(r) if abs(n - r) < 1e-12 else None


def _legendre_pq(n: int, s: np.ndarray):
    """P_j, Q_j of tanh(s) for j = n - 1, n (Q_0 = atanh(tanh s) = s exactly)."""
    x = np.tanh(s)
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    q_prev, q = np.zeros_like(x), s.copy()
    for j in range(n):
        p_prev, p = p, ((2 * j + 1) * x * p - j * p_prev) / (j + 1)
        if j == 0:
            q_prev, q = q, x * s - 1.0
        else:
            q_prev, q = q, ((2 * j + 1) * x * q - j * q_prev) / (j + 1)
    return x, p_prev, p, q_prev, q


def _scale(p: PotentialFamily) -> tuple[float, float]:
    return p.units.hbar, p.units.mass


def _closed(p: PotentialFamily, s: np.ndarray, derivative: bool):
    hbar, m = _scale(p)
    q = p.params
    tag = p.tag
    if p.availability == ODE_ONLY:
        raise NoClosedFormError(f"{tag} has no closed-form amplitude (Mathieu equation); use the ODE route")
    if tag in ("constant_force", "time_decreasing_force"):
        force = q["F"] if tag == "constant_force" else q["F0"]
        c = np.cbrt(2.0 * m * force / hbar**2)
        if derivative:
            return -c * airy_ai_prime(-c * s)
        return airy_ai(-c * s)
    if tag == "delta_trap":
        slope = m * q["gamma"] * q["beta"] / hbar**2
        if derivative:
            return slope * np.sign(s)
        return slope * np.abs(s) - q["beta"]
    if tag in ("moving_coulomb", "coulomb_like"):
        coupling = q["alpha"] if tag == "moving_coulomb" else q["Z0"]
        if coupling <= 0:
            raise NoClosedFormError(f"{tag}: K1 amplitude needs a positive coupling; use the ODE route")
        if np.any(s <= 0):
            raise SingularityError(f"{tag}: K1 amplitude defined for s > 0 only")
        w = np.sqrt(2.0 * m * coupling * s) / hbar
        if derivative:
            return -(w**2) * bessel_k(0.0, 2.0 * w) / s
        return w * bessel_k(1.0, 2.0 * w)
    if tag in ("harmonic_z", "decaying_harmonic"):
        omega = q["omega"] if tag == "harmonic_z" else q["omega0"]
        c = math.sqrt(2.0 * m * omega / hbar)
        if derivative:
            return c * parabolic_cylinder_dmhalf_prime(c * s)
        return parabolic_cylinder_dmhalf(c * s)
    if tag == "poschl_teller":
        n = integer_legendre_degree(p)
        if n is None:
            raise NoClosedFormError(
                f"poschl_teller: degree {legendre_degree(p):.6g} is not an integer; use the ODE route"
            )
        x, p_prev, pn, q_prev, qn = _legendre_pq(n, s)
        if not derivative:
            return q["a1"] * pn + q["a2"] * qn
        if n == 0:
            return q["a2"] * np.ones_like(s)
        # dA/ds = (1 - x^2) dA/dx and (x^2 - 1) L_n' = n (x L_n - L_{n-1})
        return -n * (q["a1"] * (x * pn - p_prev) + q["a2"] * (x * qn - q_prev))
    if tag in ("modified_harmonic_z", "modified_decaying_harmonic"):
        omega = q["omega"] if tag == "modified_harmonic_z" else q["omega0"]
        b = m * omega / hbar
        g = (b / math.pi) ** 0.25 * np.exp(-0.5 * b * s**2)
        return -b * s * g if derivative else g
    if tag == "modified_poschl_teller":
        sech = 1.0 / np.cosh(s)
        a = sech / math.sqrt(2.0)
        return -np.tanh(s) * a if derivative else a
    raise NoClosedFormError(tag)  # pragma: no cover


def closed_form_amplitude(p: PotentialFamily, s):
    """Closed-form amplitude in the reduced coordinate (vectorised)."""
    arr = np.asarray(s, dtype=float)
    out = _closed(p, arr, derivative=False)
    return float(out) if np.ndim(s) == 0 else out


def closed_form_derivative(p: PotentialFamily, s):
    arr = np.asarray(s, dtype=float)
    out = _closed(p, arr, derivative=True)
    return float(out) if np.ndim(s) == 0 else out


def has_closed_form(p: PotentialFamily) -> bool:
    if p.availability == ODE_ONLY:
        return False
    if p.tag == "poschl_teller":
        return integer_legendre_degree(p) is not None
    if p.tag == "moving_coulomb":
        return p.params["alpha"] > 0
    if p.tag == "coulomb_like":
        return p.params["Z0"] > 0
    return True


# -- profiles ----------------------------------------------------------------

@dataclass(frozen=True)
class AmplitudeProfile:
    """Amplitude as a function of the reduced coordinate.

    ``samples`` lives on a uniform reduced grid; ``evaluate`` gives the value at
    any point of ``[s_min, s_max]`` (closed form, or dense ODE output).
    """

    source: str
    samples: RealField
    family: PotentialFamily
    evaluate: Callable = field(repr=False, compare=False)
    seed: dict = field(default_factory=dict, compare=False)

    @property
    def s_min(self) -> float:
        return self.samples.grid.x_min

    @property
    def s_max(self) -> float:
        return self.samples.grid.x_max

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        span = self.s_max - self.s_min
        slack = 1e-9 * span
        if np.any(s < self.s_min - slack) or np.any(s > self.s_max + slack):
            raise RangeError(
                f"reduced coordinate range [{s.min():.6g}, {s.max():.6g}] leaves the profile "
                f"interval [{self.s_min:.6g}, {self.s_max:.6g}]"
            )
        return self.evaluate(np.clip(s, self.s_min, self.s_max))


def closed_form_profile(p: PotentialFamily, s_start: float, s_end: float, n: int = 801) -> AmplitudeProfile:
    grid = make_grid(s_start, s_end, n)
    if p.tag in ("moving_coulomb", "coulomb_like") and s_start <= 0:
        raise SingularityError(f"{p.tag}: profile interval must satisfy s > 0")
    source = PIECEWISE_SOURCE if p.availability == PIECEWISE else CLOSED
    values = closed_form_amplitude(p, grid.x)
    return AmplitudeProfile(source, RealField(grid, values), p, lambda s: closed_form_amplitude(p, s))


def integrate_amplitude_ode(
    p: PotentialFamily,
    s_start: float,
    s_end: float,
    a0: float,
    da0: float,
    tol: float = DEFAULT_ODE_TOL,
    *,
    s_init: float | None = None,
    n: int = 801,
    profile: Callable | None = None,
) -> AmplitudeProfile:
    """Solve A'' = (2 m / hbar^2) V(s) A with A(s_init) = a0, A'(s_init) = da0.

    ``s_init`` defaults to ``s_start``.  ``profile`` replaces the family's
    reduced potential (e.g. ``lambda s: 0.0 * s`` for the free equation).
    """
    if not 1e-12 <= tol <= 1e-4:
        raise DomainError(f"tol must lie in [1e-12, 1e-4], got {tol}")
    if not s_end > s_start:
        raise DomainError("s_end must exceed s_start")
    if s_init is None:
        s_init = s_start
    lo, hi = min(s_start, s_init), max(s_end, s_init)
    if profile is None:
        if p.tag == "delta_trap":
            raise DomainError("delta_trap has no smooth reduced ODE; use the piecewise amplitude")
        if p.singular and lo <= 0.0 <= hi:
            raise SingularityError(f"{p.tag}: integration interval [{lo}, {hi}] touches the pole at 0")
        profile = lambda s: reduced_profile(p, s)  # noqa: E731
    hbar, m = _scale(p)
    coef = 2.0 * m / hbar**2

    def rhs(s, y):
        return [y[1], coef * profile(s) * y[0]]

    # atol proportional to the data keeps the step sequence scale invariant
    atol = tol * max(abs(a0), abs(da0))
    if atol == 0.0:
        raise DomainError("initial data must not be identically zero")
    pieces = []
    for end in (lo, hi):
        if end == s_init:
            continue
        sol = solve_ivp(rhs, (s_init, end), [a0, da0], method="DOP853", rtol=tol, atol=atol,
                        dense_output=True)
        if not sol.success:
            raise StepFailureError(f"ODE integration toward s={end} failed: {sol.message}")
        pieces.append((min(s_init, end), max(s_init, end), sol.sol))

    def evaluate(s):
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape)
        done = np.zeros(s.shape, dtype=bool)
        for a, b, dense in pieces:
            sel = (s >= a) & (s <= b) & ~done
            if np.any(sel):
                out[sel] = dense(s[sel])[0]
                done |= sel
        out[~done] = a0  # only s == s_init can remain
        return out

    grid = make_grid(s_start, s_end, n)
    seed = {"s_init": float(s_init), "a0": float(a0), "da0": float(da0), "tol": float(tol)}
    return AmplitudeProfile(ODE, RealField(grid, evaluate(grid.x)), p, evaluate, seed)


def default_seed_point(p: PotentialFamily, s_start: float, s_end: float, s_min: float = DEFAULT_S_MIN) -> float:
    if p.singular:
        return max(s_min, s_start)
    return 0.0


def make_profile(
    p: PotentialFamily,
    s_start: float,
    s_end: float,
    *,
    prefer: str = "auto",
    tol: float = DEFAULT_ODE_TOL,
    a0: float = 1.0,
    da0: float = 0.0,
    s_init: float | None = None,
    n: int = 801,
) -> AmplitudeProfile:
    """Closed form when available (``prefer='auto'``), otherwise the ODE route."""
    if prefer not in ("auto", "closed", "ode"):
        raise DomainError(f"unknown profile preference {prefer!r}")
    if prefer != "ode" and has_closed_form(p):
        return closed_form_profile(p, s_start, s_end, n)
    if prefer == "closed":
        raise NoClosedFormError(f"{p.tag} has no closed form for these parameters")
    if s_init is None:
        s_init = default_seed_point(p, s_start, s_end)
    return integrate_amplitude_ode(p, s_start, s_end, a0, da0, tol, s_init=s_init, n=n)


# -- wave states --------------------------------------------------------------

@dataclass(frozen=True)
class WaveState:
    grid: Grid1D
    time: float
    amplitude: RealField
    phase: RealField
    units: Units = field(default_factory=Units)
    norm_status: str = "unchecked"
    scale: float = 1.0

    def psi(self) -> ComplexField:
        return ComplexField(self.grid, self.amplitude.values * np.exp(1j * self.phase.values / self.units.hbar))

    def density(self) -> RealField:
        return RealField(self.grid, self.amplitude.values**2)


def amplitude_at(a: FreeAction, amp: AmplitudeProfile, x, t: float):
    """Laboratory amplitude A(x, t) built from a reduced profile."""
    a.check_time(t)
    values = amp(amp.family.with_action(a).coordinate(x, t))
    if a.variant == NON_SEPARABLE:
        values = values / math.sqrt(t - a.t0)
    return values


def assemble_state(a: FreeAction, p: PotentialFamily, amp: AmplitudeProfile, grid: Grid1D, t: float) -> WaveState:
    if a.variant != p.variant:
        raise VariantMismatchError(f"{p.tag} needs a {p.variant} action, got {a.variant}")
    if amp.family.variant != p.variant:
        raise VariantMismatchError(f"amplitude of {amp.family.tag} cannot be assembled for {p.tag}")
    a.check_time(t)
    x = grid.x
    s = p.with_action(a).coordinate(x, t)
    values = amp(s)
    if a.variant == NON_SEPARABLE:
        values = values / math.sqrt(t - a.t0)
    return WaveState(grid, float(t), RealField(grid, values), RealField(grid, a.value(x, t)), a.units)


def normalize_if_integrable(state: WaveState, tail: float = 1e-8) -> WaveState:
    """Rescale to unit L2 norm when the amplitude has decayed at both grid ends."""
    a = np.abs(state.amplitude.values)
    peak = a.max()
    if peak == 0.0 or a[0] > tail * peak or a[-1] > tail * peak:
        return replace(state, norm_status=NOT_NORMALIZABLE)
    norm = l2_norm(state.amplitude)
    factor = 1.0 / norm
    return replace(state, amplitude=state.amplitude * factor, norm_status=NORMALIZED, scale=state.scale * factor)
