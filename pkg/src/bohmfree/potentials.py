"""Catalog of external potentials whose Bohm cancellation admits free-particle phases.

Moving (separable-action) families depend on ``z = x - k t / m`` only.
Spreading (non-separable) families have the form ``V(x, t) = P(y) / (t - t0)**2``
with ``y = (x - x0) / (t - t0)``.  ``reduced_profile`` returns ``V(z)`` or ``P(y)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .actions import NON_SEPARABLE, SEPARABLE, FreeAction, TimeDomainError
from .core import DomainError, Units


class SingularityError(DomainError):
    pass


class NotAFunctionError(DomainError):
    pass


class ParameterError(DomainError):
    pass


CLOSED_FORM = "closed-form"
ODE_ONLY = "ode-only"
PIECEWISE = "analytic-piecewise"

# parameter name -> (default, constraint, description)
# constraint is one of "any", "positive", "nonzero"
_SCHEMA = {
    "constant_force": {
        "F": (1.0, "nonzero", "force"),
    },
    "delta_trap": {
        "gamma": (1.0, "positive", "trap strength (energy*length)"),
        "beta": (1.0, "any", "amplitude scale"),
    },
    "moving_coulomb": {
        "alpha": (1.0, "nonzero", "coupling (energy*length)"),
    },
    "cosine_wave": {
        "gamma": (0.5, "any", "wave amplitude (energy)"),
        "kappa": (1.0, "nonzero", "wavenumber"),
    },
    "harmonic_z": {
        "omega": (1.0, "positive", "frequency"),
    },
    "poschl_teller": {
        "gamma": (1.0, "positive", "well depth (energy)"),
        "a1": (1.0, "any", "Legendre P coefficient"),
        "a2": (0.0, "any", "Legendre Q coefficient"),
    },
    "modified_harmonic_z": {
        "omega": (1.0, "positive", "frequency"),
    },
    "modified_poschl_teller": {},
    "time_decreasing_force": {
        "F0": (1.0, "nonzero", "force scale (force*time^3)"),
    },
    "decaying_harmonic": {
        "omega0": (1.0, "positive", "frequency scale (frequency*time^2)"),
    },
    "coulomb_like": {
        "Z0": (1.0, "nonzero", "coupling (energy*length*time)"),
    },
    "modified_decaying_harmonic": {
        "omega0": (1.0, "positive", "frequency scale (frequency*time^2)"),
    },
}

_AVAILABILITY = {
    "constant_force": CLOSED_FORM,
    "delta_trap": PIECEWISE,
    "moving_coulomb": CLOSED_FORM,
    "cosine_wave": ODE_ONLY,
    "harmonic_z": CLOSED_FORM,
    "poschl_teller": CLOSED_FORM,
    "modified_harmonic_z": CLOSED_FORM,
    "modified_poschl_teller": CLOSED_FORM,
    "time_decreasing_force": CLOSED_FORM,
    "decaying_harmonic": CLOSED_FORM,
    "coulomb_like": CLOSED_FORM,
    "modified_decaying_harmonic": CLOSED_FORM,
}

_PROFILE_TEXT = {
    "constant_force": "V(z) = -F z",
    "delta_trap": "V(z) = -gamma delta(z)",
    "moving_coulomb": "V(z) = alpha / z",
    "cosine_wave": "V(z) = gamma cos(kappa z)",
    "harmonic_z": "V(z) = m omega^2 z^2 / 2",
    "poschl_teller": "V(z) = -gamma sech^2 z",
    "modified_harmonic_z": "V(z) = m omega^2 z^2 / 2 - hbar omega / 2",
    "modified_poschl_teller": "V(z) = -(hbar^2/m) sech^2 z + hbar^2 / (2 m)",
    "time_decreasing_force": "P(y) = -F0 y",
    "decaying_harmonic": "P(y) = m omega0^2 y^2 / 2",
    "coulomb_like": "P(y) = Z0 / y",
    "modified_decaying_harmonic": "P(y) = m omega0^2 y^2 / 2 - hbar omega0 / 2",
}

FAMILY_TAGS = tuple(_SCHEMA)
SEPARABLE_TAGS = FAMILY_TAGS[:8]
NON_SEPARABLE_TAGS = FAMILY_TAGS[8:]
SINGULAR_TAGS = ("moving_coulomb", "coulomb_like")
SQUARE_INTEGRABLE_TAGS = ("modified_harmonic_z", "modified_poschl_teller", "modified_decaying_harmonic")


def action_variant(tag: str) -> str:
    return SEPARABLE if tag in SEPARABLE_TAGS else NON_SEPARABLE


@dataclass(frozen=True)
class ReducedCoordinate:
    """Map (x, t) to z = x - k t / m or y = (x - x0) / (t - t0)."""

    action: FreeAction

    def __call__(self, x, t: float):
        a = self.action
        a.check_time(t)
        x = np.asarray(x, dtype=float)
        if a.variant == SEPARABLE:
            return x - a.k * t / a.units.mass
        return (x - a.x0) / (t - a.t0)

    def inverse(self, s, t: float):
        a = self.action
        a.check_time(t)
        s = np.asarray(s, dtype=float)
        if a.variant == SEPARABLE:
            return s + a.k * t / a.units.mass
        return a.x0 + s * (t - a.t0)

    @property
    def name(self) -> str:
        return "z" if self.action.variant == SEPARABLE else "y"


@dataclass(frozen=True)
class PotentialFamily:
    """A catalog entry with concrete parameters and its companion free action."""

    tag: str
    params: MappingProxyType = field(default_factory=dict)
    action: FreeAction | None = None

    def __post_init__(self):
        if self.tag not in _SCHEMA:
            raise ParameterError(f"unknown potential family {self.tag!r}")
        schema = _SCHEMA[self.tag]
        unknown = set(self.params) - set(schema)
        if unknown:
            raise ParameterError(f"{self.tag}: unknown parameters {sorted(unknown)}")
        full = {}
        for name, (default, constraint, _) in schema.items():
            value = float(self.params.get(name, default))
            if not np.isfinite(value):
                raise ParameterError(f"{self.tag}.{name} must be finite")
            if constraint == "positive" and not value > 0:
                raise ParameterError(f"{self.tag}.{name} must be > 0, got {value}")
            if constraint == "nonzero" and value == 0:
                raise ParameterError(f"{self.tag}.{name} must be nonzero")
            full[name] = value
        object.__setattr__(self, "params", MappingProxyType(full))
        action = self.action
        if action is None:
            action = FreeAction.separable(1.0) if self.tag in SEPARABLE_TAGS else FreeAction.non_separable(0.0, 0.0)
        if action.variant != action_variant(self.tag):
            raise VariantMismatchError(
                f"{self.tag} requires a {action_variant(self.tag)} action, got {action.variant}"
            )
        object.__setattr__(self, "action", action)

    def __getattr__(self, name):
        params = self.__dict__.get("params", {})
        if name in params:
            return params[name]
        raise AttributeError(name)

    def __hash__(self):
        return hash((self.tag, tuple(self.params.items()), self.action))

    def __eq__(self, other):
        return (
            isinstance(other, PotentialFamily)
            and self.tag == other.tag
            and dict(self.params) == dict(other.params)
            and self.action == other.action
        )

    @property
    def units(self) -> Units:
        return self.action.units

    @property
    def variant(self) -> str:
        return action_variant(self.tag)

    @property
    def coordinate(self) -> ReducedCoordinate:
        return ReducedCoordinate(self.action)

    @property
    def availability(self) -> str:
        return _AVAILABILITY[self.tag]

    @property
    def singular(self) -> bool:
        return self.tag in SINGULAR_TAGS

    def replace(self, **params) -> "PotentialFamily":
        merged = dict(self.params)
        merged.update(params)
        return PotentialFamily(self.tag, merged, self.action)

    def with_action(self, action: FreeAction) -> "PotentialFamily":
        return PotentialFamily(self.tag, dict(self.params), action)


class VariantMismatchError(DomainError):
    pass


def family(tag: str, units: Units | None = None, *, k: float = 1.0, x0: float = 0.0,
           t0: float = 0.0, **params) -> PotentialFamily:
    """Convenience constructor that picks the action variant from the tag."""
    units = units or Units()
    if tag in SEPARABLE_TAGS:
        action = FreeAction.separable(k, units)
    else:
        action = FreeAction.non_separable(x0, t0, units)
    return PotentialFamily(tag, params, action)


def reduced_profile(p: PotentialFamily, s):
    """V(z) for moving families, P(y) for spreading families; vectorised in ``s``."""
    s_arr = np.asarray(s, dtype=float)
    hbar, m = p.units.hbar, p.units.mass
    q = p.params
    tag = p.tag
    if tag == "delta_trap":
        raise NotAFunctionError("delta_trap is a distribution; use the jump condition instead")
    if tag in SINGULAR_TAGS and np.any(s_arr == 0.0):
        raise SingularityError(f"{tag} is singular at s = 0")
    if tag == "constant_force":
        out = -q["F"] * s_arr
    elif tag == "moving_coulomb":
        out = q["alpha"] / s_arr
    elif tag == "cosine_wave":
        out = q["gamma"] * np.cos(q["kappa"] * s_arr)
    elif tag == "harmonic_z":
        out = 0.5 * m * q["omega"] ** 2 * s_arr**2
    elif tag == "poschl_teller":
        out = -q["gamma"] / np.cosh(s_arr) ** 2
    elif tag == "modified_harmonic_z":
        out = 0.5 * m * q["omega"] ** 2 * s_arr**2 - 0.5 * hbar * q["omega"]
    elif tag == "modified_poschl_teller":
        out = -(hbar**2 / m) / np.cosh(s_arr) ** 2 + hbar**2 / (2.0 * m)
    elif tag == "time_decreasing_force":
        out = -q["F0"] * s_arr
    elif tag == "decaying_harmonic":
        out = 0.5 * m * q["omega0"] ** 2 * s_arr**2
    elif tag == "coulomb_like":
        out = q["Z0"] / s_arr
    elif tag == "modified_decaying_harmonic":
        out = 0.5 * m * q["omega0"] ** 2 * s_arr**2 - 0.5 * hbar * q["omega0"]
    else:  # pragma: no cover - guarded by PotentialFamily
        raise ParameterError(tag)
    return float(out) if np.ndim(s) == 0 else out


def eval_potential(p: PotentialFamily, x, t: float):
    """Laboratory-frame potential V(x, t)."""
    if p.variant == NON_SEPARABLE and not t > p.action.t0:
        raise TimeDomainError(f"{p.tag} needs t > t0 (t={t}, t0={p.action.t0})")
    s = p.coordinate(x, t)
    v = reduced_profile(p, s)
    if p.variant == NON_SEPARABLE:
        v = v / (t - p.action.t0) ** 2
    return v


def catalog() -> list[dict]:
    """Machine-readable listing of all twelve families in a stable order."""
    entries = []
    for tag in FAMILY_TAGS:
        entries.append({
            "tag": tag,
            "profile": _PROFILE_TEXT[tag],
            "parameters": {
                name: {"default": default, "constraint": constraint, "description": desc}
                for name, (default, constraint, desc) in _SCHEMA[tag].items()
            },
            "action_variant": action_variant(tag),
            "action_parameters": ["k"] if tag in SEPARABLE_TAGS else ["x0", "t0"],
            "reduced_coordinate": "z" if tag in SEPARABLE_TAGS else "y",
            "amplitude_availability": _AVAILABILITY[tag],
            "square_integrable": tag in SQUARE_INTEGRABLE_TAGS,
        })
    return entries


def parameter_schema(tag: str) -> dict:
    if tag not in _SCHEMA:
        raise ParameterError(f"unknown potential family {tag!r}")
    return {name: default for name, (default, _, _) in _SCHEMA[tag].items()}
