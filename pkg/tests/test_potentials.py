import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bohmfree.actions import FreeAction, TimeDomainError
from bohmfree.core import Units
from bohmfree.potentials import (
    FAMILY_TAGS, NON_SEPARABLE_TAGS, SEPARABLE_TAGS, NotAFunctionError, ParameterError,
    PotentialFamily, SingularityError, VariantMismatchError, catalog, eval_potential, family,
    parameter_schema, reduced_profile,
)


def test_twelve_families_in_stable_order():
    entries = catalog()
    assert len(entries) == 12
    assert [e["tag"] for e in entries] == list(FAMILY_TAGS)
    assert len(SEPARABLE_TAGS) == 8 and len(NON_SEPARABLE_TAGS) == 4
    assert catalog() == entries


def test_catalog_availability():
    avail = {e["tag"]: e["amplitude_availability"] for e in catalog()}
    assert avail["cosine_wave"] == "ode-only"
    assert avail["delta_trap"] == "analytic-piecewise"
    assert sum(v == "closed-form" for v in avail.values()) == 10


@pytest.mark.parametrize("tag,s,expected", [
    ("constant_force", 2.0, -2.0),
    ("poschl_teller", 0.0, -1.0),
    ("modified_poschl_teller", 0.0, -0.5),
    ("modified_harmonic_z", 0.0, -0.5),
    ("harmonic_z", 2.0, 2.0),
    ("cosine_wave", 0.0, 0.5),
])
def test_reduced_profile_values(tag, s, expected):
    assert reduced_profile(family(tag), s) == pytest.approx(expected)


def test_singular_and_distribution_profiles():
    with pytest.raises(SingularityError):
        reduced_profile(family("moving_coulomb"), 0.0)
    with pytest.raises(SingularityError):
        reduced_profile(family("coulomb_like"), np.array([-1.0, 0.0, 1.0]))
    with pytest.raises(NotAFunctionError):
        reduced_profile(family("delta_trap"), 1.0)


def test_lab_frame_potential():
    assert eval_potential(family("constant_force", F=1.0, k=1.0), 3.0, 1.0) == pytest.approx(-2.0)
    assert eval_potential(family("decaying_harmonic", omega0=1.0), 2.0, 2.0) == pytest.approx(0.125)
    assert eval_potential(family("coulomb_like", Z0=1.0), 1.0, 2.0) == pytest.approx(0.5)
    with pytest.raises(TimeDomainError):
        eval_potential(family("coulomb_like", t0=1.0), 2.0, 1.0)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        family("harmonic_z", omega=0.0)
    with pytest.raises(ParameterError):
        family("moving_coulomb", alpha=0.0)
    with pytest.raises(ParameterError):
        family("harmonic_z", bogus=1.0)
    with pytest.raises(ParameterError):
        family("no_such_family")
    with pytest.raises(ParameterError):
        family("constant_force", F=float("nan"))


def test_variant_mismatch():
    with pytest.raises(VariantMismatchError):
        PotentialFamily("harmonic_z", {}, FreeAction.non_separable(0, 0))
    with pytest.raises(VariantMismatchError):
        PotentialFamily("coulomb_like", {}, FreeAction.separable(1.0))


def test_defaults_and_attribute_access():
    p = family("poschl_teller")
    assert dict(p.params) == parameter_schema("poschl_teller")
    assert p.gamma == 1.0 and p.a1 == 1.0 and p.a2 == 0.0
    assert p.replace(gamma=2.0).gamma == 2.0
    assert family("delta_trap").beta == 1.0


def test_reduced_coordinate_round_trip():
    p = family("decaying_harmonic", x0=0.4, t0=-1.0)
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(p.coordinate.inverse(p.coordinate(x, 2.0), 2.0), x)
    assert p.coordinate.name == "y" and family("harmonic_z").coordinate.name == "z"


def test_modified_families_scale_with_units():
    u = Units(hbar=2.0, mass=0.5)
    p = family("modified_poschl_teller", u)
    # -(hbar^2/m) + hbar^2/(2m) at the centre
    assert reduced_profile(p, 0.0) == pytest.approx(-4.0)


@settings(max_examples=50, deadline=None)
@given(F=st.floats(0.1, 3), k=st.floats(-3, 3), x=st.floats(-5, 5), t=st.floats(-5, 5), c=st.floats(-3, 3))
def test_separable_potential_is_translation_invariant(F, k, x, t, c):
    # V(x, t) depends only on z = x - k t / m
    p = family("constant_force", F=F, k=k)
    shift = k * c
    assert eval_potential(p, x + shift, t + c) == pytest.approx(eval_potential(p, x, t), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(w=st.floats(0.1, 3), y=st.floats(-4, 4), tau=st.floats(0.1, 5), lam=st.floats(0.2, 5))
def test_non_separable_potential_homogeneity(w, y, tau, lam):
    # V(x0 + y tau, t0 + tau) scales as tau^-2 at fixed y
    p = family("decaying_harmonic", omega0=w, x0=0.3, t0=-0.2)
    v1 = eval_potential(p, 0.3 + y * tau, -0.2 + tau)
    v2 = eval_potential(p, 0.3 + y * lam * tau, -0.2 + lam * tau)
    assert v2 == pytest.approx(v1 / lam**2, rel=1e-10, abs=1e-14)
