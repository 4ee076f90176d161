import pytest

from bohmfree.core import make_grid
from bohmfree.potentials import FAMILY_TAGS
from bohmfree.scenarios import Scenario, default_scenario, default_scenarios, run_checks


@pytest.mark.parametrize("tag", FAMILY_TAGS)
def test_default_scenarios_pass(tag):
    reports = run_checks(default_scenario(tag))
    assert all(r["passed"] for r in reports), [r for r in reports if not r["passed"]]


def test_delta_trap_checks_are_jump_plus_skips():
    reports = run_checks(default_scenario("delta_trap"))
    assert reports[0]["name"] == "jump_condition" and reports[0]["passed"]
    assert all(r["skipped"] and r["reason"] for r in reports[1:])


def test_tol_scale_can_force_failure():
    reports = run_checks(default_scenario("harmonic_z"), tol_scale=1e-6)
    assert not all(r["passed"] for r in reports)


def test_overrides_take_precedence():
    reports = run_checks(default_scenario("cosine_wave"), overrides={"cancellation": {"cosine_wave": 1e-9}})
    canc = next(r for r in reports if r["name"] == "cancellation")
    assert not canc["passed"] and canc["details"]["constant"] == 1e-9


def test_explicit_grid_is_used():
    sc = default_scenario("modified_poschl_teller")
    g = make_grid(-3.0, 4.0, 701)
    explicit = Scenario(sc.family, -3.5, 3.5, sc.t, explicit_grid=g)
    assert explicit.grid() is g
    assert len(default_scenarios()) == 12
