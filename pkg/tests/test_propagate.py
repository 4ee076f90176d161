import math

import numpy as np
import pytest

from bohmfree.amplitudes import WaveState
from bohmfree.core import ComplexField, DomainError, RealField, Units, grid_with_spacing, l2_norm
from bohmfree.potentials import family
from bohmfree.propagate import WallContaminationError, cn_step, evolve
from bohmfree.scenarios import (
    EvolutionCase, NotSquareIntegrableError, default_evolution, run_evolution,
)


def _gaussian_state(grid, k=0.0):
    a = np.exp(-grid.x**2 / 2) / math.pi**0.25
    return WaveState(grid, 0.0, RealField(grid, a), RealField(grid, k * grid.x))


def test_free_gaussian_norm_per_step():
    g = grid_with_spacing(-30, 30, 0.05)
    run = evolve(_gaussian_state(g, 1.0), family("modified_harmonic_z"), 2.0, 200,
                 potential=lambda x, t: np.zeros_like(x))
    assert run.max_step_drift <= 1e-12
    assert l2_norm(run.snapshots[0][1]) == pytest.approx(1.0, abs=1e-9)


def test_plane_wave_phase_advance():
    k, dt, dx = 1.0, 1e-3, 1e-2
    g = grid_with_spacing(-50, 50, dx)
    psi = ComplexField(g, np.exp(1j * k * g.x))
    for i in range(5):
        psi = cn_step(psi, None, i * dt, dt, Units(), potential=lambda x, t: np.zeros_like(x))
    mid = g.n // 2
    window = slice(mid - 200, mid + 200)
    advance = np.angle(psi.values[window] * np.exp(-1j * k * g.x[window]))
    np.testing.assert_allclose(advance, -0.5 * k * k * 5 * dt, atol=1e-7)


def test_step_rejects_nonpositive_dt():
    g = grid_with_spacing(-1, 1, 0.1)
    psi = ComplexField(g, np.zeros(g.n, dtype=complex))
    with pytest.raises(DomainError):
        cn_step(psi, family("harmonic_z"), 0.0, 0.0, Units())
    with pytest.raises(DomainError):
        cn_step(psi, family("harmonic_z"), 0.0, -1e-3, Units())


def test_modified_poschl_teller_run():
    run, summary = run_evolution(default_evolution("modified_poschl_teller"))
    assert summary["probability_drift"] <= 1e-10
    assert summary["density_transport_error"] <= 1e-3
    assert summary["snapshot_times"][-1] == pytest.approx(5.0)
    assert len(run.snapshots) == 6


def test_narrow_box_contaminated():
    case = default_evolution("modified_poschl_teller")
    narrow = EvolutionCase(case.family, -2.0, 2.0, 0.0, 5.0)
    with pytest.raises(WallContaminationError):
        run_evolution(narrow)


def test_modified_decaying_harmonic_run():
    case = default_evolution("modified_decaying_harmonic")
    assert case.t_start - case.family.action.t0 == pytest.approx(1.0)
    assert case.t_end - case.family.action.t0 == pytest.approx(3.0)
    _, summary = run_evolution(case)
    assert summary["density_transport_error"] <= 1e-3
    assert summary["probability_drift"] <= 1e-9


def test_modified_harmonic_transport():
    _, summary = run_evolution(default_evolution("modified_harmonic_z"))
    assert summary["density_transport_error"] <= 1e-3
    assert summary["phase_agreement"] < 1e-2


def test_evolution_refuses_non_normalizable():
    for tag in ("constant_force", "harmonic_z", "cosine_wave", "coulomb_like"):
        with pytest.raises(NotSquareIntegrableError):
            default_evolution(tag)


def test_control_without_potential_departs():
    _, summary = run_evolution(default_evolution("modified_poschl_teller"), control=True)
    assert summary["density_transport_error"] >= 0.1


def test_bad_time_arguments():
    g = grid_with_spacing(-10, 10, 0.05)
    st = _gaussian_state(g)
    with pytest.raises(DomainError):
        evolve(st, family("modified_harmonic_z"), 0.0, 10)
    with pytest.raises(DomainError):
        evolve(st, family("modified_harmonic_z"), 1.0, 0)
