"""End-to-end smoke tests of the python bindings against known physics."""

import math

import numpy as np
import pytest

import polaronsim as ps


def small_params(**overrides):
    p = ps.ModelParams()
    p.F_p = 0.0
    p.n_th = 0.4
    p.gamma_m = 1e-2
    for key, value in overrides.items():
        setattr(p, key, value)
    return p


def test_space_and_operators():
    space = ps.HilbertSpace(cav_cutoff=2, mech_cutoff=3)
    assert space.dim == 2 * 3 * 4
    assert space.dims == [2, 3, 4]

    p = ps.ModelParams()
    h = ps.hamiltonian(p, space)
    assert h.shape == (space.dim, space.dim)
    assert np.max(np.abs(h - h.conj().T)) < 1e-12

    n = ps.polariton_number(space)
    assert np.max(np.abs(h @ n - n @ h)) < 1e-10


def test_eigensystem_matches_closed_form():
    p = ps.ModelParams()
    space = ps.HilbertSpace(3, 30)
    levels = [l for l in ps.eigensystem(p, space) if l.n == 1 and l.m <= 3]
    for level in levels:
        reference = ps.polaron_energy(p, 1, level.m, level.branch)
        assert level.energy == pytest.approx(reference, abs=5e-3)


def test_spectral_density_polariton_lines():
    p = ps.ModelParams()
    sd = ps.joint_spectral_density(p, ps.HilbertSpace(2, 20),
                                   omega_min=99.0, omega_max=101.0,
                                   points=2001)
    omega = np.asarray(sd.omega)
    density = np.asarray(sd.density)
    lower = omega[np.argmax(density * (omega < 100.0))]
    upper = omega[np.argmax(density * (omega > 100.0))]
    assert lower == pytest.approx(p.lower_polariton(), abs=0.05)
    assert upper == pytest.approx(p.upper_polariton(), abs=0.05)
    classes = {t.transition_class for t in sd.transitions}
    assert classes <= {"reducing", "conserving", "increasing"}


def test_steady_state_thermal_mechanics():
    p = small_params()
    space = ps.HilbertSpace(1, 8)
    ss = ps.steady_state(p, space)
    assert ss.residual_max < 1e-9
    obs = ps.scalar_observables(ss.rho, space)
    assert obs.phonon_number == pytest.approx(p.n_th, rel=2e-2)
    assert obs.g2_phonon == pytest.approx(2.0, abs=5e-2)


def test_evolve_conserves_trace():
    p = small_params()
    space = ps.HilbertSpace(1, 6)
    rho0 = ps.product_state(space, atom=0, k=0, mech=ps.fock_state(7, 2))
    traj = ps.evolve(p, space, rho0, times=list(np.linspace(0.0, 50.0, 11)))
    assert traj.max_trace_residual < 1e-8
    assert traj.phonon_number[0] == pytest.approx(2.0, abs=1e-9)
    assert traj.phonon_number[-1] < 2.0  # relaxing toward n_th = 0.4


def test_wigner_negativity_of_fock_one():
    w = ps.wigner(ps.fock_state(12, 1), ps.linear_grid(-3, 3, 61),
                  ps.linear_grid(-3, 3, 61))
    assert w.integral == pytest.approx(1.0, abs=5e-2)
    assert w.min_value == pytest.approx(-1.0 / math.pi, abs=1e-3)


def test_errors_translate():
    with pytest.raises(ps.SimulationError, match="branch"):
        ps.polaron_energy(ps.ModelParams(), 1, 1, "sideways")
    with pytest.raises(ps.SimulationError, match="undefined_statistic"):
        ps.g2_phonon(ps.fock_state(4, 0))
