import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from qvalve.dynamics import (
    DataError, IncompleteRelaxationError, Trajectory, evolve, fock_transport,
    integrated_current, junction_observables,
)
from qvalve.fock import FockSpace, ShapeError
from qvalve.liouville import liouvillian, steady_state
from qvalve.model import JunctionParams, PumpDirection, build_hamiltonian, collapse_operators

from oracles import exact_fock_currents

K, MK = PumpDirection.LEFT_TO_RIGHT, PumpDirection.RIGHT_TO_LEFT


def test_single_photon_decay_is_exponential():
    space = FockSpace(1, 1)
    p = JunctionParams(0.0, 0.0, 0.0, 0.0, 0.0)
    traj = evolve(space.fock_state(1, 0), build_hamiltonian(p, space), collapse_operators(p, space),
                  8.0, space=space, n_points=400)
    np.testing.assert_allclose(traj.expectations["n_L"], np.exp(-traj.times), atol=1e-8)
    np.testing.assert_allclose(traj.trace, 1.0, atol=1e-9)
    assert traj.min_eigenvalue.min() > -1e-9


def test_two_photon_decay_with_kerr_and_detuning():
    # Kerr and detuning commute with n, so <n>(t) = 2 e^{-gamma t} regardless
    space = FockSpace(2, 2)
    p = JunctionParams(3.0, -1.0, 10.0, 0.0, 0.0, gamma=0.5)
    traj = evolve(space.fock_state(2, 0), build_hamiltonian(p, space), collapse_operators(p, space),
                  10.0, space=space, n_points=300, gamma=p.gamma)
    np.testing.assert_allclose(traj.expectations["n_L"], 2 * np.exp(-0.5 * traj.times), atol=1e-8)
    np.testing.assert_allclose(traj.expectations["n_R"], 0, atol=1e-12)


def test_coupled_sites_exchange_single_photon():
    # J only, no loss difference: n_L = e^{-t} cos^2(J t), n_R = e^{-t} sin^2(J t)
    space = FockSpace(1, 1)
    p = JunctionParams(0.0, 0.0, 0.0, 0.7, 0.0)
    traj = evolve(space.fock_state(1, 0), build_hamiltonian(p, space), collapse_operators(p, space),
                  6.0, space=space, n_points=500)
    t = traj.times
    np.testing.assert_allclose(traj.q_L, np.exp(-t) * np.cos(0.7 * t) ** 2, atol=1e-8)
    np.testing.assert_allclose(traj.q_R, np.exp(-t) * np.sin(0.7 * t) ** 2, atol=1e-8)
    # int_0^T e^{-t} sin^2(Jt) dt has a closed form
    Q_R = integrated_current(traj.resample(20000), "R")
    T = 6.0
    exact = 0.5 * (1 - np.exp(-T)) - 0.5 * (
        (1 - np.exp(-T) * (np.cos(1.4 * T) - 1.4 * np.sin(1.4 * T))) / (1 + 1.4**2)
    )
    assert Q_R == pytest.approx(exact, abs=1e-7)


def test_long_time_evolution_reaches_steady_state():
    space = FockSpace(4, 4)
    p = JunctionParams(0.5, -0.5, 1.0, 0.4, 0.3)
    H, c = build_hamiltonian(p, space), collapse_operators(p, space)
    traj = evolve(space.vacuum(), H, c, 40.0, space=space, n_points=50)
    rho_ss = steady_state(liouvillian(H, c, sparse=True))
    np.testing.assert_allclose(traj.final_state, rho_ss, atol=1e-7)


@pytest.mark.parametrize("n_init", [1, 2])
@pytest.mark.parametrize("pump", [K, MK])
def test_fock_transport_matches_linear_solve(n_init, pump):
    p = JunctionParams(delta_L=2.0, delta_R=-1.0, u=10.0, j=1.3, f=0.0)
    res = fock_transport(p, n_init, pump)
    qL, qR = exact_fock_currents(p, n_init, pump)
    assert res.Q_L == pytest.approx(qL, abs=2e-6)
    assert res.Q_R == pytest.approx(qR, abs=2e-6)
    assert res.Q_L + res.Q_R == pytest.approx(n_init, abs=1e-6)
    assert res.residual_excitation < 1e-6
    assert res.max_trace_drift < 1e-7


@given(st.floats(-8, 8), st.floats(-8, 8), st.floats(0, 12), st.floats(0.05, 5))
@settings(max_examples=6, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_fock_two_photons_are_conserved(dl, dr, u, j):
    res = fock_transport(JunctionParams(dl, dr, u, j), 2, K)
    assert abs(res.Q_L + res.Q_R - 2) < 1e-6
    assert res.min_eigenvalue > -1e-7


def test_mirrored_device_swaps_currents():
    p = JunctionParams(delta_L=1.0, delta_R=-2.0, u=4.0, j=0.8)
    fwd = fock_transport(p, 2, K)
    m = p.mirrored()
    bwd = fock_transport(m, 2, m.pump)
    assert bwd.Q_R == pytest.approx(fwd.Q_L, abs=1e-6)
    assert bwd.Q_L == pytest.approx(fwd.Q_R, abs=1e-6)


def test_fock_space_defaults_to_initial_photon_number():
    res = fock_transport(JunctionParams(0, 0, 0, 1.0), 1, K)
    assert res.Q_L + res.Q_R == pytest.approx(1.0, abs=1e-6)


def test_incomplete_relaxation_is_reported():
    with pytest.raises(IncompleteRelaxationError) as info:
        fock_transport(JunctionParams(0, 0, 0, 1.0), 2, K, t_cap=3.0)
    assert info.value.horizon == 3.0
    assert info.value.residual > 1e-6


def test_integrated_current_rejects_bad_times():
    traj = Trajectory(times=np.array([0.0, 1.0, 1.0]), expectations={"n_L": np.ones(3)},
                      trace=np.ones(3), min_eigenvalue=np.zeros(3), final_state=np.eye(1))
    with pytest.raises(DataError):
        integrated_current(traj, "L")


def test_evolve_argument_checks(space22):
    p = JunctionParams(0, 0, 0, 0)
    H, c = build_hamiltonian(p, space22), collapse_operators(p, space22)
    with pytest.raises(ValueError):
        evolve(space22.vacuum(), H, c, 0.0, space=space22)
    with pytest.raises(ValueError):
        evolve(space22.vacuum(), H, c, 1.0)
    with pytest.raises(ShapeError):
        evolve(np.eye(4), H, c, 1.0, space=space22)
    with pytest.raises(ValueError):
        fock_transport(p, 0, K)


def test_g2_observables_recorded(space22):
    obs = junction_observables(space22, with_g2=True)
    assert set(obs) == {"n_L", "n_R", "aadd_L", "aadd_R"}
    p = JunctionParams(0, 0, 0, 0, 0.0)
    traj = evolve(space22.fock_state(2, 0), build_hamiltonian(p, space22),
                  collapse_operators(p, space22), 1.0, observables=obs, n_points=5)
    # <a+a+aa> of |2> is 2 and decays as e^{-2t}
    np.testing.assert_allclose(traj.expectations["aadd_L"], 2 * np.exp(-2 * traj.times), atol=1e-8)


def test_excitation_blocks_make_minimal_truncation_exact():
    p = JunctionParams(delta_L=2.5, delta_R=-2.5, u=10.0, j=1.0)
    small = fock_transport(p, 2, K, space=FockSpace(2, 2))
    big = fock_transport(p, 2, K, space=FockSpace(4, 4))
    assert big.Q_L == pytest.approx(small.Q_L, abs=1e-10)
    assert big.Q_R == pytest.approx(small.Q_R, abs=1e-10)


def test_vacuum_stays_put(space22):
    p = JunctionParams(1.0, -1.0, 3.0, 0.5, 0.0)
    traj = evolve(space22.vacuum(), build_hamiltonian(p, space22), collapse_operators(p, space22),
                  5.0, space=space22, n_points=20)
    assert np.all(traj.expectations["n_L"] == 0) and np.all(traj.expectations["n_R"] == 0)
    assert integrated_current(traj, "L") == 0.0


@pytest.mark.parametrize("delta", [0.0, 0.7])
def test_linear_cavity_formula_by_long_time_integration(delta):
    # independent check of <n> = F^2 / (delta^2 + gamma^2/4) and g2 = 1
    from oracles import coherent_g2_and_n

    space = FockSpace(12, 1)
    p = JunctionParams(delta, 0.0, 0.0, 0.0, 0.5)
    obs = junction_observables(space, with_g2=True)
    traj = evolve(space.vacuum(), build_hamiltonian(p, space), collapse_operators(p, space), 60.0,
                  observables=obs, n_points=10)
    n_exact, g2_exact = coherent_g2_and_n(0.5, delta=delta)
    n = traj.expectations["n_L"][-1]
    assert n == pytest.approx(n_exact, abs=1e-6)
    assert traj.expectations["aadd_L"][-1] / n**2 == pytest.approx(g2_exact, abs=1e-6)
