import math

import numpy as np
import pytest
import scipy.sparse as sp

from spinbattery import oracles
from spinbattery.errors import KrylovConvergenceError
from spinbattery.hamiltonians import ModelParams, build_spin_charger, ideal_initial_state
from spinbattery.propagation import (
    MixedState,
    TimeGrid,
    Trajectory,
    connected_block,
    evolve_mixture,
    krylov_propagate,
    spectral_propagate,
)

G = 0.1


def _random_problem(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim))
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return (a + a.T) / 2, psi / np.linalg.norm(psi)


def test_time_grid():
    grid = TimeGrid(10.0, 11)
    assert np.allclose(grid.times, np.arange(11.0))
    with pytest.raises(ValueError):
        TimeGrid(1.0, 1)
    with pytest.raises(ValueError):
        TimeGrid(-1.0, 5)
    w = TimeGrid.charging_window(G, 4)
    assert w.t_max == pytest.approx(8 * math.pi / (G * 2))
    assert w.points == 4000


def test_random_engines_agree():
    h, psi = _random_problem(50, 7)
    grid = TimeGrid(3.0, 31)
    a = spectral_propagate(h, psi, grid)
    b = krylov_propagate(sp.csr_matrix(h), psi, grid)
    assert np.allclose(a[0], psi)
    assert np.max(np.abs(a - b)) < 1e-8


@pytest.mark.parametrize("engine", ["spectral", "krylov"])
def test_unitarity_energy_reversibility(engine):
    params = ModelParams(5, 7, g=G, gamma=0.6, g1=0.02)
    h = build_spin_charger(params)
    psi0 = ideal_initial_state(params.basis)
    times = np.linspace(0, 120, 61)
    traj = Trajectory(h, psi0, engine=engine)
    states = traj.states(times)
    assert np.max(np.abs(np.linalg.norm(states, axis=1) - 1)) < 1e-9
    energy = traj.expectation(times, h)
    assert np.max(np.abs(energy - energy[0])) < 1e-9

    psi_t = traj.state(37.5)
    back = Trajectory(h, psi_t, engine=engine, restrict=False).state(-37.5)
    assert np.max(np.abs(back - psi0)) < 1e-8


def test_frame_equivalence():
    times = np.linspace(0, 200, 101)
    out = []
    for frame in ("lab", "rotating"):
        params = ModelParams(3, 6, g=G, frame=frame)
        out.append(Trajectory(build_spin_charger(params), ideal_initial_state(params.basis))
                   .expectation(times, params.basis.battery_excitations))
    assert np.max(np.abs(out[0] - out[1])) < 1e-9


@pytest.mark.parametrize("engine", ["spectral", "krylov"])
def test_zero_hamiltonian(engine):
    _, psi = _random_problem(6, 3)
    states = Trajectory(sp.csr_matrix((6, 6)), psi, engine=engine, restrict=False).states([0.0, 1.0, 50.0])
    assert np.allclose(states, psi[None, :], atol=1e-14)


@pytest.mark.parametrize("N", [2, 5])
def test_two_cell_amplitudes(N):
    params = ModelParams(2, N, g=G, frame="rotating")
    b = params.basis
    times = np.linspace(0, 40 / G, 80)
    for engine in ("spectral", "krylov"):
        s = Trajectory(build_spin_charger(params), ideal_initial_state(b), engine=engine).states(times)
        sym = s[:, b.index(1, N - 1)] / math.sqrt(2)
        sim = np.array([s[:, b.index(2, N - 2)], sym, sym, s[:, b.index(0, N)]])
        tol = 1e-10 if engine == "spectral" else 1e-8
        assert np.max(np.abs(sim - oracles.two_cell_amplitudes(N, times, G))) < tol
        # c2, c3 purely imaginary; c1, c4 real
        assert np.max(np.abs(sim[1].real)) < tol and np.max(np.abs(sim[0].imag)) < tol


def test_krylov_two_cell_energy():
    params = ModelParams(2, 2, g=G)
    times = np.linspace(0, 4 / G, 201)
    traj = Trajectory(build_spin_charger(params), ideal_initial_state(params.basis), engine="krylov")
    e = traj.expectation(times, params.basis.battery_excitations)
    assert np.max(np.abs(e - oracles.two_cell_energy(2, times, G))) < 1e-8


def test_krylov_matches_spectral_large():
    params = ModelParams(30, 30, g=G, gamma=0.6)
    h = build_spin_charger(params)
    psi0 = ideal_initial_state(params.basis)
    times = np.linspace(0, 15, 76)
    n_b = params.basis.battery_excitations
    a = Trajectory(h, psi0, engine="spectral").expectation(times, n_b)
    b = Trajectory(h, psi0, engine="krylov").expectation(times, n_b)
    assert np.max(np.abs(a - b)) < 1e-7


def test_krylov_random_access_uses_checkpoints():
    params = ModelParams(4, 4, g=G, gamma=0.5)
    h = build_spin_charger(params)
    psi0 = ideal_initial_state(params.basis)
    ref = Trajectory(h, psi0, engine="spectral")
    kry = Trajectory(h, psi0, engine="krylov")
    for t in (30.0, 10.0, 31.0, 0.0, 29.5):
        assert np.allclose(kry.state(t), ref.state(t), atol=1e-9)


def test_krylov_gives_up():
    h, psi = _random_problem(40, 1)
    with pytest.raises(KrylovConvergenceError):
        Trajectory(sp.csr_matrix(h * 1e12), psi, engine="krylov", restrict=False, max_subspace=2, tol=1e-14).state(1.0)


def test_connected_block():
    params = ModelParams(2, 4, g=G)
    b = params.basis
    block = connected_block(build_spin_charger(params).matrix, ideal_initial_state(b))
    assert sorted(block.tolist()) == sorted(b.index(nb, 4 - nb) for nb in range(3))


def test_mixed_state_validation():
    e = np.eye(3)
    MixedState(((0.5, e[0]), (0.5, e[1])))
    with pytest.raises(ValueError):
        MixedState(((0.5, e[0]), (0.4, e[1])))
    with pytest.raises(ValueError):
        MixedState(((1.2, e[0]), (-0.2, e[1])))
    with pytest.raises(ValueError):
        MixedState(((1.0, 2 * e[0]),))


def test_single_branch_mixture_is_pure():
    params = ModelParams(3, 3, g=G, gamma=0.2)
    h = build_spin_charger(params)
    psi0 = ideal_initial_state(params.basis)
    grid = TimeGrid(50.0, 26)
    n_b = params.basis.battery_excitations
    a = evolve_mixture(h, MixedState.pure(psi0), grid, n_b)
    assert np.allclose(a, Trajectory(h, psi0).expectation(grid.times, n_b), atol=1e-14)


def test_mixture_is_weighted_sum():
    params = ModelParams(2, 3, g=G, gamma=0.4)
    h = build_spin_charger(params)
    b = params.basis
    s1, s2 = b.basis_state(0, 3), b.basis_state(1, 1)
    grid = TimeGrid(30.0, 16)
    n_b = b.battery_excitations
    mixed = evolve_mixture(h, MixedState(((0.3, s1), (0.7, s2))), grid, n_b)
    ref = 0.3 * Trajectory(h, s1).expectation(grid.times, n_b) + 0.7 * Trajectory(h, s2).expectation(grid.times, n_b)
    assert np.allclose(mixed, ref, atol=1e-13)
