import math

import numpy as np
import pytest

from spinbattery import oracles
from spinbattery.fullspace import (
    HybridBasis,
    bits_to_index,
    build_full_hamiltonian,
    nonideal_battery_mixture,
    nonideal_charger_mixture,
    thermal_charger_mixture,
    thermal_collective_estimate,
)
from spinbattery.hamiltonians import ModelParams, build_spin_charger, ideal_initial_state
from spinbattery.observables import charging_trace
from spinbattery.propagation import MixtureTrajectory, TimeGrid, Trajectory

G = 0.1


def _energy(H, initial, n_b, grid):
    return charging_trace(H, initial, n_b, grid).energy


@pytest.mark.parametrize("M, N", [(2, 2), (2, 3), (3, 3), (2, 4)])
@pytest.mark.parametrize("gamma, g1", [(0.0, 0.0), (0.6, 0.0), (1.0, 0.05)])
def test_full_matches_collective(M, N, gamma, g1):
    params = ModelParams(M, N, g=G, gamma=gamma, g1=g1)
    grid = TimeGrid(60.0, 121)
    hb = HybridBasis(M, N)
    full = _energy(build_full_hamiltonian(params, hb), hb.ideal_state(), hb.battery_excitations, grid)
    coll = _energy(build_spin_charger(params), ideal_initial_state(params.basis), params.basis.battery_excitations, grid)
    assert np.max(np.abs(full - coll)) < 1e-9


def test_full_two_by_two_closed_form():
    params = ModelParams(2, 2, g=G)
    hb = HybridBasis(2, 2)
    assert hb.dim == 16
    grid = TimeGrid(4 / G, 201)
    e = _energy(build_full_hamiltonian(params, hb), hb.ideal_state(), hb.battery_excitations, grid)
    assert np.max(np.abs(e - oracles.two_cell_energy(2, grid.times, G))) < 1e-10


def test_hybrid_sides_agree():
    params = ModelParams(3, 4, g=G, gamma=0.3, g1=0.02)
    grid = TimeGrid(40.0, 41)
    ref = None
    for bf in (True, False):
        for cf in (True, False):
            hb = HybridBasis(3, 4, battery_full=bf, charger_full=cf)
            e = _energy(build_full_hamiltonian(params, hb), hb.ideal_state(), hb.battery_excitations, grid)
            if ref is None:
                ref = e
            assert np.max(np.abs(e - ref)) < 1e-9


def test_hermitian_and_bounds():
    h = build_full_hamiltonian(ModelParams(2, 3, g=G, gamma=0.7, g1=0.1), HybridBasis(2, 3)).dense()
    assert np.max(np.abs(h - h.T)) <= 1e-14
    with pytest.raises(ValueError):
        HybridBasis(13, 1, charger_full=False)
    with pytest.raises(ValueError):
        HybridBasis(8, 7)
    with pytest.raises(ValueError):
        build_full_hamiltonian(ModelParams(2, 2), HybridBasis(2, 3))


def test_crosstalk_alone_leaves_battery_alone():
    hb = HybridBasis(2, 3)
    with_x = build_full_hamiltonian(ModelParams(2, 3, g=G, g1=0.3, frame="rotating"), hb).dense()
    without = build_full_hamiltonian(ModelParams(2, 3, g=G, frame="rotating"), hb).dense()
    crosstalk = with_x - without
    assert np.max(np.abs(crosstalk)) > 0
    psi = (hb.state(bits_to_index([1, 0]), bits_to_index([1, 0, 1])) + hb.state(0, 3)) / math.sqrt(2)
    n = Trajectory(crosstalk, psi).expectation(np.linspace(0, 50, 26), hb.battery_excitations)
    assert np.max(np.abs(n - n[0])) < 1e-12


def test_charger_mixture_branches():
    mixed, basis = nonideal_charger_mixture([1.0, 0, 0, 0, 0], 2, 4)
    assert len(mixed.branches) == 1
    assert np.array_equal(mixed.branches[0][1], ideal_initial_state(basis))
    # everything on l = 1: all chargers down, nothing to give
    mixed, basis = nonideal_charger_mixture([0, 1.0, 0, 0, 0], 2, 4)
    e = MixtureTrajectory(build_spin_charger(ModelParams(2, 4, g=G)), mixed).expectation(
        np.linspace(0, 100, 11), basis.battery_excitations)
    assert np.max(np.abs(e)) < 1e-14
    with pytest.raises(ValueError):
        nonideal_charger_mixture([0.5, 0.6, 0, 0, 0], 2, 4)
    with pytest.raises(ValueError):
        nonideal_charger_mixture([1.0, 0], 2, 4)


def test_battery_branch_decomposition():
    """|10>_B = (sym + anti)/sqrt2; the antisymmetric half stays put."""
    N = 4
    mixed, hb = nonideal_battery_mixture([0.0, 1.0, 0.0], N)
    params = ModelParams(2, N, g=G)
    grid = TimeGrid(80.0, 161)
    full = charging_trace(build_full_hamiltonian(params, hb), mixed, hb.battery_excitations, grid).energy
    sym = params.basis.basis_state(1, N)
    n_sym = Trajectory(build_spin_charger(params), sym).expectation(grid.times, params.basis.battery_excitations)
    assert np.max(np.abs(full - 0.5 * (n_sym - 1.0))) < 1e-10

    psi0 = mixed.branches[0][1]
    anti = np.zeros(4)
    anti[bits_to_index([1, 0])], anti[bits_to_index([0, 1])] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    states = Trajectory(build_full_hamiltonian(params, hb), psi0).states(grid.times)
    amps = np.einsum("b,tbc->tc", anti, states.reshape(len(grid.times), 4, N + 1))
    pop = np.sum(np.abs(amps) ** 2, axis=1)
    assert np.max(np.abs(pop - 0.5)) < 1e-10


def test_battery_mixture_ideal_limit():
    mixed, hb = nonideal_battery_mixture([1.0, 0.0, 0.0], 4)
    assert len(mixed.branches) == 1
    assert np.array_equal(mixed.branches[0][1], hb.ideal_state())


def test_thermal_collective_estimate_matches_closed_form():
    rng = np.random.default_rng(16)
    params = ModelParams(2, 2, g=G)
    h = build_spin_charger(params)
    for p0 in (0.0, 0.3, 0.7, 1.0):
        mixed, basis = thermal_collective_estimate(p0)
        t = np.sort(rng.uniform(0, 200, size=25))
        e = MixtureTrajectory(h, mixed).expectation(t, basis.battery_excitations)
        assert np.max(np.abs(e - oracles.thermal_energy(p0, t, G))) < 1e-10


def test_thermal_full_charger():
    """The site-resolved mixture: the singlet half of |1_1 0_2> is dark."""
    params = ModelParams(2, 2, g=G)
    t = np.sort(np.random.default_rng(3).uniform(0, 200, size=100))
    for p0 in (0.0, 0.5, 1.0):
        mixed, hb = thermal_charger_mixture(p0)
        e = MixtureTrajectory(build_full_hamiltonian(params, hb), mixed).expectation(t, hb.battery_excitations)
        expected = (1 - p0) * 2 * np.sin(math.sqrt(2) * G * t) ** 2 + 0.5 * p0 * np.sin(2 * G * t) ** 2
        assert np.max(np.abs(e - expected)) < 1e-10
        if p0 == 0.0:
            assert np.max(np.abs(e - oracles.thermal_energy(0.0, t, G))) < 1e-10
    with pytest.raises(ValueError):
        thermal_charger_mixture(-0.1)
