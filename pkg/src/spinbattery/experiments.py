"""Parameter sweeps: capacity/power landscapes, collective advantage, crosstalk, non-ideal states.

All reported quantities are dimensionless: energies in units of omega0,
powers in units of g*omega0 (``p_max``) and times as g*t.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CutoffConvergenceError
from .fullspace import build_full_hamiltonian, nonideal_battery_mixture, nonideal_charger_mixture
from .hamiltonians import (
    SINGLE_CELL_BATTERY,
    SINGLE_CELL_INITIAL,
    ModelParams,
    TcParams,
    build_single_cell,
    build_spin_charger,
    build_tc,
    ideal_initial_state,
)
from .observables import ChargingSummary, ChargingTrace, charging_trace, summarize
from .propagation import TimeGrid


@dataclass(frozen=True)
class LandscapePoint:
    M: int
    N: int
    gamma: float
    e_max: float
    p_max: float
    gt_e: float
    gt_p: float
    g1_over_g: float = 0.0
    charger: str = "spin"

    @property
    def p_max_collective(self) -> float:
        """P_max in units of sqrt(N) g omega0 (N = charger spins or initial photons)."""
        return self.p_max / math.sqrt(self.N)


def _map(func: Callable, items: Sequence, threads: int | None):
    items = list(items)
    workers = threads if threads is not None else (os.cpu_count() or 1)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


def default_grid(g: float, n_charger: int, points: int = 4000) -> TimeGrid:
    return TimeGrid.charging_window(g, n_charger, points)


def simulate(params: ModelParams, grid: TimeGrid | None = None, **engine_kw) -> tuple[ChargingTrace, ChargingSummary]:
    """Charge from the ideal state under the collective spin-charger Hamiltonian."""
    grid = grid or default_grid(params.g, params.N)
    basis = params.basis
    trace = charging_trace(build_spin_charger(params, basis), ideal_initial_state(basis),
                           basis.battery_excitations, grid, params.omega0, **engine_kw)
    return trace, summarize(trace)


def _to_point(params: ModelParams, summary: ChargingSummary) -> LandscapePoint:
    scale = params.g * params.omega0
    return LandscapePoint(
        M=params.M, N=params.N, gamma=params.gamma,
        e_max=summary.e_max / params.omega0, p_max=summary.p_max / scale,
        gt_e=summary.t_e * params.g, gt_p=summary.t_p * params.g,
        g1_over_g=params.g1 / params.g,
    )


def spin_point(params: ModelParams) -> LandscapePoint:
    return _to_point(params, simulate(params)[1])


def landscape(Ms: Iterable[int], ratios: Iterable[float], gammas: Iterable[float], g: float = 0.1,
              omega0: float = 1.0, threads: int | None = 1) -> list[LandscapePoint]:
    """One point per (ratio, gamma, M), with N = ratio * M chargers."""
    jobs = []
    for ratio in ratios:
        for gamma in gammas:
            for M in Ms:
                N = ratio * M
                if abs(N - round(N)) > 1e-9:
                    raise ValueError(f"N = {ratio} * {M} is not an integer")
                jobs.append(ModelParams(int(M), int(round(N)), omega0=omega0, g=g, gamma=float(gamma)))
    return _map(spin_point, jobs, threads)


def parallel_unit(gamma: float = 0.0, g: float = 0.1, omega0: float = 1.0) -> ChargingSummary:
    """One cell charged by one spin, simulated with the explicit 4x4 Hamiltonian."""
    init = np.zeros(4, dtype=complex)
    init[SINGLE_CELL_INITIAL] = 1.0
    trace = charging_trace(build_single_cell(gamma, g, omega0), init, SINGLE_CELL_BATTERY,
                           default_grid(g, 1), omega0)
    return summarize(trace)


@dataclass(frozen=True)
class ScalingFit:
    Ms: tuple[int, ...]
    eta: tuple[float, ...]
    beta_global: float
    beta_local: float
    residual: float


def fit_exponent(Ms: Sequence[int], eta: Sequence[float]) -> ScalingFit:
    """eta ~ M^beta: log-log least squares over [M_max/4, M_max] and the two-point slope at M_max."""
    Ms = np.asarray(Ms, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if len(Ms) < 3:
        raise ValueError(f"need at least 3 battery sizes for a fit, got {len(Ms)}")
    order = np.argsort(Ms)
    Ms, eta = Ms[order], eta[order]
    m_max = Ms[-1]
    window = Ms >= m_max / 4
    if window.sum() < 2:
        window = np.ones_like(Ms, dtype=bool)
    x, y = np.log(Ms[window]), np.log(eta[window])
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    residual = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
    local = (math.log(eta[-1]) - math.log(eta[-2])) / (math.log(Ms[-1]) - math.log(Ms[-2]))
    return ScalingFit(tuple(int(m) for m in Ms), tuple(float(e) for e in eta), float(coef[0]), float(local), residual)


def eta_scaling(Ms: Sequence[int], gamma: float = 0.0, ratio: int = 1, g: float = 0.1, omega0: float = 1.0,
                threads: int | None = 1) -> ScalingFit:
    """Collective-over-parallel power ratio eta(M) = P_max / (M p_max) and its exponent."""
    if ratio != 1:
        raise ValueError("the parallel baseline assumes one charger spin per cell (ratio 1)")
    unit = parallel_unit(gamma, g, omega0).p_max
    points = landscape(Ms, [ratio], [gamma], g, omega0, threads)
    eta = [pt.p_max * g * omega0 / (pt.M * unit) for pt in points]
    return fit_exponent([pt.M for pt in points], eta)


@dataclass(frozen=True)
class SlopeFit:
    ratio: float
    e_per_p: float
    intercept: float
    points: int

    @property
    def p_per_e(self) -> float:
        """The same fitted line read with E_max on the abscissa."""
        return 1.0 / self.e_per_p


def slope_fit(points: Sequence[LandscapePoint]) -> dict[float, SlopeFit]:
    """OLS fit E_max/omega0 = a + b * P_max/(sqrt(N) g omega0), one per charger ratio N/M."""
    groups: dict[float, list[LandscapePoint]] = {}
    for pt in points:
        groups.setdefault(round(pt.N / pt.M, 9), []).append(pt)
    fits = {}
    for ratio, pts in sorted(groups.items()):
        if len(pts) < 3:
            raise ValueError(f"ratio {ratio}: need at least 3 points, got {len(pts)}")
        x = np.array([pt.p_max_collective for pt in pts])
        y = np.array([pt.e_max for pt in pts])
        if np.ptp(x) == 0:
            raise ValueError(f"ratio {ratio}: all powers coincide, slope undefined")
        b, a = np.polyfit(x, y, 1)
        fits[ratio] = SlopeFit(ratio, float(b), float(a), len(pts))
    return fits


def tc_charge(params: TcParams, grid: TimeGrid | None = None) -> tuple[ChargingTrace, ChargingSummary]:
    grid = grid or default_grid(params.g_tilde, params.n_init)
    trace = charging_trace(build_tc(params), params.initial_state(), params.battery_excitations, grid, params.omega0)
    return trace, summarize(trace)


def tc_converged(params: TcParams, rtol: float = 1e-6, max_doublings: int = 6) -> tuple[TcParams, ChargingSummary]:
    """Grow the Fock cutoff until E_max is stable (a single run when gamma = 0)."""
    _, summary = tc_charge(params)
    if params.gamma == 0:
        return params, summary
    for _ in range(max_doublings):
        bigger = replace(params, cutoff=2 * params.cutoff)
        _, new = tc_charge(bigger)
        if abs(new.e_max - summary.e_max) <= rtol * abs(new.e_max):
            return bigger, new
        params, summary = bigger, new
    raise CutoffConvergenceError(
        f"Fock cutoff not converged after {max_doublings} doublings (M={params.M}, n_init={params.n_init}, "
        f"gamma={params.gamma}, cutoff={params.cutoff})"
    )


def _tc_point(args) -> LandscapePoint:
    M, gamma, g, omega0 = args
    params, summary = tc_converged(TcParams(M, M, omega0=omega0, g_tilde=g, gamma=gamma))
    scale = g * omega0
    return LandscapePoint(M, M, gamma, summary.e_max / omega0, summary.p_max / scale,
                          summary.t_e * g, summary.t_p * g, charger="cavity")


def tc_reference(Ms: Iterable[int], gamma: float = 0.0, g: float = 0.1, omega0: float = 1.0,
                 threads: int | None = 1) -> list[LandscapePoint]:
    """Cavity benchmark with M initial photons at bare coupling g; ``N`` holds the photon number."""
    return _map(_tc_point, [(int(M), gamma, g, omega0) for M in Ms], threads)


def tc_scaling(Ms: Sequence[int], g: float = 0.1, omega0: float = 1.0, threads: int | None = 1) -> ScalingFit:
    """Cavity-charger eta(M); the parallel unit is one cell with one photon at coupling g."""
    _, unit = tc_converged(TcParams(1, 1, omega0=omega0, g_tilde=g))
    points = tc_reference(Ms, 0.0, g, omega0, threads)
    eta = [pt.p_max * g * omega0 / (pt.M * unit.p_max) for pt in points]
    return fit_exponent([pt.M for pt in points], eta)


def crosstalk_point(g1_over_g: float, M: int = 2, N: int = 4, g: float = 0.1, omega0: float = 1.0) -> LandscapePoint:
    params = ModelParams(M, N, omega0=omega0, g=g, g1=g1_over_g * g, frame="rotating")
    return _to_point(params, simulate(params)[1])


def crosstalk_scan(g1_over_g: Iterable[float], M: int = 2, N: int = 4, g: float = 0.1, omega0: float = 1.0,
                   threads: int | None = 1) -> list[LandscapePoint]:
    return _map(partial(crosstalk_point, M=M, N=N, g=g, omega0=omega0), list(g1_over_g), threads)


def crosstalk_crossing(fraction: float = 0.01, lo: float = 1.0, hi: float = 10.0, M: int = 2, N: int = 4,
                       g: float = 0.1, xtol: float = 1e-3) -> float:
    """g1/g at which E_max falls to ``fraction`` of the full charge M omega0 (bisection)."""
    def excess(r):
        return crosstalk_point(r, M, N, g).e_max - fraction * M

    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo * f_hi > 0:
        raise ValueError(f"no crossing of {fraction:.3g} M omega0 inside g1/g in [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = excess(mid)
        if f_mid * f_lo > 0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class NonidealReport:
    ideal: ChargingSummary
    mixed: ChargingSummary

    @property
    def energy_fraction(self) -> float:
        return self.mixed.e_max / self.ideal.e_max

    @property
    def power_fraction(self) -> float:
        return self.mixed.p_max / self.ideal.p_max


def nonideal_charger(p: Sequence[float], M: int = 2, g: float = 0.1, omega0: float = 1.0) -> NonidealReport:
    """Charger prepared in the mixture p[0] ideal + p[l] with l-1 excited spins."""
    N = len(p) - 1
    params = ModelParams(M, N, omega0=omega0, g=g, frame="rotating")
    mixed, basis = nonideal_charger_mixture(p, M, N)
    grid = default_grid(g, N)
    h = build_spin_charger(params, basis)
    trace = charging_trace(h, mixed, basis.battery_excitations, grid, omega0)
    return NonidealReport(simulate(params, grid)[1], summarize(trace))


def nonideal_battery(p_tilde: Sequence[float], N: int = 4, g: float = 0.1, omega0: float = 1.0) -> NonidealReport:
    """Battery prepared in the mixture p~[0] empty + p~[k] with cell k excited."""
    M = len(p_tilde) - 1
    params = ModelParams(M, N, omega0=omega0, g=g, frame="rotating")
    mixed, basis = nonideal_battery_mixture(p_tilde, N)
    grid = default_grid(g, N)
    h = build_full_hamiltonian(params, basis)
    trace = charging_trace(h, mixed, basis.battery_excitations, grid, omega0)
    return NonidealReport(simulate(params, grid)[1], summarize(trace))
