"""Stored energy, average charging power and their maxima."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .propagation import MixedState, MixtureTrajectory, TimeGrid, Trajectory

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class HorizonWarning(UserWarning):
    """The maximum sits on the last grid point; the window may be too short."""


def battery_excitation(state, battery_excitations) -> float:
    """<n_B> for a pure state vector or a ``MixedState``."""
    n_b = np.asarray(battery_excitations, dtype=float)
    if isinstance(state, MixedState):
        return state.expectation(n_b)
    psi = np.asarray(state)
    return float(np.sum(np.abs(psi) ** 2 * n_b))


@dataclass(frozen=True)
class ChargingTrace:
    """E(t) on a grid, with an optional exact evaluator used for refinement."""

    times: np.ndarray
    energy: np.ndarray
    energy_at: Callable[[float], float] | None = field(default=None, repr=False, compare=False)

    @property
    def power(self) -> np.ndarray:
        power = np.zeros_like(self.energy)
        power[1:] = self.energy[1:] / self.times[1:]
        return power

    def power_at(self, t: float) -> float:
        return 0.0 if t == 0 else self.energy_at(t) / t


@dataclass(frozen=True)
class ChargingSummary:
    e_max: float
    t_e: float
    p_max: float
    t_p: float
    degenerate: bool = False


def golden_section_max(f: Callable[[float], float], a: float, b: float, xtol: float) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on [a, b]; returns (x, f(x))."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _locate_max(times, values, evaluate, refine: bool, rtol_time: float, rtol_equal: float,
                label: str) -> tuple[float, float]:
    best = int(np.argmax(values))
    v_best = float(values[best])
    if best == len(values) - 1 and len(values) > 2:
        warnings.warn(f"{label} maximum lies on the last grid point t={times[-1]:.6g}", HorizonWarning, stacklevel=3)
    if not refine or evaluate is None:
        first = int(np.flatnonzero(values >= v_best - rtol_equal * abs(v_best))[0])
        return float(values[first]), float(times[first])

    # every interior local maximum close to the grid optimum is refined
    inner = (values[1:-1] >= values[:-2]) & (values[1:-1] >= values[2:])
    peaks = np.flatnonzero(inner) + 1
    cand = peaks[values[peaks] >= v_best - 1e-3 * abs(v_best)].tolist()
    if best not in cand:
        cand.append(best)
    results = []
    for k in sorted(cand):
        lo, hi = times[max(k - 1, 0)], times[min(k + 1, len(times) - 1)]
        x, fx = golden_section_max(evaluate, lo, hi, rtol_time * max(times[k], hi - lo))
        if fx < values[k]:
            x, fx = float(times[k]), float(values[k])
        results.append((float(fx), float(x)))
    top = max(v for v, _ in results)
    for v, x in sorted(results, key=lambda r: r[1]):
        if v >= top - rtol_equal * abs(top):
            return v, x
    raise AssertionError("unreachable")


def summarize(trace: ChargingTrace, refine: bool = True, rtol_time: float = 1e-6,
              rtol_equal: float = 1e-9) -> ChargingSummary:
    """Global E_max and P_max over the trace, with first-attainment times.

    With ``refine`` and an evaluator on the trace, each candidate grid peak is
    polished by golden-section search inside its bracketing grid interval.
    """
    times, energy = np.asarray(trace.times), np.asarray(trace.energy)
    if np.allclose(energy, 0.0, atol=1e-14):
        return ChargingSummary(0.0, float(times[1]), 0.0, float(times[1]), degenerate=True)
    e_max, t_e = _locate_max(times, energy, trace.energy_at, refine, rtol_time, rtol_equal, "energy")
    power_at = trace.power_at if trace.energy_at is not None else None
    p_max, t_p = _locate_max(times[1:], trace.power[1:], power_at, refine, rtol_time, rtol_equal, "power")
    return ChargingSummary(e_max, t_e, p_max, t_p)


def charging_trace(H, initial, battery_excitations, grid: TimeGrid, omega0: float = 1.0,
                   **engine_kw) -> ChargingTrace:
    """Stored energy omega0 (<n_B>(t) - <n_B>(0)) for a pure or mixed initial state."""
    n_b = np.asarray(battery_excitations, dtype=float)
    if isinstance(initial, MixedState):
        traj = MixtureTrajectory(H, initial, **engine_kw)
        base = initial.expectation(n_b)
    else:
        traj = Trajectory(H, initial, **engine_kw)
        base = battery_excitation(initial, n_b)
    times = grid.times
    energy = omega0 * (traj.expectation(times, n_b) - base)
    energy[0] = 0.0

    def energy_at(t: float) -> float:
        return omega0 * (traj.expectation_at(t, n_b) - base)

    return ChargingTrace(times, energy, energy_at)


def trace_from_function(energy_fn: Callable[[float], float], grid: TimeGrid) -> ChargingTrace:
    """Wrap a closed-form E(t) as a refinable trace."""
    times = grid.times
    energy = np.array([energy_fn(float(t)) for t in times])
    return ChargingTrace(times, energy, energy_fn)
