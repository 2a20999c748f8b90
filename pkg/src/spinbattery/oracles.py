"""Closed-form reference results.

Nothing here touches the matrix machinery, so these functions can serve as
independent ground truth for the simulation stack.

* two-cell battery (M = 2, gamma = 0) charged by N >= 2 spins: amplitudes,
  stored energy, capacity and the time it is first reached;
* one cell charged by one spin (the parallel-charging unit);
* two cells, two chargers, one charger partially excited.
"""

from __future__ import annotations

import math

import numpy as np

TC_TWO_CELL_EMAX = 16.0 / 9.0


def _check_n(N: int) -> None:
    if N < 2:
        raise ValueError(f"the two-cell solution requires N >= 2, got N={N}")


def xi(N: int) -> float:
    _check_n(N)
    return math.sqrt(2.0 * (3 * N - 2))


def two_cell_amplitudes(N: int, t, g: float = 0.1) -> np.ndarray:
    """Amplitudes (c1, c2, c3, c4) on |11, N/2-2>, |10, N/2-1>, |01, N/2-1>, |00, N/2>.

    Rotating frame, starting from |00, N/2>.  Shape ``(4,) + shape(t)``.
    """
    x = xi(N)
    x2 = x * x
    phase = x * g * np.asarray(t, dtype=float)
    c1 = -2.0 * math.sqrt(2.0 * (x2 + 4.0) * (x2 - 2.0)) / (3.0 * x2) * np.sin(phase / 2.0) ** 2
    c2 = -1j * math.sqrt((x2 + 4.0) / (6.0 * x2)) * np.sin(phase)
    c4 = ((x2 + 4.0) * np.cos(phase) + 2.0 * (x2 - 2.0)) / (3.0 * x2)
    return np.array([c1 + 0j, c2, c2, c4 + 0j])


def two_cell_energy(N: int, t, g: float = 0.1, omega0: float = 1.0):
    """Stored energy of the two-cell battery."""
    x = xi(N)
    x2 = x * x
    cos = np.cos(x * g * np.asarray(t, dtype=float))
    return (x2 + 4.0) * omega0 / (9.0 * x2 * x2) * ((x2 - 8.0) * cos - (7.0 * x2 - 8.0)) * (cos - 1.0)


def two_cell_energy_from_amplitudes(N: int, t, g: float = 0.1, omega0: float = 1.0):
    c = two_cell_amplitudes(N, t, g)
    return omega0 * (np.abs(c[0]) ** 2 - np.abs(c[3]) ** 2 + 1.0)


def two_cell_emax(N: int, omega0: float = 1.0) -> float:
    _check_n(N)
    return 16.0 * N * (N - 1) / (3 * N - 2) ** 2 * omega0


def two_cell_tbar(N: int, g: float = 0.1) -> float:
    """First time the two-cell capacity is reached."""
    return math.pi / (xi(N) * g)


def single_cell(t, g: float = 0.1, omega0: float = 1.0):
    """(e(t), p(t)) for one cell charged by one spin; p(0) = 0."""
    t = np.asarray(t, dtype=float)
    e = omega0 * np.sin(g * t) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(t > 0, e / np.where(t > 0, t, 1.0), 0.0)
    return e, p


def optimal_phase(tol: float = 1e-12) -> float:
    """Root of tan x = 2x in (0, pi/2), by bisection on 2x cos x - sin x."""
    lo, hi = math.pi / 4, math.pi / 2
    f = lambda x: 2.0 * x * math.cos(x) - math.sin(x)  # noqa: E731
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def single_cell_pmax(g: float = 0.1, omega0: float = 1.0) -> tuple[float, float]:
    """(p_max, t*) of the single cell: p_max = omega0 g sin^2(x*)/x* at g t* = x*."""
    x = optimal_phase()
    return omega0 * g * math.sin(x) ** 2 / x, x / g


def thermal_energy(p0: float, t, g: float = 0.1, omega0: float = 1.0):
    """Closed form for M = N = 2 with weight p0 on the one-excitation charger branch."""
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0 must lie in [0, 1], got {p0!r}")
    t = np.asarray(t, dtype=float)
    s2 = np.sin(math.sqrt(2.0) * g * t) ** 2
    return 2.0 * omega0 * s2 - p0 * omega0 * (2.0 * s2 - np.sin(2.0 * g * t) ** 2)
