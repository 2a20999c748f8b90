"""Unitary evolution under a static Hamiltonian.

Two engines are provided: a spectral one (dense eigendecomposition of the
dynamically connected block) and a Lanczos/Krylov one for large sparse
blocks.  Both only ever touch the block of the Hamiltonian reachable from
the initial state, which is exact: the orbit of ``psi0`` under ``H`` never
leaves the connected component of the sparsity graph containing its support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .dicke import HermitianOperator
from .errors import EigensolverError, KrylovConvergenceError

Engine = Literal["auto", "spectral", "krylov"]

DENSE_LIMIT = 20_000


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``0 = t_0 < ... < t_{points-1} = t_max``."""

    t_max: float
    points: int = 4000

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"a time grid needs at least 2 points, got {self.points}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max!r}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.points)

    @classmethod
    def charging_window(cls, g: float, n_charger: int, points: int = 4000, periods: float = 8.0) -> "TimeGrid":
        """Default horizon ``periods * pi / (g sqrt(N))``."""
        return cls(periods * math.pi / (g * math.sqrt(max(n_charger, 1))), points)


@dataclass(frozen=True)
class MixedState:
    """Convex combination of pure states, evolved branch by branch."""

    branches: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self):
        branches = tuple((float(p), np.asarray(psi, dtype=complex)) for p, psi in self.branches)
        if not branches:
            raise ValueError("a mixed state needs at least one branch")
        probs = np.array([p for p, _ in branches])
        if np.any(probs < 0):
            raise ValueError(f"negative branch probability in {probs.tolist()}")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"branch probabilities sum to {probs.sum()!r}, not 1")
        dims = {psi.shape for _, psi in branches}
        if len(dims) != 1:
            raise ValueError(f"branches live in different spaces: {sorted(dims)}")
        for p, psi in branches:
            if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
                raise ValueError("every branch must be normalized")
        object.__setattr__(self, "branches", branches)

    @classmethod
    def pure(cls, psi) -> "MixedState":
        return cls(((1.0, psi),))

    @property
    def dim(self) -> int:
        return self.branches[0][1].shape[0]

    def expectation(self, diag) -> float:
        diag = np.asarray(diag)
        return float(sum(p * np.vdot(psi, diag * psi).real for p, psi in self.branches))


def _csr(H) -> sp.csr_matrix:
    if isinstance(H, HermitianOperator):
        return H.matrix
    return sp.csr_matrix(H)


def connected_block(H, psi0, atol: float = 0.0) -> np.ndarray:
    """Indices of the sparsity-graph components touched by the support of ``psi0``."""
    mat = _csr(H)
    pattern = (abs(mat) > 0).astype(np.int8)
    _, labels = connected_components(pattern, directed=False)
    support = np.flatnonzero(np.abs(psi0) > atol)
    return np.flatnonzero(np.isin(labels, np.unique(labels[support])))


class _Spectral:
    def __init__(self, h: sp.csr_matrix, psi: np.ndarray):
        dense = h.toarray()
        try:
            self.energies, self.vectors = np.linalg.eigh(dense)
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(f"dense eigensolver failed at dimension {dense.shape[0]}: {exc}") from exc
        self.coeffs = self.vectors.T @ psi

    def states(self, times: np.ndarray) -> np.ndarray:
        phases = np.exp(-1j * np.outer(self.energies, times)) * self.coeffs[:, None]
        return (self.vectors @ phases).T


class _Krylov:
    """Adaptive Lanczos stepping of exp(-iHt) applied to a vector."""

    def __init__(self, h: sp.csr_matrix, psi: np.ndarray, tol: float, max_subspace: int,
                 checkpoint_bytes: float = 2.5e8):
        self.h = h
        self.tol = tol
        self.m_max = max(2, min(max_subspace, h.shape[0]))
        self.max_checkpoints = int(max(2, min(64, checkpoint_bytes // (16 * max(h.shape[0], 1)))))
        self.checkpoints: dict[float, np.ndarray] = {0.0: psi.copy()}

    def _lanczos(self, psi: np.ndarray, step: float):
        n = psi.shape[0]
        nrm = np.linalg.norm(psi)
        basis = np.empty((self.m_max + 1, n), dtype=complex)
        alpha = np.zeros(self.m_max)
        beta = np.zeros(self.m_max)
        basis[0] = psi / nrm
        scale = abs(self.h).max() if self.h.nnz else 0.0
        for j in range(self.m_max):
            w = self.h @ basis[j]
            alpha[j] = np.vdot(basis[j], w).real
            w = w - alpha[j] * basis[j]
            if j:
                w = w - beta[j - 1] * basis[j - 1]
            w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
            beta[j] = np.linalg.norm(w)
            size = j + 1
            if beta[j] <= 1e-13 * max(scale, 1.0):
                return basis[:size], alpha[:size], beta[:size], nrm, True
            basis[j + 1] = w / beta[j]
            if size >= 2 and (size % 2 == 0 or size == self.m_max):
                if self._error(alpha[:size], beta[:size], step) <= self.tol * abs(step):
                    return basis[:size], alpha[:size], beta[:size], nrm, False
        return basis[: self.m_max], alpha, beta, nrm, False

    @staticmethod
    def _small_exp(alpha, beta, step) -> np.ndarray:
        if alpha.size == 1:
            return np.array([np.exp(-1j * step * alpha[0])])
        theta, q = scipy.linalg.eigh_tridiagonal(alpha, beta[: alpha.size - 1])
        return q @ (np.exp(-1j * step * theta) * q[0])

    def _error(self, alpha, beta, step) -> float:
        y = self._small_exp(alpha, beta, step)
        return float(beta[alpha.size - 1] * abs(y[-1]))

    def advance(self, psi: np.ndarray, dt: float) -> np.ndarray:
        remaining = dt
        while remaining != 0.0:
            basis, alpha, beta, nrm, exact = self._lanczos(psi, remaining)
            step = remaining
            halvings = 0
            if not exact:
                while self._error(alpha, beta, step) > self.tol * abs(step):
                    step *= 0.5
                    halvings += 1
                    if halvings > 60:
                        raise KrylovConvergenceError(
                            f"Krylov step did not converge (dim={psi.shape[0]}, subspace={self.m_max}, "
                            f"tol={self.tol}, step={step!r})"
                        )
            psi = nrm * (basis.T @ self._small_exp(alpha, beta, step))
            remaining = remaining - step
            if abs(remaining) <= 1e-15 * max(abs(dt), 1.0):
                remaining = 0.0
        return psi

    def state(self, t: float, keep: bool = True) -> np.ndarray:
        start = min(self.checkpoints, key=lambda c: abs(c - t))
        psi = self.checkpoints[start]
        if t != start:
            psi = self.advance(psi, t - start)
            if keep:
                self._remember(t, psi)
        return psi

    def _remember(self, t: float, psi: np.ndarray) -> None:
        if len(self.checkpoints) >= self.max_checkpoints:
            # keep the origin, drop the oldest other entry
            oldest = next(c for c in self.checkpoints if c != 0.0)
            del self.checkpoints[oldest]
        self.checkpoints[t] = psi

    def states(self, times: np.ndarray) -> np.ndarray:
        return np.array([self.state(float(t), keep=False) for t in times])

    def iter_states(self, times: np.ndarray):
        every = max(1, len(times) // self.max_checkpoints)
        t_cur, psi = 0.0, self.checkpoints[0.0]
        for i, t in enumerate(times):
            t = float(t)
            if t != t_cur:
                psi = self.advance(psi, t - t_cur)
                t_cur = t
            if i % every == 0 and t not in self.checkpoints:
                self._remember(t, psi)
            yield psi


class Trajectory:
    """Evolution of one initial state under a static real-symmetric Hamiltonian.

    Parameters
    ----------
    H : HermitianOperator or sparse/dense matrix
    psi0 : initial state, unit norm
    engine : ``"spectral"``, ``"krylov"`` or ``"auto"`` (spectral up to ``dense_limit``)
    restrict : evolve only inside the connected block of ``psi0``
    """

    def __init__(self, H, psi0, engine: Engine = "auto", dense_limit: int = DENSE_LIMIT,
                 restrict: bool = True, tol: float = 1e-10, max_subspace: int = 40):
        mat = _csr(H)
        psi0 = np.asarray(psi0, dtype=complex).ravel()
        if mat.shape[0] != psi0.shape[0]:
            raise ValueError(f"state dimension {psi0.shape[0]} does not match operator dimension {mat.shape[0]}")
        if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
            raise ValueError("initial state must be normalized")
        self.dim = psi0.shape[0]
        self.index = connected_block(mat, psi0) if restrict else np.arange(self.dim)
        sub = mat[self.index][:, self.index]
        psi_sub = psi0[self.index]
        if engine == "auto":
            engine = "spectral" if len(self.index) <= dense_limit else "krylov"
        if engine == "spectral":
            self._engine = _Spectral(sub, psi_sub)
        elif engine == "krylov":
            self._engine = _Krylov(sub, psi_sub, tol, max_subspace)
        else:
            raise ValueError(f"unknown engine {engine!r}")
        self.engine = engine

    @property
    def block_dim(self) -> int:
        return len(self.index)

    def _embed(self, sub_states: np.ndarray) -> np.ndarray:
        out = np.zeros(sub_states.shape[:-1] + (self.dim,), dtype=complex)
        out[..., self.index] = sub_states
        return out

    def states(self, times) -> np.ndarray:
        """States at each time, shape ``(len(times), dim)``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        return self._embed(self._engine.states(times))

    def state(self, t: float) -> np.ndarray:
        return self.states([t])[0]

    def expectation(self, times, observable) -> np.ndarray:
        """<psi(t)|O|psi(t)> on ``times``; ``observable`` is a diagonal (1-D) or a matrix."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        diag, op = _split_observable(observable, self.index)
        if isinstance(self._engine, _Krylov):
            return np.array([_expect(psi, diag, op) for psi in self._engine.iter_states(times)])
        chunk = max(1, int(4e6 // max(self.block_dim, 1)))
        out = np.empty(len(times))
        for start in range(0, len(times), chunk):
            sub = self._engine.states(times[start:start + chunk])
            out[start:start + chunk] = _expect(sub.T, diag, op)
        return out

    def expectation_at(self, t: float, observable) -> float:
        diag, op = _split_observable(observable, self.index)
        if isinstance(self._engine, _Krylov):
            return float(_expect(self._engine.state(float(t)), diag, op))
        return float(_expect(self._engine.states(np.array([t]))[0], diag, op))


def _split_observable(observable, index):
    if sp.issparse(observable) or (isinstance(observable, np.ndarray) and observable.ndim == 2):
        mat = sp.csr_matrix(observable)
        return None, mat[index][:, index]
    if isinstance(observable, HermitianOperator):
        return None, observable.matrix[index][:, index]
    return np.asarray(observable, dtype=float)[index], None


def _expect(psi: np.ndarray, diag, op):
    """Expectation over axis 0 of ``psi`` (a vector or a (dim, k) stack)."""
    if diag is not None:
        weights = diag if psi.ndim == 1 else diag[:, None]
        return np.sum(np.abs(psi) ** 2 * weights, axis=0)
    return np.sum(psi.conj() * (op @ psi), axis=0).real


def spectral_propagate(H, psi0, grid: TimeGrid | Sequence[float], restrict: bool = True) -> np.ndarray:
    """States ``V exp(-i Lambda t) V^T psi0`` on every grid time."""
    times = grid.times if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    return Trajectory(H, psi0, engine="spectral", restrict=restrict).states(times)


def krylov_propagate(H, psi0, grid: TimeGrid | Sequence[float], tol: float = 1e-10,
                     max_subspace: int = 40, restrict: bool = True) -> np.ndarray:
    """States on every grid time from adaptive Lanczos stepping."""
    times = grid.times if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    traj = Trajectory(H, psi0, engine="krylov", restrict=restrict, tol=tol, max_subspace=max_subspace)
    return traj._embed(np.array(list(traj._engine.iter_states(times))))


class MixtureTrajectory:
    """Branch-wise evolution of a ``MixedState``."""

    def __init__(self, H, mixed: MixedState, **engine_kw):
        self.branches = [(p, Trajectory(H, psi, **engine_kw)) for p, psi in mixed.branches if p > 0]

    def expectation(self, times, observable) -> np.ndarray:
        return sum(p * traj.expectation(times, observable) for p, traj in self.branches)

    def expectation_at(self, t: float, observable) -> float:
        return float(sum(p * traj.expectation_at(t, observable) for p, traj in self.branches))


def evolve_mixture(H, mixed: MixedState, grid: TimeGrid | Sequence[float], observable, **engine_kw) -> np.ndarray:
    """Series of sum_i p_i <psi_i(t)|O|psi_i(t)> over the grid."""
    times = grid.times if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    return MixtureTrajectory(H, mixed, **engine_kw).expectation(times, observable)
