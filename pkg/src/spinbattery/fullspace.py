"""Brute-force Hamiltonians on site-resolved spaces, and the non-ideal initial mixtures.

Each side (battery, charger) is either the full 2^n product space of its
spins or its collective maximal-spin sector.  Site-resolved sides build the
Pauli sums term by term, so agreement with the collective engine is a
genuine check of the collective reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .dicke import HermitianOperator, ProductBasis, SpinSector, build_collective
from .hamiltonians import ModelParams
from .propagation import MixedState

MAX_FULL_BATTERY = 12
MAX_FULL_TOTAL = 14

_SIGMA_PLUS = sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
_SIGMA_MINUS = _SIGMA_PLUS.T.tocsr()
_SIGMA = {
    "x": sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)),
    "y": sp.csr_matrix(-1j * (_SIGMA_PLUS - _SIGMA_MINUS).toarray()),
    "z": sp.csr_matrix(np.diag([-1.0, 1.0]).astype(complex)),
}


def site_operator(op: sp.spmatrix, site: int, n_sites: int) -> sp.csr_matrix:
    """``op`` on one site of an n-site register; site 0 is the most significant bit."""
    factors = [sp.identity(2, format="csr", dtype=complex)] * n_sites
    factors[site] = sp.csr_matrix(op, dtype=complex)
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


@dataclass(frozen=True)
class Side:
    """Pauli sums and excitation counts of one subsystem."""

    n_spins: int
    full: bool

    @property
    def dim(self) -> int:
        return 2**self.n_spins if self.full else self.n_spins + 1

    def pauli_sum(self, axis: str) -> sp.csr_matrix:
        if self.full:
            return sum(site_operator(_SIGMA[axis], k, self.n_spins) for k in range(self.n_spins)).tocsr()
        sector = SpinSector(self.n_spins)
        jp = build_collective(sector, "Jplus").astype(complex)
        jm = build_collective(sector, "Jminus").astype(complex)
        if axis == "x":
            return (jp + jm).tocsr()
        if axis == "y":
            return (-1j * (jp - jm)).tocsr()
        return build_collective(sector, "Jz").astype(complex)

    @property
    def excitations(self) -> np.ndarray:
        if self.full:
            idx = np.arange(self.dim)
            return np.array([bin(i).count("1") for i in idx], dtype=float)
        return np.arange(self.dim, dtype=float)


@dataclass(frozen=True)
class HybridBasis:
    """Battery side tensored with charger side; flat index ``b * dim_C + c``."""

    M: int
    N: int
    battery_full: bool = True
    charger_full: bool = True

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError(f"M and N must be >= 1, got M={self.M}, N={self.N}")
        if self.battery_full and self.M > MAX_FULL_BATTERY:
            raise ValueError(f"full battery side limited to M <= {MAX_FULL_BATTERY}, got {self.M}")
        if self.charger_full and self.N > MAX_FULL_BATTERY:
            raise ValueError(f"full charger side limited to N <= {MAX_FULL_BATTERY}, got {self.N}")
        if self.battery_full and self.charger_full and self.M + self.N > MAX_FULL_TOTAL:
            raise ValueError(f"full-full space limited to M + N <= {MAX_FULL_TOTAL}, got {self.M + self.N}")

    @property
    def battery(self) -> Side:
        return Side(self.M, self.battery_full)

    @property
    def charger(self) -> Side:
        return Side(self.N, self.charger_full)

    @property
    def dim(self) -> int:
        return self.battery.dim * self.charger.dim

    @property
    def battery_excitations(self) -> np.ndarray:
        return np.repeat(self.battery.excitations, self.charger.dim)

    def index(self, b: int, c: int) -> int:
        if not (0 <= b < self.battery.dim and 0 <= c < self.charger.dim):
            raise IndexError(f"({b}, {c}) outside the hybrid space")
        return b * self.charger.dim + c

    def state(self, b: int, c: int) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(b, c)] = 1.0
        return psi

    def fully_excited_charger(self) -> int:
        return self.charger.dim - 1

    def ideal_state(self) -> np.ndarray:
        return self.state(0, self.fully_excited_charger())


def bits_to_index(bits) -> int:
    """Register index of a site-resolved configuration, site 0 first."""
    out = 0
    for b in bits:
        out = 2 * out + int(b)
    return out


def build_full_hamiltonian(params: ModelParams, basis: HybridBasis):
    """Lab- or rotating-frame Hamiltonian from explicit Pauli sums.

    H = (omega0/2)(Z_B + Z_C) + (g/2)[(1+gamma) X_B X_C + (1-gamma) Y_B Y_C]
        + (g1/2) sum_{l != j} (x_l x_j + y_l y_j)
    """
    if (basis.M, basis.N) != (params.M, params.N):
        raise ValueError(f"basis (M={basis.M}, N={basis.N}) does not match params (M={params.M}, N={params.N})")
    bat, chg = basis.battery, basis.charger
    eye_b = sp.identity(bat.dim, format="csr", dtype=complex)
    eye_c = sp.identity(chg.dim, format="csr", dtype=complex)
    xb, yb = bat.pauli_sum("x"), bat.pauli_sum("y")
    xc, yc = chg.pauli_sum("x"), chg.pauli_sum("y")
    h = 0.5 * params.g * ((1 + params.gamma) * sp.kron(xb, xc) + (1 - params.gamma) * sp.kron(yb, yc))
    if params.frame == "lab":
        h = h + 0.5 * params.omega0 * (sp.kron(bat.pauli_sum("z"), eye_c) + sp.kron(eye_b, chg.pauli_sum("z")))
    if params.g1:
        # x_l^2 + y_l^2 = 2 on every site, hence the -2N
        pairs = xc @ xc + yc @ yc - 2 * params.N * eye_c
        h = h + 0.5 * params.g1 * sp.kron(eye_b, pairs)
    h = sp.csr_matrix(h)
    if h.nnz and np.max(np.abs(h.data.imag)) > 1e-12:
        raise AssertionError("Pauli-sum Hamiltonian acquired imaginary entries")
    return HermitianOperator(h.real)


def _check_probs(p, expected_len: int, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (expected_len,):
        raise ValueError(f"{name} must have length {expected_len}, got shape {p.shape}")
    if np.any(p < 0):
        raise ValueError(f"{name} has negative entries: {p.tolist()}")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"{name} sums to {p.sum()!r}, not 1")
    return p


def nonideal_charger_mixture(p, M: int, N: int) -> tuple[MixedState, ProductBasis]:
    """p[0] on the ideal state, p[l] on |0...0>_B |m = -N/2 + l - 1>, l = 1..N."""
    p = _check_probs(p, N + 1, "p")
    basis = ProductBasis(M, N)
    branches = [(p[0], basis.basis_state(0, N))]
    branches += [(p[l], basis.basis_state(0, l - 1)) for l in range(1, N + 1)]
    return MixedState(tuple((w, psi) for w, psi in branches if w > 0)), basis


def nonideal_battery_mixture(p_tilde, N: int) -> tuple[MixedState, HybridBasis]:
    """p_tilde[0] on the ideal state, p_tilde[k] on sigma^x_k |0...0>_B |m = N/2>.

    Lives on the site-resolved battery tensored with the collective charger.
    """
    M = len(p_tilde) - 1
    p_tilde = _check_probs(p_tilde, M + 1, "p_tilde")
    basis = HybridBasis(M, N, battery_full=True, charger_full=False)
    top = basis.fully_excited_charger()
    branches = [(p_tilde[0], basis.ideal_state())]
    for k in range(1, M + 1):
        bits = [0] * M
        bits[k - 1] = 1
        branches.append((p_tilde[k], basis.state(bits_to_index(bits), top)))
    return MixedState(tuple((w, psi) for w, psi in branches if w > 0)), basis


def thermal_charger_mixture(p0: float) -> tuple[MixedState, HybridBasis]:
    """M = N = 2 with the second charger spin thermal: weight p0 on |1_1 0_2>_C.

    The charger is site-resolved because |1_1 0_2> is not permutation symmetric.
    """
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0 must lie in [0, 1], got {p0!r}")
    basis = HybridBasis(2, 2, battery_full=False, charger_full=True)
    branches = (
        (1.0 - p0, basis.state(0, bits_to_index([1, 1]))),
        (p0, basis.state(0, bits_to_index([1, 0]))),
    )
    return MixedState(tuple((w, psi) for w, psi in branches if w > 0)), basis


def thermal_collective_estimate(p0: float) -> tuple[MixedState, ProductBasis]:
    """Symmetric stand-in for the thermal charger: weight p0 on |00, m = 0>."""
    return nonideal_charger_mixture([1.0 - p0, 0.0, p0], 2, 2)
