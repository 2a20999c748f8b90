"""Charging Hamiltonians: spin charger, cavity (Tavis-Cummings) charger, single cell."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .dicke import HermitianOperator, ProductBasis, SpinSector, build_collective

Frame = Literal["lab", "rotating"]


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of one spin-charger scenario.

    ``frame="rotating"`` drops the free part and is only valid for gamma = 0,
    where the coupling conserves the total excitation number.
    """

    M: int
    N: int
    omega0: float = 1.0
    g: float = 0.1
    gamma: float = 0.0
    g1: float = 0.0
    frame: Frame = "lab"

    def __post_init__(self):
        if int(self.M) != self.M or int(self.N) != self.N or self.M < 1 or self.N < 1:
            raise ValueError(f"M and N must be integers >= 1, got M={self.M!r}, N={self.N!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g!r}")
        if self.g1 < 0:
            raise ValueError(f"g1 must be non-negative, got {self.g1!r}")
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0!r}")
        if self.frame not in ("lab", "rotating"):
            raise ValueError(f"unknown frame {self.frame!r}")
        if self.frame == "rotating" and self.gamma != 0:
            raise ValueError("the rotating frame is static only for gamma = 0")

    @property
    def basis(self) -> ProductBasis:
        return ProductBasis(self.M, self.N)


@dataclass(frozen=True)
class TcParams:
    """Cavity charger: M cells coupled to one bosonic mode holding ``n_init`` photons.

    ``cutoff`` is the highest Fock state kept; ``None`` picks the minimum
    allowed (``n_init`` for gamma = 0, ``n_init + 2M`` otherwise).
    """

    M: int
    n_init: int
    cutoff: int | None = None
    omega0: float = 1.0
    g_tilde: float = 0.1
    gamma: float = 0.0
    frame: Frame = "lab"

    def __post_init__(self):
        if self.M < 1 or self.n_init < 0:
            raise ValueError(f"need M >= 1 and n_init >= 0, got M={self.M}, n_init={self.n_init}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        if not self.g_tilde > 0:
            raise ValueError(f"g_tilde must be positive, got {self.g_tilde!r}")
        if self.frame == "rotating" and self.gamma != 0:
            raise ValueError("the rotating frame is static only for gamma = 0")
        floor = self.n_init if self.gamma == 0 else self.n_init + 2 * self.M
        if self.cutoff is None:
            object.__setattr__(self, "cutoff", floor)
        elif self.cutoff < floor:
            raise ValueError(f"cutoff={self.cutoff} below the floor {floor} for these parameters")

    @property
    def dim(self) -> int:
        return (self.M + 1) * (self.cutoff + 1)

    def index(self, n_b: int, n_photon: int) -> int:
        if not (0 <= n_b <= self.M and 0 <= n_photon <= self.cutoff):
            raise IndexError(f"(n_B={n_b}, n={n_photon}) outside the truncated space")
        return n_b * (self.cutoff + 1) + n_photon

    @property
    def battery_excitations(self) -> np.ndarray:
        return np.repeat(np.arange(self.M + 1, dtype=float), self.cutoff + 1)

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.tile(np.arange(self.cutoff + 1, dtype=float), self.M + 1)

    def initial_state(self) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(0, self.n_init)] = 1.0
        return psi


def _hermitian_part(coupling: sp.spmatrix) -> HermitianOperator:
    return HermitianOperator(coupling + coupling.T)


def build_spin_charger(params: ModelParams, basis: ProductBasis | None = None) -> HermitianOperator:
    """H = H0 + g[J-(gamma S- + S+) + h.c.] + g1 (J+J- + J-J+ - N) over the collective basis."""
    if basis is None:
        basis = params.basis
    if (basis.M, basis.N) != (params.M, params.N):
        raise ValueError(f"basis (M={basis.M}, N={basis.N}) does not match params (M={params.M}, N={params.N})")
    bat, chg = basis.battery, basis.charger
    s_plus = build_collective(bat, "Jplus")
    s_minus = build_collective(bat, "Jminus")
    j_minus = build_collective(chg, "Jminus")
    eye_b = sp.identity(bat.dim, format="csr")
    eye_c = sp.identity(chg.dim, format="csr")

    coupling = params.g * sp.kron(params.gamma * s_minus + s_plus, j_minus, format="csr")
    h = coupling + coupling.T
    if params.frame == "lab":
        h = h + 0.5 * params.omega0 * (
            sp.kron(build_collective(bat, "Jz"), eye_c) + sp.kron(eye_b, build_collective(chg, "Jz"))
        )
    if params.g1:
        crosstalk = build_collective(chg, "Janticomm") - params.N * eye_c
        h = h + params.g1 * sp.kron(eye_b, crosstalk)
    return HermitianOperator(h)


def ideal_initial_state(basis: ProductBasis) -> np.ndarray:
    """Empty battery, fully excited charger."""
    return basis.basis_state(0, basis.N)


def build_tc(params: TcParams) -> HermitianOperator:
    """Cavity charger: omega0 b'b + (omega0/2) sum sigma_z + g~[b (gamma S- + S+) + h.c.]."""
    bat = SpinSector(params.M)
    nmax = params.cutoff
    a = sp.diags(np.sqrt(np.arange(1, nmax + 1, dtype=float)), 1, shape=(nmax + 1, nmax + 1), format="csr")
    s_plus = build_collective(bat, "Jplus")
    s_minus = build_collective(bat, "Jminus")
    coupling = params.g_tilde * sp.kron(params.gamma * s_minus + s_plus, a, format="csr")
    h = coupling + coupling.T
    if params.frame == "lab":
        h = h + params.omega0 * sp.kron(sp.identity(bat.dim), sp.diags(np.arange(nmax + 1, dtype=float)))
        h = h + 0.5 * params.omega0 * sp.kron(build_collective(bat, "Jz"), sp.identity(nmax + 1))
    return HermitianOperator(h)


# basis order of the single-cell matrix: |1B 1C>, |1B 0C>, |0B 1C>, |0B 0C>
SINGLE_CELL_BATTERY = np.array([1.0, 1.0, 0.0, 0.0])
SINGLE_CELL_INITIAL = 2


def build_single_cell(gamma: float, g: float = 0.1, omega0: float = 1.0) -> HermitianOperator:
    """One cell charged by one spin, written out explicitly."""
    h = np.array(
        [
            [omega0, 0.0, 0.0, g * gamma],
            [0.0, 0.0, g, 0.0],
            [0.0, g, 0.0, 0.0],
            [g * gamma, 0.0, 0.0, -omega0],
        ]
    )
    return HermitianOperator(sp.csr_matrix(h))
