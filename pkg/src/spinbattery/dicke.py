"""Collective angular-momentum sectors, product bases and sparse Hermitian operators.

States of a spin-j sector are indexed by ``n = m + j`` (the number of
excitations above the fully polarized ground state), so index 0 is
``m = -j`` and the last index is ``m = +j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np
import scipy.sparse as sp

Direction = Literal["raise", "lower"]
CollectiveKind = Literal["Jz", "Jplus", "Jminus", "Janticomm"]


def _as_half_integer(x, name: str) -> Fraction:
    try:
        val = Fraction(x).limit_denominator(1000)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name}={x!r} is not a number") from exc
    if abs(float(val) - float(x)) > 1e-12 or (2 * val).denominator != 1:
        raise ValueError(f"{name}={x!r} is not a half-integer")
    return val


def ladder_element(j, m, direction: Direction) -> float:
    """Matrix element <m +/- 1| J_+/- |m> of a spin-j sector.

    Returns 0 when the target state lies outside the sector.
    """
    jj = _as_half_integer(j, "j")
    mm = _as_half_integer(m, "m")
    if jj < 0:
        raise ValueError(f"j={j!r} must be non-negative")
    if abs(mm) > jj or (jj - mm).denominator != 1:
        raise ValueError(f"m={m!r} is not a valid projection for j={j!r}")
    if direction == "raise":
        val = jj * (jj + 1) - mm * (mm + 1)
    elif direction == "lower":
        val = jj * (jj + 1) - mm * (mm - 1)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return float(np.sqrt(float(val)))


@dataclass(frozen=True)
class SpinSector:
    """Maximal-spin sector of ``two_j`` spin-1/2 constituents (j = two_j / 2)."""

    two_j: int

    def __post_init__(self):
        if int(self.two_j) != self.two_j or self.two_j < 0:
            raise ValueError(f"two_j must be a non-negative integer, got {self.two_j!r}")

    @classmethod
    def of_spins(cls, n_spins: int) -> "SpinSector":
        return cls(int(n_spins))

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.j


def build_collective(sector: SpinSector, which: CollectiveKind) -> sp.csr_matrix:
    """Collective operator of a sector as a sparse matrix.

    ``Jz`` carries eigenvalue ``2m`` (a plain Pauli sum), ``Janticomm`` is
    ``J+J- + J-J+`` with diagonal ``2[j(j+1) - m^2]``.
    """
    m = sector.m_values
    j = sector.j
    d = sector.dim
    if which == "Jz":
        return sp.diags(2.0 * m, format="csr")
    if which == "Janticomm":
        return sp.diags(2.0 * (j * (j + 1) - m**2), format="csr")
    # <m+1|J+|m> sits at (n+1, n)
    up = np.sqrt(np.maximum(j * (j + 1) - m[:-1] * (m[:-1] + 1), 0.0))
    if which == "Jplus":
        return sp.diags(up, -1, shape=(d, d), format="csr")
    if which == "Jminus":
        return sp.diags(up, 1, shape=(d, d), format="csr")
    raise ValueError(f"unknown collective operator {which!r}")


@dataclass(frozen=True)
class ProductBasis:
    """Battery sector (j = M/2) tensored with charger sector (j = N/2).

    Flat index ``k = n_B * (N + 1) + n_C``: battery-major, excitation counts ascending.
    """

    M: int
    N: int

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError(f"M and N must be >= 1, got M={self.M}, N={self.N}")

    @property
    def battery(self) -> SpinSector:
        return SpinSector(self.M)

    @property
    def charger(self) -> SpinSector:
        return SpinSector(self.N)

    @property
    def dim(self) -> int:
        return (self.M + 1) * (self.N + 1)

    def index(self, n_b: int, n_c: int) -> int:
        return tensor_index(self, n_b, n_c)

    def pair(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.dim:
            raise IndexError(f"flat index {k} out of range for dim {self.dim}")
        return divmod(int(k), self.N + 1)

    @property
    def battery_excitations(self) -> np.ndarray:
        return np.repeat(np.arange(self.M + 1, dtype=float), self.N + 1)

    @property
    def charger_excitations(self) -> np.ndarray:
        return np.tile(np.arange(self.N + 1, dtype=float), self.M + 1)

    def basis_state(self, n_b: int, n_c: int) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(n_b, n_c)] = 1.0
        return psi


def tensor_index(basis: ProductBasis, n_b: int, n_c: int) -> int:
    if not (0 <= n_b <= basis.M and 0 <= n_c <= basis.N):
        raise IndexError(f"(n_B={n_b}, n_C={n_c}) outside M={basis.M}, N={basis.N}")
    return int(n_b) * (basis.N + 1) + int(n_c)


@dataclass(frozen=True)
class HermitianOperator:
    """Real symmetric operator held as a CSR matrix."""

    matrix: sp.csr_matrix = field(repr=False)

    def __post_init__(self):
        mat = sp.csr_matrix(self.matrix)
        if mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator must be square, got {mat.shape}")
        if np.iscomplexobj(mat.data):
            if mat.nnz and np.max(np.abs(mat.data.imag)) > 1e-12:
                raise ValueError("operator has complex entries; only real symmetric operators are supported")
            mat = mat.real
        mat.sum_duplicates()
        mat.eliminate_zeros()
        object.__setattr__(self, "matrix", mat.astype(float))

    @classmethod
    def from_entries(cls, dim: int, rows, cols, values) -> "HermitianOperator":
        """Build from upper-triangle entries (col >= row); duplicates are summed."""
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        values = np.asarray(values, dtype=float)
        if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= dim or cols.max() >= dim):
            raise IndexError(f"entry index outside dimension {dim}")
        if np.any(cols < rows):
            raise ValueError("entries must satisfy col >= row")
        upper = sp.coo_matrix((values, (rows, cols)), shape=(dim, dim)).tocsr()
        diag = sp.diags(upper.diagonal())
        return cls(upper + upper.T - diag)

    @classmethod
    def from_matrix(cls, mat, atol: float = 1e-12) -> "HermitianOperator":
        mat = sp.csr_matrix(mat)
        if mat.nnz and abs(mat - mat.conj().T).max() > atol:
            raise ValueError("matrix is not Hermitian")
        return cls(mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def upper_entries(self) -> list[tuple[int, int, float]]:
        up = sp.triu(self.matrix).tocoo()
        return sorted(zip(up.row.tolist(), up.col.tolist(), up.data.tolist()))

    def __matmul__(self, other):
        return self.matrix @ other

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix + other.matrix)


def normalized_state(vec, atol: float = 1e-10) -> np.ndarray:
    """Return ``vec`` as a complex array, insisting on unit norm."""
    psi = np.asarray(vec, dtype=complex).ravel()
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > atol:
        raise ValueError(f"state norm {nrm!r} differs from 1 by more than {atol}")
    return psi
