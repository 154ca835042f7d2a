"""Pair-hopping and staggered-potential operators restricted to a fragment."""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .fock import ANTISQUEEZE, SQUEEZE, apply_operator_string, pair_hop_operators, window_code
from .fragment import FragmentBasis


class SparseOperator:
    """Real symmetric CSR matrix on a fragment basis.

    The dense eigendecomposition is computed lazily and cached, so repeated
    propagation with the same operator pays for it once.
    """

    def __init__(self, matrix: sp.csr_matrix, diagonal: bool = False):
        matrix = sp.csr_matrix(matrix)
        matrix.sort_indices()
        if matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"operator must be square, got {matrix.shape}")
        self.matrix = matrix
        self.diagonal = diagonal

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def symmetric(self) -> bool:
        return (abs(self.matrix - self.matrix.T) > 0).nnz == 0

    def diag(self) -> np.ndarray:
        return self.matrix.diagonal()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    @cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        if self.diagonal:
            return self.diag(), None
        return np.linalg.eigh(self.toarray())

    def gershgorin_bounds(self) -> tuple[float, float]:
        d = self.diag()
        radius = np.asarray(abs(self.matrix).sum(axis=1)).ravel() - np.abs(d)
        return float(np.min(d - radius)), float(np.max(d + radius))

    def __mul__(self, scalar: float) -> "SparseOperator":
        return SparseOperator(self.matrix * scalar, self.diagonal)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"SparseOperator(dim={self.dim}, nnz={self.matrix.nnz})"


def build_h_ph(basis: FragmentBasis, J: float = 1.0) -> SparseOperator:
    """Pair-hopping Hamiltonian with amplitude ``J`` on ``basis``."""
    rows, cols, vals = [], [], []
    src_all = np.arange(basis.dim)
    for j in range(1, basis.length - 2):
        w = window_code(basis.states, j)
        for direction, pattern in ((SQUEEZE, 0b0110), (ANTISQUEEZE, 0b1001)):
            hit = w == np.uint64(pattern)
            if not hit.any():
                continue
            new, sign, alive = apply_operator_string(basis.states[hit], pair_hop_operators(j, direction))
            assert alive.all()
            dst = basis.find(new)
            if np.any(dst < 0):
                raise ValueError("basis is not closed under pair hopping")
            rows.append(dst)
            cols.append(src_all[hit])
            vals.append(J * sign.astype(float))
    if rows:
        r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = c = np.empty(0, dtype=int)
        v = np.empty(0)
    mat = sp.coo_matrix((v, (r, c)), shape=(basis.dim, basis.dim)).tocsr()
    return SparseOperator(mat)


def stag_diagonal(basis: FragmentBasis, h: float = 1.0, offset: int = 0) -> np.ndarray:
    """``(h/2) sum_m (-1)^(m+offset) sigma^z_m`` for each basis state.

    ``offset`` shifts the site label, for subchains cut out of a longer one.
    """
    m = np.arange(1, basis.n_pseudo + 1) + offset
    signs = np.where(m % 2 == 0, 1.0, -1.0)
    return 0.5 * h * (basis.sigma_z_table @ signs)


def build_h_stag(basis: FragmentBasis, h: float = 1.0, offset: int = 0) -> SparseOperator:
    return SparseOperator(sp.diags(stag_diagonal(basis, h, offset), format="csr"), diagonal=True)


def matvec(op: SparseOperator, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[0] != op.dim:
        raise ValueError(f"dimension mismatch: operator {op.dim}, vector {v.shape[0]}")
    return op.matrix @ v
