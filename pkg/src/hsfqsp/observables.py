"""Pseudospin-z expectations, stroboscopic records and their averages."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np
import scipy.linalg

from .evolve import DENSE_DIM, DriveSchedule, apply_drive, drive_operators
from .fock import encode_pseudospin
from .fragment import DEFAULT_MAX_DIM, FragmentBasis, build_fragment
from .hamiltonian import SparseOperator

DEGENERACY_TOL = 1e-10


def _check_site(basis: FragmentBasis, m: int) -> None:
    if not 1 <= m <= basis.n_pseudo:
        raise IndexError(f"pseudospin site {m} out of range 1..{basis.n_pseudo}")


def sigma_z_profile(v: np.ndarray, basis: FragmentBasis) -> np.ndarray:
    """``<sigma^z_m>`` for every ``m`` (index ``m - 1``)."""
    return (np.abs(v) ** 2) @ basis.sigma_z_table


def sigma_z(v: np.ndarray, basis: FragmentBasis, m: int) -> float:
    _check_site(basis, m)
    return float((np.abs(v) ** 2) @ basis.sigma_z_table[:, m - 1])


@dataclass
class StroboscopicRecord:
    """``values[l, m-1] = <sigma^z_m>`` after ``l`` cycles."""

    values: np.ndarray

    @property
    def cycles(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n_sites(self) -> int:
        return self.values.shape[1]

    def rows(self) -> Iterator[tuple[int, int, float]]:
        for l, row in enumerate(self.values):
            for m, val in enumerate(row, start=1):
                yield l, m, float(val)

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


def stroboscopic_states(
    seed,
    schedule: DriveSchedule,
    cycles: int,
    basis: FragmentBasis | None = None,
    operators: Mapping[str, SparseOperator] | None = None,
    dense_dim: int = DENSE_DIM,
    max_dim: int = DEFAULT_MAX_DIM,
) -> Iterator[tuple[int, np.ndarray, FragmentBasis]]:
    """Yield ``(l, state, basis)`` for ``l = 0..cycles``."""
    state = encode_pseudospin(seed) if isinstance(seed, str) else seed
    if basis is None:
        basis = build_fragment(state, max_dim)
    if operators is None:
        operators = drive_operators(basis)
    v = basis.basis_vector(state.bits)
    yield 0, v, basis
    for l in range(1, cycles + 1):
        v = apply_drive(schedule, basis, v, operators, dense_dim)
        yield l, v, basis


def stroboscopic_run(seed, schedule: DriveSchedule, cycles: int, **kwargs) -> StroboscopicRecord:
    if cycles < 0:
        raise ValueError("cycles must be non-negative")
    rows = [sigma_z_profile(v, basis) for _, v, basis in stroboscopic_states(seed, schedule, cycles, **kwargs)]
    return StroboscopicRecord(np.array(rows))


def krylov_infinite_temperature(basis: FragmentBasis, m: int) -> float:
    """Equal-weight average of ``sigma^z_m`` over the fragment."""
    _check_site(basis, m)
    return float(np.mean(basis.sigma_z_table[:, m - 1]))


def krylov_profile(basis: FragmentBasis) -> np.ndarray:
    return basis.sigma_z_table.mean(axis=0)


def time_average(record: StroboscopicRecord, burn_in: int = 0) -> np.ndarray:
    """Mean over cycles ``burn_in < l <= cycles``; cycle 0 alone if none ran."""
    if record.cycles == 0:
        return record.values[0].copy()
    if not 0 <= burn_in < record.cycles:
        raise ValueError(f"burn_in {burn_in} must be below cycles {record.cycles}")
    return record.values[burn_in + 1 :].mean(axis=0)


def floquet_eigenbasis(U: np.ndarray, tol: float = DEGENERACY_TOL):
    """Eigenphases and orthonormal eigenvectors of a unitary, grouped in clusters.

    The complex Schur form of a normal matrix is diagonal, so its Schur
    vectors are an orthonormal eigenbasis even inside degenerate clusters.
    Returns ``(phases, vectors, clusters)`` with ``clusters`` a list of index
    arrays whose eigenphases lie within ``tol`` of a neighbour.
    """
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = np.angle(np.diag(T))
    order = np.argsort(phases, kind="stable")
    phases, Z = phases[order], Z[:, order]
    clusters = []
    start = 0
    for k in range(1, len(phases) + 1):
        if k == len(phases) or phases[k] - phases[k - 1] > tol:
            clusters.append(np.arange(start, k))
            start = k
    # eigenphases near +-pi wrap around
    if len(clusters) > 1 and (phases[0] + 2 * np.pi) - phases[-1] <= tol:
        clusters[0] = np.concatenate([clusters.pop(), clusters[0]])
    return phases, Z, clusters


def diagonal_ensemble_profile(
    U: np.ndarray, v0: np.ndarray, basis: FragmentBasis, tol: float = DEGENERACY_TOL
) -> np.ndarray:
    """Infinite-time average of ``<sigma^z_m>`` under repeated ``U``, all ``m``."""
    if U.shape[0] != basis.dim:
        raise ValueError(f"unitary dim {U.shape[0]} does not match basis dim {basis.dim}")
    _, Z, clusters = floquet_eigenbasis(U, tol)
    table = basis.sigma_z_table.astype(float)
    out = np.zeros(basis.n_pseudo)
    for idx in clusters:
        vecs = Z[:, idx]
        coef = vecs.conj().T @ v0
        if len(idx) == 1:
            w = np.abs(vecs[:, 0]) ** 2
            out += abs(coef[0]) ** 2 * (w @ table)
            continue
        # degenerate block: diagonalize each observable inside the cluster
        for m in range(basis.n_pseudo):
            block = vecs.conj().T @ (table[:, m, None] * vecs)
            evals, evecs = np.linalg.eigh(block)
            weights = np.abs(evecs.conj().T @ coef) ** 2
            out[m] += weights @ evals
    return out


def diagonal_ensemble(U: np.ndarray, v0: np.ndarray, basis: FragmentBasis, m: int, tol: float = DEGENERACY_TOL) -> float:
    _check_site(basis, m)
    return float(diagonal_ensemble_profile(U, v0, basis, tol)[m - 1])
