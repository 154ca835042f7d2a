"""Free-fermion picture of the integrable (pure u/d) sector.

Within a u/d fragment the pair hopping is the XX chain, i.e. a tight-binding
chain of pseudospin fermions (occupied = ``u``). Sine modes ``lam`` and
``N+1-lam`` pair into two-level sectors where hopping acts as an X rotation
and the staggered field as a Z rotation, giving one QSP sequence per sector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .evolve import PH, STAG, DriveSchedule
from .fock import Pseudospin, parse_pseudospin
from .qsp import processing_s


@dataclass(frozen=True)
class BdGSector:
    index: int
    energy: float
    signal: float
    rotation: float  # X-rotation angle -energy * t_prime
    momentum: float  # lam * pi / (N + 1)


def mode_energies(N: int, J: float = 1.0) -> np.ndarray:
    lam = np.arange(1, N + 1)
    return 2 * J * np.cos(lam * np.pi / (N + 1))


def sectors(N: int, J: float = 1.0, t_prime: float = -np.pi / 2) -> list[BdGSector]:
    if N % 2 or N < 2:
        raise ValueError(f"N must be even and positive, got {N}")
    out = []
    eps = mode_energies(N, J)
    for lam in range(1, N // 2 + 1):
        theta = -eps[lam - 1] * t_prime
        if not 0.0 <= theta <= np.pi:
            raise ValueError(
                f"sector {lam}: rotation {theta:.6g} outside [0, pi]; signal a = cos(rotation) is ambiguous"
            )
        out.append(
            BdGSector(lam, float(eps[lam - 1]), float(np.cos(theta)), float(theta), lam * np.pi / (N + 1))
        )
    return out


def _x_rotation(theta: float) -> np.ndarray:
    """``exp(i theta X)``."""
    c, s = np.cos(theta), 1j * np.sin(theta)
    return np.array([[c, s], [s, c]])


def sector_unitary(phases: Sequence[float], sector: BdGSector) -> np.ndarray:
    """``e^{i phi_0 Z} prod_r [e^{i theta X} e^{i phi_r Z}]`` built from rotations.

    ``phases`` are the products ``h * t_r``. This goes through the rotation
    angle rather than the signal, so it cross-checks
    :func:`~hsfqsp.qsp.compose_qsp`.
    """
    phases = list(phases)
    x = _x_rotation(sector.rotation)
    u = processing_s(phases[0])
    for phi in phases[1:]:
        u = u @ x @ processing_s(phi)
    return u


def neel_transition_probability(
    N: int, phases: Sequence[float], J: float = 1.0, t_prime: float = -np.pi / 2
) -> float:
    """``prod_lam |P(a_lam)|^2`` for the Neel state of ``N`` pseudospins."""
    return float(np.prod(sector_probabilities(N, phases, J, t_prime)))


def sector_probabilities(N, phases, J=1.0, t_prime=-np.pi / 2) -> np.ndarray:
    return np.array([abs(sector_unitary(phases, s)[0, 0]) ** 2 for s in sectors(N, J, t_prime)])


def hopping_matrix(N: int) -> np.ndarray:
    return np.diag(np.ones(N - 1), 1) + np.diag(np.ones(N - 1), -1)


def staggered_matrix(N: int, offset: int = 0) -> np.ndarray:
    m = np.arange(1, N + 1) + offset
    return np.diag(np.where(m % 2 == 0, 1.0, -1.0))


def single_particle_unitary(schedule: DriveSchedule, N: int, offset: int = 0) -> np.ndarray:
    """One-cycle propagator of a single pseudospin fermion (``N x N``).

    The staggered generator ``diag(h (-1)^m)`` drops the constant
    ``-(h/2) sum_m (-1)^m``, which vanishes for even ``N``.
    """
    gens = {PH: hopping_matrix(N), STAG: staggered_matrix(N, offset)}
    u = np.eye(N, dtype=complex)
    for seg in schedule.segments:
        t = seg.duration * seg.amplitude
        if t != 0.0:
            u = scipy.linalg.expm(-1j * t * gens[seg.generator]) @ u
    return u


def neel_correlation(N: int) -> np.ndarray:
    """``<d+_m d_n>`` of u d u d ...: occupied on odd sites."""
    if N % 2:
        raise ValueError(f"N must be even, got {N}")
    return np.diag((np.arange(1, N + 1) % 2).astype(complex))


def correlation_from_pattern(symbols) -> np.ndarray:
    """Correlation matrix of any u/d product state."""
    symbols = parse_pseudospin(symbols)
    if any(s.is_fracton for s in symbols):
        raise ValueError("correlation picture covers u/d strings only")
    return np.diag([1.0 + 0j if s is Pseudospin.UP else 0j for s in symbols])


def evolve_correlation(C: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``C_mn = <d+_m d_n>`` after the state evolves by single-particle ``u``.

    Heisenberg: ``d_n -> sum_k u_nk d_k``, so ``C -> u* C u^T``.
    """
    C = np.asarray(C)
    u = np.asarray(u)
    if C.shape != u.shape or C.shape[0] != C.shape[1]:
        raise ValueError(f"shape mismatch: C {C.shape}, u {u.shape}")
    return u.conj() @ C @ u.T


def sigma_z_from_correlation(C: np.ndarray) -> np.ndarray:
    return 2.0 * np.real(np.diag(C)) - 1.0
