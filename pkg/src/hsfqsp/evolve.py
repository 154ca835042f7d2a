"""Piecewise-constant drive alternating pair hopping and the staggered field.

For phases ``(phi_0, ..., phi_d)`` the cycle unitary is

    exp(-i t_0 H_stag) prod_{r=1..d} [exp(-i t' H_PH) exp(-i t_r H_stag)]

with ``t_r = phi_r / h``. Products are multiplied as written, so in time the
segments run STAG(t_d), PH(t'), STAG(t_{d-1}), ..., PH(t'), STAG(t_0).
Durations may be negative; ``exp(-iHt)`` is applied formally.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import jv

from .fock import FockState, encode_pseudospin, parse_pseudospin
from .fragment import DEFAULT_MAX_DIM, FragmentBasis, RegionKind, build_fragment, partition_regions, region_strings
from .hamiltonian import SparseOperator, build_h_ph, build_h_stag

log = logging.getLogger(__name__)

PH = "PH"
STAG = "STAG"

DENSE_DIM = 4096
CHEB_TOL = 1e-12
CHEB_MAX_ORDER = 100_000
NORM_RENORM = 1e-12
NORM_FAIL = 1e-8
UNITARITY_TOL = 1e-10


class PropagationError(RuntimeError):
    pass


class DimensionTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class Segment:
    generator: str
    duration: float
    amplitude: float


@dataclass(frozen=True)
class DriveSchedule:
    segments: tuple[Segment, ...]
    J: float = 1.0
    h: float = 1.0
    t_prime: float = -np.pi / 2
    phases: tuple[float, ...] = field(default=())

    def __add__(self, other: "DriveSchedule") -> "DriveSchedule":
        """``a + b`` runs ``a`` first, then ``b``."""
        return DriveSchedule(self.segments + other.segments, self.J, self.h, self.t_prime, ())

    def __len__(self) -> int:
        return len(self.segments)


def schedule_from_phases(
    phases: Sequence[float], J: float = 1.0, h: float = 1.0, t_prime: float = -np.pi / 2
) -> DriveSchedule:
    if h == 0:
        raise ValueError("staggered amplitude h must be nonzero to encode phases as durations")
    phases = tuple(float(p) for p in phases)
    if not phases:
        raise ValueError("phase sequence needs at least one phase")
    segs = []
    for r in range(len(phases) - 1, 0, -1):
        segs.append(Segment(STAG, phases[r] / h, h))
        segs.append(Segment(PH, t_prime, J))
    segs.append(Segment(STAG, phases[0] / h, h))
    return DriveSchedule(tuple(segs), J, h, t_prime, phases)


def drive_operators(basis: FragmentBasis, stag_offset: int = 0) -> dict[str, SparseOperator]:
    """Unit-amplitude generators; segments scale them by their amplitude."""
    return {PH: build_h_ph(basis, 1.0), STAG: build_h_stag(basis, 1.0, stag_offset)}


def _dense_propagate(op: SparseOperator, t: float, v: np.ndarray) -> np.ndarray:
    evals, evecs = op.eigh
    phase = np.exp(-1j * t * evals)
    if evecs is None:
        return phase * v if v.ndim == 1 else phase[:, None] * v
    coef = evecs.T @ v
    coef = phase * coef if v.ndim == 1 else phase[:, None] * coef
    return evecs @ coef


def chebyshev_propagate(
    op: SparseOperator, t: float, v: np.ndarray, tol: float = CHEB_TOL, max_order: int = CHEB_MAX_ORDER
) -> np.ndarray:
    """``exp(-i t H) v`` by Chebyshev expansion on Gershgorin bounds."""
    lo, hi = op.gershgorin_bounds()
    center = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    if half == 0.0:
        return np.exp(-1j * t * center) * v
    x = half * t
    # J_k(x) decays super-exponentially once k > |x|
    n_max = min(max_order, int(abs(x) + 20 * np.log10(1 / tol) + 40))
    coeffs = jv(np.arange(n_max + 1), x)
    mat = op.matrix

    def scaled(w):
        return (mat @ w - center * w) / half

    t_prev = v.astype(complex)
    t_curr = scaled(t_prev)
    acc = coeffs[0] * t_prev + 2 * (-1j) * coeffs[1] * t_curr
    converged = False
    for k in range(2, n_max + 1):
        t_next = 2 * scaled(t_curr) - t_prev
        term = 2 * (-1j) ** k * coeffs[k]
        acc = acc + term * t_next
        t_prev, t_curr = t_curr, t_next
        if k > abs(x) and abs(coeffs[k]) < tol and abs(coeffs[k - 1]) < tol:
            converged = True
            break
    if not converged:
        raise PropagationError(f"Chebyshev expansion did not converge within order {n_max}")
    return np.exp(-1j * t * center) * acc


def propagate_segment(
    op: SparseOperator,
    duration: float,
    v: np.ndarray,
    dense_dim: int = DENSE_DIM,
    method: str | None = None,
) -> np.ndarray:
    """``exp(-i duration H) v`` with norm-drift control."""
    if duration == 0.0:
        return v
    if method is None:
        method = "dense" if (op.diagonal or op.dim <= dense_dim) else "chebyshev"
    if method == "dense":
        out = _dense_propagate(op, duration, v)
    elif method == "chebyshev":
        out = chebyshev_propagate(op, duration, v)
    else:
        raise ValueError(f"unknown propagation method {method!r}")
    n0 = np.linalg.norm(v)
    n1 = np.linalg.norm(out)
    drift = abs(n1 - n0)
    if drift > NORM_FAIL:
        raise PropagationError(f"norm drift {drift:.3e} exceeds {NORM_FAIL:.0e}")
    if drift > NORM_RENORM:
        log.debug("renormalizing after drift %.3e", drift)
        out = out * (n0 / n1)
    return out


def apply_drive(
    schedule: DriveSchedule,
    basis: FragmentBasis,
    v: np.ndarray,
    operators: Mapping[str, SparseOperator] | None = None,
    dense_dim: int = DENSE_DIM,
    method: str | None = None,
) -> np.ndarray:
    if operators is None:
        operators = drive_operators(basis)
    v = np.asarray(v, dtype=complex)
    for seg in schedule.segments:
        v = propagate_segment(operators[seg.generator], seg.duration * seg.amplitude, v, dense_dim, method)
    return v


def floquet_unitary(
    schedule: DriveSchedule,
    basis: FragmentBasis,
    operators: Mapping[str, SparseOperator] | None = None,
    dense_dim: int = DENSE_DIM,
) -> np.ndarray:
    """Dense one-cycle unitary."""
    if basis.dim > dense_dim:
        raise DimensionTooLarge(
            f"fragment dimension {basis.dim} exceeds dense limit {dense_dim}; use time averaging"
        )
    if operators is None:
        operators = drive_operators(basis)
    u = np.eye(basis.dim, dtype=complex)
    for seg in schedule.segments:
        t = seg.duration * seg.amplitude
        if t != 0.0:
            u = _dense_propagate(operators[seg.generator], t, u)
    resid = np.max(np.abs(u.conj().T @ u - np.eye(basis.dim)))
    if resid > UNITARITY_TOL:
        raise PropagationError(f"Floquet unitary residual {resid:.3e}")
    return u


def return_probability(
    seed, schedule: DriveSchedule, stag_offset: int = 0, max_dim: int = DEFAULT_MAX_DIM
) -> float:
    """``|<seed| U |seed>|^2`` by exact propagation on the seed's fragment."""
    state = seed if isinstance(seed, FockState) else encode_pseudospin(seed)
    basis = build_fragment(state, max_dim)
    v0 = basis.basis_vector(state.bits)
    v = apply_drive(schedule, basis, v0, drive_operators(basis, stag_offset))
    return float(abs(np.vdot(v0, v)) ** 2)


def regional_return_probabilities(symbols, schedule: DriveSchedule, max_dim: int = DEFAULT_MAX_DIM):
    """Return probability of each active region evolved as its own chain.

    Regions keep their global site parity through the staggered-field
    offset. Walls are skipped (a frozen configuration returns with certainty).
    """
    symbols = parse_pseudospin(symbols)
    regions = [r for r in partition_regions(symbols) if r.kind is not RegionKind.FROZEN_WALL]
    out = []
    for region, text in zip(regions, region_strings(symbols, regions)):
        out.append((region, return_probability(text, schedule, region.start - 1, max_dim)))
    return out
