"""Single-qubit QSP: ``U(a) = S(phi_0) prod_r [W(a) S(phi_r)]``.

The product is read left to right as written, so ``S(phi_d)`` is the first
factor to act on a state. ``|U_00|^2`` does not depend on that choice because
every factor is symmetric (W) or diagonal (S).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import polynomial as nppoly

PARITY_TOL = 1e-9
UNITARITY_TOL = 1e-9
GRID_POINTS = 1000


class QSPValidationError(ValueError):
    def __init__(self, condition: str, residual: float):
        super().__init__(f"QSP {condition} condition violated (residual {residual:.3e})")
        self.condition = condition
        self.residual = residual


def _check_signal(a: float) -> None:
    if not -1.0 <= a <= 1.0:
        raise ValueError(f"signal a={a} outside [-1, 1]")


def signal_w(a: float) -> np.ndarray:
    """X rotation ``[[a, i sqrt(1-a^2)], [i sqrt(1-a^2), a]]``."""
    _check_signal(a)
    s = 1j * np.sqrt(1.0 - a * a)
    return np.array([[a, s], [s, a]], dtype=complex)


def processing_s(phi: float) -> np.ndarray:
    return np.diag([np.exp(1j * phi), np.exp(-1j * phi)])


def compose_qsp(phases: Sequence[float], a: float) -> np.ndarray:
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        raise ValueError("phase sequence needs at least one phase")
    w = signal_w(a)
    u = processing_s(phases[0])
    for phi in phases[1:]:
        u = u @ w @ processing_s(phi)
    return u


def trivial_phases() -> np.ndarray:
    return np.zeros(2)


def bb1_chi() -> float:
    return 0.5 * np.arccos(-0.25)


def bb1_phases() -> np.ndarray:
    chi = bb1_chi()
    return np.array([np.pi / 2, -chi, 2 * chi, 0.0, -2 * chi, chi])


def response(phases: Sequence[float], a: float) -> float:
    """Transition probability ``|P(a)|^2``."""
    return float(abs(compose_qsp(phases, a)[0, 0]) ** 2)


def chebyshev_nodes(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.cos((2 * k + 1) * np.pi / (2 * n))


@dataclass(frozen=True)
class PQPolynomials:
    """Monomial coefficients (lowest order first) of ``P`` and ``Q``."""

    p_coeffs: np.ndarray
    q_coeffs: np.ndarray
    degree: int

    def p(self, a):
        return nppoly.polyval(a, self.p_coeffs)

    def q(self, a):
        if self.q_coeffs.size == 0:
            return np.zeros_like(np.asarray(a, dtype=complex))
        return nppoly.polyval(a, self.q_coeffs)

    def chebyshev(self) -> tuple[np.ndarray, np.ndarray]:
        """Same polynomials in the Chebyshev basis."""
        return npcheb.poly2cheb(self.p_coeffs), npcheb.poly2cheb(self.q_coeffs)

    def unitarity_residual(self, grid: np.ndarray) -> float:
        val = np.abs(self.p(grid)) ** 2 + (1 - grid**2) * np.abs(self.q(grid)) ** 2
        return float(np.max(np.abs(val - 1.0)))

    def parity_residual(self) -> float:
        """Largest coefficient of the wrong parity in P or Q."""
        d = self.degree
        bad_p = self.p_coeffs[(d + 1) % 2 :: 2]
        bad_q = self.q_coeffs[d % 2 :: 2]
        return float(max(np.max(np.abs(bad_p), initial=0.0), np.max(np.abs(bad_q), initial=0.0)))


def _interpolate(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    vander = np.vander(nodes, increasing=True)
    return np.linalg.solve(vander, values.astype(complex))


def extract_pq(phases: Sequence[float], grid_points: int = GRID_POINTS) -> PQPolynomials:
    """Recover ``P`` and ``Q`` by interpolation and check the QSP conditions.

    ``P`` comes from ``U_00`` at ``d+1`` Chebyshev nodes; ``Q`` from
    ``U_01 / (i sqrt(1-a^2))`` at ``d`` interior nodes. Raises
    :class:`QSPValidationError` naming the first failing condition.
    """
    phases = np.asarray(phases, dtype=float)
    d = phases.size - 1
    if d < 0:
        raise ValueError("phase sequence needs at least one phase")

    p_nodes = chebyshev_nodes(d + 1)
    p_vals = np.array([compose_qsp(phases, a)[0, 0] for a in p_nodes])
    p_coeffs = _interpolate(p_nodes, p_vals)
    if d > 0:
        q_nodes = chebyshev_nodes(d)
        q_vals = np.array(
            [compose_qsp(phases, a)[0, 1] / (1j * np.sqrt(1 - a * a)) for a in q_nodes]
        )
        q_coeffs = _interpolate(q_nodes, q_vals)
    else:
        q_coeffs = np.zeros(0, dtype=complex)
    pq = PQPolynomials(p_coeffs, q_coeffs, d)

    grid = np.linspace(-1.0, 1.0, grid_points)
    # degree holds by construction; confirm the interpolants reproduce the sequence
    u = np.array([compose_qsp(phases, a) for a in grid])
    sq = np.sqrt(1 - grid**2)
    degree_res = max(
        np.max(np.abs(u[:, 0, 0] - pq.p(grid))),
        np.max(np.abs(u[:, 0, 1] - 1j * sq * pq.q(grid))),
    )
    if degree_res > UNITARITY_TOL:
        raise QSPValidationError("degree", degree_res)
    parity_res = pq.parity_residual()
    if parity_res > PARITY_TOL:
        raise QSPValidationError("parity", parity_res)
    unit_res = pq.unitarity_residual(grid)
    if unit_res > UNITARITY_TOL:
        raise QSPValidationError("unitarity", unit_res)
    return pq
