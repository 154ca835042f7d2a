"""Bit-packed fermion configurations and the pair-hopping move.

Site ``j`` (1-based) lives in bit ``j - 1``, so site 1 is the least
significant bit. Pairs of sites ``(2m-1, 2m)`` form pseudospin ``m``:

====== ========= ==========
symbol  sites     sigma^z
====== ========= ==========
``u``   ``01``    +1
``d``   ``10``    -1
``+``   ``11``     0
``-``   ``00``     0
====== ========= ==========
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_SITES = 63

SQUEEZE = "squeeze"
ANTISQUEEZE = "antisqueeze"

# window patterns, site j in the lowest bit
_WINDOW_0110 = 0b0110
_WINDOW_1001 = 0b1001


class Pseudospin(enum.Enum):
    UP = "u"
    DOWN = "d"
    PLUS = "+"
    MINUS = "-"

    @property
    def occupations(self) -> tuple[int, int]:
        """Occupations of sites ``(2m-1, 2m)``."""
        return _OCC[self]

    @property
    def is_fracton(self) -> bool:
        return self in (Pseudospin.PLUS, Pseudospin.MINUS)


_OCC = {
    Pseudospin.UP: (0, 1),
    Pseudospin.DOWN: (1, 0),
    Pseudospin.PLUS: (1, 1),
    Pseudospin.MINUS: (0, 0),
}
_FROM_OCC = {v: k for k, v in _OCC.items()}


def parse_pseudospin(text: str | Sequence[Pseudospin]) -> tuple[Pseudospin, ...]:
    """Parse ``"ud+-"`` style text (or ``"UP DOWN PLUS"`` words) into symbols.

    Site 1 is the leftmost character.
    """
    if not isinstance(text, str):
        return tuple(Pseudospin(s) if not isinstance(s, Pseudospin) else s for s in text)
    words = text.split()
    if len(words) > 1 or (words and words[0].upper() in Pseudospin.__members__):
        try:
            return tuple(Pseudospin[w.upper()] for w in words)
        except KeyError as exc:
            raise ValueError(f"unknown pseudospin name {exc.args[0]!r}") from None
    symbols = []
    for ch in "".join(words):
        try:
            symbols.append(Pseudospin(ch.lower()))
        except ValueError:
            raise ValueError(f"invalid pseudospin character {ch!r} in {text!r}") from None
    return tuple(symbols)


def format_pseudospin(symbols: Iterable[Pseudospin]) -> str:
    return "".join(s.value for s in symbols)


@dataclass(frozen=True)
class FockState:
    """Occupation word of ``length`` spinless-fermion sites."""

    bits: int
    length: int

    def __post_init__(self):
        if not 2 <= self.length <= MAX_SITES or self.length % 2:
            raise ValueError(f"length must be even and in [2, {MAX_SITES}], got {self.length}")
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError(f"bits {self.bits:#x} do not fit in {self.length} sites")

    @classmethod
    def from_occupations(cls, occ: str | Sequence[int]) -> "FockState":
        """Build from a site-ascending occupation list such as ``"0110"``."""
        digits = [int(c) for c in occ]
        if any(x not in (0, 1) for x in digits):
            raise ValueError(f"occupations must be 0/1, got {occ!r}")
        bits = sum(x << k for k, x in enumerate(digits))
        return cls(bits, len(digits))

    def occupation(self, site: int) -> int:
        return (self.bits >> (site - 1)) & 1

    def occupations(self) -> str:
        return "".join(str(self.occupation(j)) for j in range(1, self.length + 1))

    @property
    def n_pseudo(self) -> int:
        return self.length // 2

    def __str__(self) -> str:
        return self.occupations()


@dataclass(frozen=True)
class ConservedCharges:
    n_tot: int
    c_com: int
    n_even: int
    n_odd: int


def encode_pseudospin(symbols: str | Sequence[Pseudospin]) -> FockState:
    symbols = parse_pseudospin(symbols)
    if not symbols:
        raise ValueError("pseudospin string must be non-empty")
    bits = 0
    for m, s in enumerate(symbols):
        lo, hi = s.occupations
        bits |= (lo << (2 * m)) | (hi << (2 * m + 1))
    return FockState(bits, 2 * len(symbols))


def decode_pseudospin(state: FockState) -> tuple[Pseudospin, ...]:
    return tuple(
        _FROM_OCC[(state.bits >> (2 * m)) & 1, (state.bits >> (2 * m + 1)) & 1]
        for m in range(state.n_pseudo)
    )


def charges(state: FockState) -> ConservedCharges:
    occ = [state.occupation(j) for j in range(1, state.length + 1)]
    n_even = sum(occ[1::2])
    n_odd = sum(occ[0::2])
    c_com = sum(j * n for j, n in enumerate(occ, start=1))
    return ConservedCharges(n_even + n_odd, c_com, n_even, n_odd)


def pseudospin_z(state: FockState, m: int) -> int:
    """``n_{2m} - n_{2m-1}`` for pseudospin site ``m`` (1-based)."""
    if not 1 <= m <= state.n_pseudo:
        raise IndexError(f"pseudospin site {m} out of range 1..{state.n_pseudo}")
    return state.occupation(2 * m) - state.occupation(2 * m - 1)


def pair_hop_operators(j: int, direction: str) -> tuple[tuple[int, bool], ...]:
    """Operator string ``((site, dagger), ...)`` in written order.

    The squeeze term is ``c+_j c+_{j+3} c_{j+2} c_{j+1}``; the antisqueeze
    term is its adjoint.
    """
    if direction == SQUEEZE:
        return ((j, True), (j + 3, True), (j + 2, False), (j + 1, False))
    if direction == ANTISQUEEZE:
        return ((j + 1, True), (j + 2, True), (j + 3, False), (j, False))
    raise ValueError(f"unknown direction {direction!r}")


def apply_operator_string(bits: np.ndarray, ops: Sequence[tuple[int, bool]]):
    """Apply fermion operators (rightmost first) to an array of basis words.

    Basis states are ordered products of creation operators by ascending
    site. Returns ``(new_bits, sign, alive)``; ``sign`` is +-1 and ``alive``
    marks states the string does not annihilate.
    """
    bits = np.asarray(bits, dtype=np.uint64).copy()
    sign = np.ones(bits.shape, dtype=np.int8)
    alive = np.ones(bits.shape, dtype=bool)
    for site, dagger in reversed(ops):
        mask = np.uint64(1 << (site - 1))
        below = np.uint64((1 << (site - 1)) - 1)
        occupied = (bits & mask) != 0
        alive &= ~occupied if dagger else occupied
        parity = np.bitwise_count(bits & below) & 1
        sign = np.where(parity, -sign, sign).astype(np.int8)
        bits ^= mask
    return bits, sign, alive


def window_code(bits, j: int):
    """4-bit window starting at site ``j``; works on ints and uint64 arrays."""
    if isinstance(bits, np.ndarray):
        return (bits >> np.uint64(j - 1)) & np.uint64(0xF)
    return (bits >> (j - 1)) & 0xF


def apply_pair_hop(state: FockState, j: int, direction: str) -> tuple[FockState, int] | None:
    """Pair-hop at window ``j..j+3``; ``None`` when the window does not match."""
    if not 1 <= j <= state.length - 3:
        raise IndexError(f"window start {j} out of range 1..{state.length - 3}")
    if direction not in (SQUEEZE, ANTISQUEEZE):
        raise ValueError(f"unknown direction {direction!r}")
    want = _WINDOW_0110 if direction == SQUEEZE else _WINDOW_1001
    if window_code(state.bits, j) != want:
        return None
    new, sign, alive = apply_operator_string(np.array([state.bits]), pair_hop_operators(j, direction))
    assert alive[0]
    return FockState(int(new[0]), state.length), int(sign[0])
