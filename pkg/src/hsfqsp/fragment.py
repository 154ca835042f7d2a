"""Krylov fragments of the pair-hopping chain.

A fragment is the closure of a product seed under every pair-hop move. The
BFS runs over whole frontiers as uint64 arrays and the final basis is
sorted, so the ordering never depends on traversal order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from math import prod
from typing import Sequence

import numpy as np

from .fock import (
    ConservedCharges,
    FockState,
    Pseudospin,
    charges,
    encode_pseudospin,
    format_pseudospin,
    parse_pseudospin,
    window_code,
)

DEFAULT_MAX_DIM = 1 << 24


class CapacityError(RuntimeError):
    """Fragment grew past the configured dimension limit."""

    def __init__(self, dim: int, max_dim: int):
        super().__init__(f"fragment dimension exceeds capacity ({dim} > {max_dim})")
        self.dim = dim
        self.max_dim = max_dim


class FragmentBasis:
    """Sorted, closed set of occupation words sharing one set of charges."""

    def __init__(self, states: np.ndarray, length: int):
        states = np.asarray(states, dtype=np.uint64)
        if states.ndim != 1 or states.size == 0:
            raise ValueError("fragment needs a non-empty 1-d state array")
        if np.any(states[1:] <= states[:-1]):
            raise ValueError("states must be strictly ascending")
        self.states = states
        self.states.setflags(write=False)
        self.length = length

    @property
    def dim(self) -> int:
        return self.states.size

    @property
    def n_pseudo(self) -> int:
        return self.length // 2

    def __len__(self) -> int:
        return self.dim

    def __contains__(self, bits) -> bool:
        return self.find(np.array([int(bits)], dtype=np.uint64))[0] >= 0

    def state(self, k: int) -> FockState:
        return FockState(int(self.states[k]), self.length)

    def index(self, bits: int) -> int:
        k = int(self.find(np.array([int(bits)], dtype=np.uint64))[0])
        if k < 0:
            raise KeyError(f"state {bits:#x} not in fragment")
        return k

    def find(self, bits: np.ndarray) -> np.ndarray:
        """Positions of ``bits`` in the basis, ``-1`` where absent."""
        pos = np.searchsorted(self.states, bits)
        pos_c = np.minimum(pos, self.dim - 1)
        return np.where(self.states[pos_c] == bits, pos_c, -1)

    @cached_property
    def charges(self) -> ConservedCharges:
        return charges(self.state(0))

    @cached_property
    def sigma_z_table(self) -> np.ndarray:
        """``(dim, N)`` int8 table of pseudospin-z values."""
        s = self.states
        table = np.empty((self.dim, self.n_pseudo), dtype=np.int8)
        for m in range(1, self.n_pseudo + 1):
            hi = ((s >> np.uint64(2 * m - 1)) & np.uint64(1)).astype(np.int8)
            lo = ((s >> np.uint64(2 * m - 2)) & np.uint64(1)).astype(np.int8)
            table[:, m - 1] = hi - lo
        return table

    def basis_vector(self, bits: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(bits)] = 1.0
        return v

    def __eq__(self, other) -> bool:
        if not isinstance(other, FragmentBasis):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.states, other.states)

    def __repr__(self) -> str:
        return f"FragmentBasis(L={self.length}, dim={self.dim})"


def hop_neighbors(states: np.ndarray, length: int) -> np.ndarray:
    """All pair-hop images of ``states`` (both directions, every window)."""
    out = []
    for j in range(1, length - 2):
        w = window_code(states, j)
        hit = states[(w == np.uint64(0b0110)) | (w == np.uint64(0b1001))]
        # both patterns are symmetric, so flipping the whole window hops either way
        out.append(hit ^ np.uint64(0xF << (j - 1)))
    if not out:
        return np.empty(0, dtype=np.uint64)
    return np.concatenate(out)


def build_fragment(seed: FockState | str, max_dim: int = DEFAULT_MAX_DIM) -> FragmentBasis:
    if isinstance(seed, str):
        seed = encode_pseudospin(seed)
    seen = np.array([seed.bits], dtype=np.uint64)
    frontier = seen
    while frontier.size:
        cand = np.unique(hop_neighbors(frontier, seed.length))
        frontier = np.setdiff1d(cand, seen, assume_unique=True)
        if frontier.size:
            seen = np.union1d(seen, frontier)
        if seen.size > max_dim:
            raise CapacityError(seen.size, max_dim)
    return FragmentBasis(seen, seed.length)


class RegionKind(enum.Enum):
    INTEGRABLE = "integrable"
    NONINTEGRABLE = "nonintegrable"
    FROZEN_WALL = "frozen_wall"


@dataclass(frozen=True)
class Region:
    start: int  # 1-based, inclusive
    stop: int  # inclusive
    kind: RegionKind

    def __len__(self) -> int:
        return self.stop - self.start + 1


def partition_regions(symbols: str | Sequence[Pseudospin]) -> list[Region]:
    """Split a pseudospin string at runs of two or more identical fractons.

    The labels are a heuristic: a ``++`` run next to a ``-`` can still be
    eroded by the dynamics. Anything that needs exactness should use the
    fragment itself.
    """
    symbols = parse_pseudospin(symbols)
    n = len(symbols)
    walls = []
    m = 0
    while m < n:
        k = m
        while k + 1 < n and symbols[k + 1] == symbols[m]:
            k += 1
        if symbols[m].is_fracton and k > m:
            walls.append((m, k))
        m = k + 1

    regions = []
    cursor = 0

    def active(a, b):
        kind = (
            RegionKind.NONINTEGRABLE
            if any(s.is_fracton for s in symbols[a : b + 1])
            else RegionKind.INTEGRABLE
        )
        regions.append(Region(a + 1, b + 1, kind))

    for a, b in walls:
        if a > cursor:
            active(cursor, a - 1)
        regions.append(Region(a + 1, b + 1, RegionKind.FROZEN_WALL))
        cursor = b + 1
    if cursor < n:
        active(cursor, n - 1)
    return regions


def region_strings(symbols, regions: Sequence[Region]) -> list[str]:
    symbols = parse_pseudospin(symbols)
    return [format_pseudospin(symbols[r.start - 1 : r.stop]) for r in regions]


def verify_factorization(symbols: str | Sequence[Pseudospin], max_dim: int = DEFAULT_MAX_DIM) -> bool:
    """Does the full fragment dimension equal the product over active regions?"""
    symbols = parse_pseudospin(symbols)
    regions = partition_regions(symbols)
    active = [r for r in regions if r.kind is not RegionKind.FROZEN_WALL]
    if len(active) < 2:
        raise ValueError(
            f"{format_pseudospin(symbols)!r} has {len(active)} active region(s); "
            "factorization needs at least two separated by a wall"
        )
    full = build_fragment(encode_pseudospin(symbols), max_dim).dim
    parts = [build_fragment(encode_pseudospin(s), max_dim).dim for s in region_strings(symbols, active)]
    return full == prod(parts)
