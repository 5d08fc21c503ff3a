"""Hyperplane arrangements and level-wise traversal of their regions.

Regions are named by sign vectors relative to a base point: after
reorientation every functional is positive at the base point, so the base
region is all ones and each step away from it clears exactly one bit.
Successors of a region are obtained from the irredundant constraints of its
closure, which are exactly the hyperplanes that can be crossed into an
adjacent region.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import tolerances
from .geometry import (
    DegenerateInputError,
    DimensionError,
    LinearFunctional,
    LpCounter,
    Polytope,
    interior_point,
    minimal_h_representation,
)


@dataclass(frozen=True, order=True)
class RegionEncoding:
    """Fixed-width sign vector; bit ``i`` set means functional ``i`` is positive.

    Stored as a Python int, so the width is unbounded.
    """

    value: int
    width: int

    def __post_init__(self):
        if self.value < 0 or self.value >> self.width:
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def all_ones(cls, width: int) -> "RegionEncoding":
        return cls((1 << width) - 1, width)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "RegionEncoding":
        """``bits[0]`` is functional 0."""
        value = 0
        for i, b in enumerate(bits):
            if b:
                value |= 1 << i
        return cls(value, len(bits))

    def bit(self, i: int) -> bool:
        return bool((self.value >> i) & 1)

    def flip(self, i: int) -> "RegionEncoding":
        return RegionEncoding(self.value ^ (1 << i), self.width)

    def bits(self) -> list[int]:
        return [(self.value >> i) & 1 for i in range(self.width)]

    def signs(self) -> np.ndarray:
        """+1/-1 per functional."""
        return np.array([1.0 if b else -1.0 for b in self.bits()])

    @property
    def rank(self) -> int:
        return self.width - self.value.bit_count()

    def complement(self) -> "RegionEncoding":
        return RegionEncoding(self.value ^ ((1 << self.width) - 1), self.width)

    def hex(self) -> str:
        return format(self.value, f"0{max(1, (self.width + 3) // 4)}x")

    def __str__(self):
        return "".join(str(b) for b in self.bits())


@dataclass(frozen=True, eq=False)
class Arrangement:
    """Oriented, deduplicated functionals with a generic base point.

    ``index_map[k] = (i, s)`` says input functional ``k`` is a positive
    multiple of ``s * functionals[i]``.
    """

    functionals: tuple[LinearFunctional, ...]
    base_point: np.ndarray
    orientation_flips: tuple[bool, ...]
    index_map: tuple[tuple[int, int], ...]
    A: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def __len__(self) -> int:
        return len(self.functionals)

    @property
    def base_encoding(self) -> RegionEncoding:
        return RegionEncoding.all_ones(len(self))

    def encode_point(self, x) -> RegionEncoding:
        """Sign vector of a point, which must avoid every hyperplane."""
        v = self.A @ np.asarray(x, dtype=float) + self.c
        if np.any(np.abs(v) <= tolerances.current().feas):
            raise ValueError("point lies on a hyperplane of the arrangement")
        return RegionEncoding.from_bits(v > 0)

    def input_sign(self, k: int, region: RegionEncoding) -> int:
        """Sign (+1/-1) of input functional ``k`` on ``region``."""
        i, s = self.index_map[k]
        return s if region.bit(i) else -s

    def to_dict(self) -> dict:
        return {"dim": self.dim, "functionals": [f.to_dict() for f in self.functionals]}


def _sampling_scale(units: np.ndarray) -> float:
    scale = 10.0 * float(np.max(np.abs(units[:, -1]))) if len(units) else 1.0
    return min(max(scale, 1.0), 1e6)


def build_arrangement(
    functionals: Sequence[LinearFunctional],
    seed: int = 0,
    base_point=None,
    max_draws: int = 1000,
) -> Arrangement:
    """Deduplicate and orient ``functionals`` so all are positive at a base point.

    Functionals defining the same hyperplane (equal after unit normalization,
    up to sign) are collapsed.  Unless ``base_point`` is given, it is drawn
    uniformly from a ball sized to the data with a seeded RNG, rejecting
    draws within the interior tolerance of any hyperplane.
    """
    functionals = list(functionals)
    if not functionals:
        raise ValueError("an arrangement needs at least one functional")
    n = functionals[0].dim
    for f in functionals:
        if f.dim != n:
            raise DimensionError("functionals of different dimensions")
    tol = tolerances.current()

    kept: list[LinearFunctional] = []
    kept_units: list[np.ndarray] = []
    raw_map: list[tuple[int, int]] = []
    for f in functionals:
        u = np.append(f.w, f.c) / np.linalg.norm(f.w)
        for i, other in enumerate(kept_units):
            if np.max(np.abs(u - other)) <= tol.feas:
                raw_map.append((i, 1))
                break
            if np.max(np.abs(u + other)) <= tol.feas:
                raw_map.append((i, -1))
                break
        else:
            raw_map.append((len(kept), 1))
            kept.append(f)
            kept_units.append(u)
    U = np.array(kept_units)

    def clearance(x):
        return np.min(np.abs(U[:, :-1] @ x + U[:, -1]))

    if base_point is not None:
        x0 = np.asarray(base_point, dtype=float).reshape(-1)
        if x0.shape[0] != n:
            raise DimensionError("base point dimension mismatch")
        if clearance(x0) <= tol.interior:
            raise DegenerateInputError("supplied base point lies on a hyperplane")
    else:
        rng = np.random.default_rng(seed)
        radius = _sampling_scale(U)
        for _ in range(max_draws):
            d = rng.standard_normal(n)
            d /= np.linalg.norm(d)
            x0 = d * radius * rng.random() ** (1.0 / n)
            if clearance(x0) > tol.interior:
                break
        else:
            raise DegenerateInputError(f"no generic base point found in {max_draws} draws")

    signs = np.sign(U[:, :-1] @ x0 + U[:, -1])
    flips = tuple(bool(s < 0) for s in signs)
    oriented = tuple(-f if flip else f for f, flip in zip(kept, flips))
    U = U * signs[:, None]
    index_map = tuple((i, s * (-1 if flips[i] else 1)) for i, s in raw_map)
    A = U[:, :-1].copy()
    c = U[:, -1].copy()
    A.setflags(write=False)
    c.setflags(write=False)
    x0.setflags(write=False)
    return Arrangement(oriented, x0, flips, index_map, A, c)


def region_closure(a: Arrangement, r: RegionEncoding) -> Polytope:
    """Closed region as ``<= 0`` constraints: ``-l_i`` where the bit is set, else ``l_i``."""
    if r.width != len(a):
        raise ValueError(f"encoding has {r.width} bits, arrangement has {len(a)} functionals")
    s = r.signs()
    return Polytope.from_arrays(-s[:, None] * a.A, -s * a.c)


@dataclass(frozen=True, eq=False)
class RegionGeometry:
    encoding: RegionEncoding
    closure: Polytope
    witness: np.ndarray


def region_geometry(a: Arrangement, r: RegionEncoding, counter: Optional[LpCounter] = None) -> RegionGeometry:
    closure = region_closure(a, r)
    x = interior_point(closure, counter=counter)
    if x is None:
        raise DegenerateInputError(f"region {r.hex()} has no interior point")
    return RegionGeometry(r, closure, x)


def find_successors(
    a: Arrangement,
    r: RegionEncoding,
    counter: Optional[LpCounter] = None,
    closure: Optional[Polytope] = None,
) -> list[RegionEncoding]:
    """Regions one rank further from the base that share a facet with ``r``.

    Only set bits are candidates: a boundary hyperplane whose bit is already
    clear leads back toward the base and is not a successor.
    """
    if closure is None:
        closure = region_closure(a, r)
    candidates = [i for i in range(r.width) if r.bit(i)]
    if not candidates:
        return []
    facets = minimal_h_representation(closure, candidates, counter=counter, check_interior=False)
    return [r.flip(i) for i in facets]


class StopTraversal(Exception):
    """Raised by a visit callback to end a traversal early."""


@dataclass
class TraversalStats:
    regions: int = 0
    level_counts: list[int] = field(default_factory=list)
    lp_calls: int = 0
    stopped_early: bool = False


Visit = Callable[[RegionEncoding, RegionGeometry], None]


def traverse_regions(
    a: Arrangement,
    visit: Optional[Visit] = None,
    workers: int = 1,
    counter: Optional[LpCounter] = None,
    stats: Optional[TraversalStats] = None,
) -> int:
    """Visit every full-dimensional region of ``a`` once; return the count.

    Regions are processed level by level in increasing rank, in ascending
    encoding order within a level; ``visit`` is always called serially and
    in that order, whatever ``workers`` is.  ``visit`` may raise
    :class:`StopTraversal` to end early.
    """
    counter = counter if counter is not None else LpCounter()
    stats = stats if stats is not None else TraversalStats()
    start_calls = counter.calls

    def expand(r):
        geom = region_geometry(a, r, counter)
        return geom, find_successors(a, r, counter, closure=geom.closure)

    level = {a.base_encoding}
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while level:
            ordered = sorted(level)
            stats.level_counts.append(len(ordered))
            nxt: set[RegionEncoding] = set()
            if pool is None:
                results = (expand(r) for r in ordered)
            else:
                results = pool.map(expand, ordered)
            for r, (geom, succ) in zip(ordered, results):
                stats.regions += 1
                if visit is not None:
                    try:
                        visit(r, geom)
                    except StopTraversal:
                        stats.stopped_early = True
                        return stats.regions
                nxt.update(succ)
            level = nxt
        return stats.regions
    finally:
        stats.lp_calls += counter.calls - start_calls
        if pool is not None:
            pool.shutdown(wait=True, cancel_futures=True)


def region_count_bound(N: int, n: int) -> int:
    """Maximum number of regions cut out by ``N`` hyperplanes in ``R^n``."""
    if N < 0 or n < 1:
        raise ValueError("need N >= 0 and n >= 1")
    return sum(math.comb(N, k) for k in range(n + 1))
