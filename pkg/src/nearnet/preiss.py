"""An infinite-dimensional tree metric space with exact dyadic distances.

Points are sequences of naturals with coordinate ``i`` drawn from
``[N_i]`` where ``N_i = i!``. Finite sequences (label 0) carry atoms of an
atomic measure; infinite sequences (label 1) form a product-measure set of
mass ``alpha``. With ``level(k) = 2**-k`` (0 at infinity), the metric is

    rho(x, y) = (level(|lcp|) - level(|x|)) + (level(|lcp|) - level(|y|))

where ``lcp`` is the longest common prefix. Every distance is a dyadic
rational; :func:`preiss_distance` returns it as an exact ``Fraction`` and
the float paths below reproduce the same values bit-exactly whenever prefix
depths and lengths stay at most 50 (float64 holds a 53-bit window; sampled
lengths beyond 50 have probability ``2**-50`` per draw).

Infinite points are lazy: coordinate ``i`` is a pure function of
``(seed, i)``, memoized, so realizations are reproducible. Comparing two
distinct infinite points halts almost surely; `depth_cap` turns the
measure-zero non-halting event into :class:`DepthCapError`, never a silent
approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .metric import LabeledSample, MetricCompatibilityError, MetricSpace

__all__ = [
    "INFINITE",
    "DepthCapError",
    "PreissParams",
    "SeqPoint",
    "SubtreeId",
    "branching",
    "prefix_product",
    "gamma_level",
    "distance_from_prefix",
    "preiss_distance",
    "PreissSpace",
    "sample_preiss",
    "sample_labeled_point",
    "point_to_json",
    "point_from_json",
]

INFINITE = math.inf

#: Depth to which bulk arrays realize coordinates; deeper agreement falls
#: back to exact per-pair comparison. N_12 < 2**31 keeps the vectorized
#: modular arithmetic inside uint64.
VEC_DEPTH = 12

_M64 = (1 << 64) - 1
_SALT = 0x9E3779B97F4A7C15


class DepthCapError(RuntimeError):
    """Two infinite points agreed past the realization cap."""


def branching(k: int) -> int:
    """Branching factor at depth ``k``: factorial growth."""
    if k < 1:
        raise ValueError("depths are 1-based")
    return math.factorial(k)


@lru_cache(maxsize=None)
def prefix_product(k: int) -> int:
    """``N_1 * ... * N_k`` (1 for k = 0)."""
    if k < 0:
        raise ValueError("negative depth")
    return 1 if k == 0 else prefix_product(k - 1) * branching(k)


def gamma_level(k) -> Fraction:
    """Scale of depth ``k``: ``2**-k``, exactly; 0 at infinity."""
    if k == INFINITE:
        return Fraction(0)
    if k < 0 or k != int(k):
        raise ValueError(f"depth must be a non-negative integer or infinity, got {k}")
    return Fraction(1, 1 << int(k))


def distance_from_prefix(lcp_len, len_x, len_y) -> Fraction:
    """The metric formula applied to a common-prefix length and two lengths."""
    g = gamma_level(lcp_len)
    return (g - gamma_level(len_x)) + (g - gamma_level(len_y))


def _mix64(z: int) -> int:
    z = (z + _SALT) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def _coord_words(seed: int, i: int) -> tuple[int, int]:
    u = _mix64(seed ^ _mix64(i))
    v = _mix64(u ^ _SALT)
    return u, v


def _coord(seed: int, i: int) -> int:
    """Coordinate ``i`` of the infinite point with this seed (1-based value)."""
    u, v = _coord_words(seed, i)
    return ((u << 64) | v) % branching(i) + 1


@dataclass(frozen=True)
class PreissParams:
    """Mass ``alpha`` of the infinite-sequence set, plus the realization cap."""

    alpha: float
    depth_cap: int = 30

    def __post_init__(self):
        if not 0.0 < float(self.alpha) < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.depth_cap < 8:
            raise ValueError("depth cap below 8 is too shallow to be useful")


class SeqPoint:
    """A finite or lazily realized infinite sequence point."""

    __slots__ = ("kind", "coords", "seed", "depth_cap", "_memo")

    def __init__(self, kind, coords=None, seed=None, depth_cap=30, _memo=None):
        self.kind = kind
        self.coords = coords
        self.seed = seed
        self.depth_cap = depth_cap
        self._memo = _memo if _memo is not None else []

    @classmethod
    def finite(cls, coords) -> "SeqPoint":
        coords = tuple(int(c) for c in coords)
        for i, c in enumerate(coords, start=1):
            if not 1 <= c <= branching(i):
                raise ValueError(f"coordinate {i} must lie in [1, {branching(i)}], got {c}")
        return cls("finite", coords=coords)

    @classmethod
    def infinite(cls, seed: int, depth_cap: int = 30) -> "SeqPoint":
        return cls("infinite", seed=int(seed), depth_cap=int(depth_cap))

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinite"

    @property
    def length(self):
        return INFINITE if self.is_infinite else len(self.coords)

    def coord(self, i: int) -> int:
        """1-based coordinate; realizes (and memoizes) infinite points."""
        if i < 1:
            raise IndexError("coordinates are 1-based")
        if self.kind == "finite":
            if i > len(self.coords):
                raise IndexError(f"finite point of length {len(self.coords)} has no coordinate {i}")
            return self.coords[i - 1]
        while len(self._memo) < i:
            self._memo.append(_coord(self.seed, len(self._memo) + 1))
        return self._memo[i - 1]

    def prefix(self, k: int) -> tuple[int, ...]:
        return tuple(self.coord(i) for i in range(1, k + 1))

    @property
    def realized(self) -> tuple[int, ...]:
        return tuple(self.coords) if self.kind == "finite" else tuple(self._memo)

    def __eq__(self, other):
        if not isinstance(other, SeqPoint):
            return NotImplemented
        if self.kind != other.kind:
            return False
        if self.kind == "finite":
            return self.coords == other.coords
        return self.seed == other.seed

    def __hash__(self):
        return hash((self.kind, self.coords if self.kind == "finite" else self.seed))

    def __repr__(self):
        if self.kind == "finite":
            return f"SeqPoint.finite({list(self.coords)})"
        return f"SeqPoint.infinite(seed={self.seed})"


@dataclass(frozen=True)
class SubtreeId:
    """A subtree handle: the open subtree at ``prefix`` or, when ``closed``,
    that subtree together with the prefix's immediate ancestor."""

    prefix: tuple[int, ...]
    closed: bool = False

    def __post_init__(self):
        SeqPoint.finite(self.prefix)  # validates coordinate ranges
        if self.closed and len(self.prefix) < 1:
            raise ValueError("a closed subtree needs a nonempty root prefix")

    @property
    def level(self) -> int:
        return len(self.prefix)

    def contains(self, point: SeqPoint) -> bool:
        l = self.level
        if point.length >= l and point.prefix(l) == self.prefix:
            return True
        if self.closed and point.length == l - 1 and point.prefix(l - 1) == self.prefix[: l - 1]:
            return True
        return False


def preiss_distance(x: SeqPoint, y: SeqPoint) -> Fraction:
    """Exact dyadic distance between two points of the tree space."""
    if not isinstance(x, SeqPoint) or not isinstance(y, SeqPoint):
        raise MetricCompatibilityError(f"tree metric needs SeqPoint operands, got {x!r}, {y!r}")
    if x is y or x == y:
        return Fraction(0)
    both_infinite = x.is_infinite and y.is_infinite
    cap = min(x.depth_cap, y.depth_cap) if both_infinite else math.inf
    limit = min(x.length, y.length)
    common = 0
    d = 1
    while d <= limit:
        if d > cap:
            raise DepthCapError(
                f"points agree through depth {cap}; raise depth_cap to distinguish them"
            )
        if x.coord(d) != y.coord(d):
            break
        common += 1
        d += 1
    return distance_from_prefix(common, x.length, y.length)


# ----------------------------------------------------------------------
# Packed bulk form: coordinate matrix to VEC_DEPTH plus lengths and seeds.
# ----------------------------------------------------------------------

_BRANCH_VEC = np.array([math.factorial(i) for i in range(1, VEC_DEPTH + 1)], dtype=np.uint64)
_CARRY_VEC = np.array(
    [(1 << 64) % math.factorial(i) for i in range(1, VEC_DEPTH + 1)], dtype=np.uint64
)
_LEN_SENTINEL = np.int32(2**30)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z + np.uint64(_SALT)).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _coords_for_seeds(seeds: np.ndarray, depth: int) -> np.ndarray:
    """Coordinates 1..depth for each seed; matches the scalar ``_coord``."""
    out = np.empty((len(seeds), depth), dtype=np.int64)
    s = seeds.astype(np.uint64)
    for i in range(1, depth + 1):
        u = _mix64_np(s ^ np.uint64(_mix64(i)))
        v = _mix64_np(u ^ np.uint64(_SALT))
        n_i = _BRANCH_VEC[i - 1]
        val = ((u % n_i) * _CARRY_VEC[i - 1] + v % n_i) % n_i
        out[:, i - 1] = val.astype(np.int64) + 1
    return out


class PackedSeqPoints:
    __slots__ = ("points", "coords", "lengths", "pow_len", "seeds", "is_inf")

    def __init__(self, points, coords, lengths, pow_len, seeds, is_inf):
        self.points = points
        self.coords = coords
        self.lengths = lengths
        self.pow_len = pow_len
        self.seeds = seeds
        self.is_inf = is_inf

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class PreissSpace(MetricSpace):
    """MetricSpace view of the tree space (exact dyadic float distances)."""

    params: PreissParams

    def distance(self, x, y) -> float:
        return float(preiss_distance(x, y))

    def pack(self, points) -> PackedSeqPoints:
        pts = list(points)
        n = len(pts)
        # Values at depth <= VEC_DEPTH stay below 2**31, so int32 coords halve
        # the memory traffic of the pairwise comparison cascade.
        coords = np.zeros((n, VEC_DEPTH), dtype=np.int32)
        lengths = np.empty(n, dtype=np.int32)
        seeds = np.full(n, -1, dtype=np.int64)
        is_inf = np.zeros(n, dtype=bool)
        inf_rows = []
        for i, p in enumerate(pts):
            if not isinstance(p, SeqPoint):
                raise MetricCompatibilityError(f"tree metric needs SeqPoint points, got {p!r}")
            if p.is_infinite:
                inf_rows.append(i)
                is_inf[i] = True
                lengths[i] = _LEN_SENTINEL
                seeds[i] = p.seed
            else:
                L = len(p.coords)
                lengths[i] = L
                coords[i, : min(L, VEC_DEPTH)] = p.coords[:VEC_DEPTH]
        if inf_rows:
            rows = np.array(inf_rows, dtype=np.int64)
            coords[rows] = _coords_for_seeds(seeds[rows], VEC_DEPTH).astype(np.int32)
        exp = -np.minimum(lengths, np.int32(2000)).astype(np.int32)
        pow_len = np.where(is_inf, 0.0, np.ldexp(1.0, exp))
        return PackedSeqPoints(pts, coords, lengths, pow_len, seeds, is_inf)

    def point_at(self, packed: PackedSeqPoints, i: int):
        return packed.points[i]

    def distance_block(self, packed_a, rows_a, packed_b, rows_b) -> np.ndarray:
        rows_a = np.asarray(rows_a, dtype=np.int64)
        rows_b = np.asarray(rows_b, dtype=np.int64)
        ca = packed_a.coords[rows_a]
        cb = packed_b.coords[rows_b]
        shape = (len(rows_a), len(rows_b))
        alive = np.ones(shape, dtype=bool)
        depth = np.zeros(shape, dtype=np.int16)
        eq = np.empty(shape, dtype=bool)
        for d in range(VEC_DEPTH):
            np.equal(ca[:, None, d], cb[None, :, d], out=eq)
            np.logical_and(alive, eq, out=alive)
            if not alive.any():
                break
            depth += alive
        min_len = np.minimum(packed_a.lengths[rows_a][:, None], packed_b.lengths[rows_b][None, :])
        lcp = np.minimum(depth.astype(np.int32), min_len)
        rho = (
            np.ldexp(1.0, np.int32(1) - lcp)
            - packed_a.pow_len[rows_a][:, None]
            - packed_b.pow_len[rows_b][None, :]
        )
        unresolved = (depth == VEC_DEPTH) & (min_len > VEC_DEPTH)
        if unresolved.any():
            for r, c in zip(*np.nonzero(unresolved)):
                rho[r, c] = self.distance(
                    packed_a.points[int(rows_a[r])], packed_b.points[int(rows_b[c])]
                )
        return rho


# ----------------------------------------------------------------------
# Sampling
# ----------------------------------------------------------------------


def sample_preiss(rng: np.random.Generator, n: int, params: PreissParams) -> LabeledSample:
    """Draw ``n`` labeled points: infinite (label 1) with probability alpha,
    otherwise a finite point whose length ``k`` has probability ``2**-k``
    and whose coordinates are uniform on ``[N_i]``."""
    if n < 1:
        raise ValueError("need at least one draw")
    alpha = float(params.alpha)
    is_inf = rng.random(n) < alpha
    n_inf = int(is_inf.sum())
    seeds = rng.integers(0, 1 << 63, size=n_inf, dtype=np.int64)
    lengths = rng.geometric(0.5, size=n - n_inf)
    points: list = [None] * n
    fin_rows = np.nonzero(~is_inf)[0]
    for row, seed in zip(np.nonzero(is_inf)[0], seeds.tolist()):
        points[row] = SeqPoint.infinite(seed, depth_cap=params.depth_cap)
    # Stage shallow coordinates as numpy columns; factorials past depth 20
    # overflow int64, so the (astronomically rare) deeper coordinates are
    # drawn one by one from the same generator.
    stage_depth = min(int(lengths.max()) if len(lengths) else 0, 20)
    cols: list[np.ndarray] = []
    for d in range(1, stage_depth + 1):
        need = lengths >= d
        col = np.zeros(len(lengths), dtype=np.int64)
        col[need] = rng.integers(1, branching(d), size=int(need.sum()), dtype=np.int64, endpoint=True)
        cols.append(col)
    for j, row in enumerate(fin_rows):
        L = int(lengths[j])
        coords = [int(cols[d][j]) for d in range(min(L, stage_depth))]
        for d in range(stage_depth + 1, L + 1):
            coords.append(int.from_bytes(rng.bytes(16), "little") % branching(d) + 1)
        points[row] = SeqPoint.finite(tuple(coords))
    labels = is_inf.astype(np.int64)
    return LabeledSample(points=points, labels=labels)


def sample_labeled_point(rng: np.random.Generator, params: PreissParams):
    """Single draw; same semantics as :func:`sample_preiss` with n=1."""
    s = sample_preiss(rng, 1, params)
    return s.points[0], int(s.labels[0])


# ----------------------------------------------------------------------
# JSON point encoding
# ----------------------------------------------------------------------


def point_to_json(p: SeqPoint) -> dict:
    if p.kind == "finite":
        return {"kind": "finite", "coords": list(p.coords)}
    return {"kind": "infinite", "seed": p.seed, "realized": list(p.realized)}


def point_from_json(obj: dict, depth_cap: int = 30) -> SeqPoint:
    if obj["kind"] == "finite":
        return SeqPoint.finite(obj["coords"])
    if obj["kind"] == "infinite":
        p = SeqPoint.infinite(obj["seed"], depth_cap=depth_cap)
        for i, want in enumerate(obj.get("realized", []), start=1):
            if int(want) != p.coord(i):
                raise ValueError("realized coordinates disagree with the seed")
        return p
    raise ValueError(f"unknown point kind {obj.get('kind')!r}")
