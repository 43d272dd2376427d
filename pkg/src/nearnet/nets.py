"""Scale-``gamma`` nets of point sets and the induced Voronoi partitions.

A gamma-net of a point sequence packs (pairwise anchor distances strictly
greater than gamma) and covers (every point within distance at most gamma of
some anchor). Construction is a greedy sweep in ascending index order: point
``i`` becomes an anchor iff it is farther than gamma from every anchor so
far. The sweep is implemented as "repeatedly promote the lowest-index
uncovered point", which yields the identical anchor set round by round while
letting each round be one vectorized distance row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metric import MetricSpace

__all__ = [
    "GammaNet",
    "VoronoiAssignment",
    "build_net",
    "assign_voronoi",
    "net_size_bound",
]


@dataclass(frozen=True)
class GammaNet:
    """Anchor indices (ascending sample positions) of a gamma-net."""

    gamma: float
    anchor_indices: tuple[int, ...]

    @property
    def kappa(self) -> int:
        return len(self.anchor_indices)


@dataclass(frozen=True)
class VoronoiAssignment:
    """Cell map of a net: ``cell_of[i]`` is the anchor position owning point i."""

    cell_of: np.ndarray
    cells: tuple[tuple[int, ...], ...]


def build_net(points, gamma: float, space: MetricSpace, packed=None) -> GammaNet:
    """Greedy index-order gamma-net of ``points``. Deterministic."""
    if gamma <= 0:
        raise ValueError(f"net scale must be positive, got {gamma}")
    n = len(points)
    if n == 0:
        raise ValueError("cannot build a net of zero points")
    if packed is None:
        packed = space.pack(points)
    anchors = []
    remaining = np.arange(n, dtype=np.int64)
    while remaining.size:
        a = int(remaining[0])
        anchors.append(a)
        row = space.distance_block(packed, np.array([a], dtype=np.int64), packed, remaining)[0]
        remaining = remaining[row > gamma]
    return GammaNet(gamma=float(gamma), anchor_indices=tuple(anchors))


def assign_voronoi(points, net: GammaNet, space: MetricSpace, packed=None) -> VoronoiAssignment:
    """Map every point to its nearest anchor; ties to the lower anchor position."""
    n = len(points)
    if packed is None:
        packed = space.pack(points)
    anchor_rows = np.asarray(net.anchor_indices, dtype=np.int64)
    if anchor_rows.size == 0:
        raise ValueError("net has no anchors")
    pos, _ = space.nearest_among(packed, np.arange(n, dtype=np.int64), packed, anchor_rows)
    cells = [[] for _ in anchor_rows]
    for i, p in enumerate(pos):
        cells[int(p)].append(i)
    if any(len(c) == 0 for c in cells):
        raise AssertionError("empty Voronoi cell; net invariants violated")
    return VoronoiAssignment(cell_of=pos, cells=tuple(tuple(c) for c in cells))


def net_size_bound(diam: float, gamma: float, ddim: float) -> int:
    """Packing-style ceiling ``ceil(diam/gamma) ** ddim`` (diagnostic only)."""
    if diam <= 0 or gamma <= 0:
        raise ValueError("diameter and scale must be positive")
    if ddim < 0:
        raise ValueError("doubling dimension must be non-negative")
    return int(math.ceil(math.ceil(diam / gamma) ** ddim))
