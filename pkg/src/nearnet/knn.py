"""Classical k-NN over a stored sample, with deterministic tie-breaking.

Neighbor selection sorts by (distance, sample index), so equal distances at
the k-th slot admit the lower index; vote ties go to the smaller label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metric import LabeledSample, MetricSpace

__all__ = ["KnnModel", "default_k_schedule", "knn_predict", "knn_predict_many"]


@dataclass(frozen=True)
class KnnModel:
    sample: LabeledSample
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.sample.n:
            raise ValueError(f"k={self.k} outside [1, {self.sample.n}]")


def default_k_schedule(n: int) -> int:
    """``ceil(sqrt(n))`` clamped to [1, n]."""
    if n < 1:
        raise ValueError("sample size must be at least 1")
    return max(1, min(n, math.isqrt(n - 1) + 1))


def _vote(labels: np.ndarray) -> int:
    counts = np.bincount(labels)
    return int(np.argmax(counts))  # first max: smallest label wins ties


def _neighbors_from_row(dist_row: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest by (distance, index)."""
    n = dist_row.shape[0]
    if k >= n:
        return np.arange(n, dtype=np.int64)
    kth = np.partition(dist_row, k - 1)[k - 1]
    closer = np.nonzero(dist_row < kth)[0]
    at_kth = np.nonzero(dist_row == kth)[0]
    take = k - closer.size
    return np.concatenate([closer, at_kth[:take]]).astype(np.int64)


def knn_predict(model: KnnModel, x, space: MetricSpace) -> int:
    packed = space.pack(model.sample.points)
    qp = space.pack([x])
    row = space.distance_block(
        qp, np.array([0], dtype=np.int64), packed, np.arange(model.sample.n, dtype=np.int64)
    )[0]
    nbrs = _neighbors_from_row(row, model.k)
    return _vote(model.sample.labels[nbrs])


def knn_predict_many(model: KnnModel, points, space: MetricSpace, chunk: int = 256) -> np.ndarray:
    packed_t = space.pack(model.sample.points)
    packed_q = space.pack(points)
    n_t = model.sample.n
    t_rows = np.arange(n_t, dtype=np.int64)
    out = np.empty(len(points), dtype=np.int64)
    for s in range(0, len(points), chunk):
        rows = np.arange(s, min(s + chunk, len(points)), dtype=np.int64)
        block = space.distance_block(packed_q, rows, packed_t, t_rows)
        for r in range(block.shape[0]):
            nbrs = _neighbors_from_row(block[r], model.k)
            out[s + r] = _vote(model.sample.labels[nbrs])
    return out
