"""Metric-space and labeled-sample primitives shared by every learner.

Points are plain objects: Euclidean points are 1-D numpy arrays (rows of an
(n, d) matrix), tree-space points are :class:`nearnet.preiss.SeqPoint`.
Labels are non-negative ints; the total order on ints is what every
lexicographic tie-break in the package refers to.

A :class:`MetricSpace` subclass must implement :meth:`MetricSpace.distance`.
The bulk hooks (``pack``, ``distance_block``, ``nearest_among``) have slow
reference implementations here; subclasses may override them for speed but
every override must reproduce the reference results exactly (same floats,
same tie behavior), because net construction and Voronoi assignment compare
distances with exact ``<=`` / ``>`` tests.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MetricCompatibilityError",
    "MetricSpace",
    "EuclideanSpace",
    "LabeledSample",
    "empirical_error",
    "load_sample_csv",
    "save_sample_csv",
]


class MetricCompatibilityError(TypeError):
    """A point of the wrong kind was handed to a metric."""


class MetricSpace:
    """Abstract metric. Instances are immutable and safe to share."""

    #: Optional prior on the doubling dimension; diagnostics only.
    ddim_hint: float | None = None

    def distance(self, x, y) -> float:
        raise NotImplementedError

    # ------------------------------------------------------------------
    # Bulk hooks. `packed` is an opaque preprocessed form of a fixed point
    # sequence; row indices below always refer to positions in that sequence.
    # ------------------------------------------------------------------

    def pack(self, points):
        """Preprocess a point sequence for the bulk operations below."""
        return list(points)

    def point_at(self, packed, i: int):
        return packed[i]

    def distance_block(self, packed_a, rows_a, packed_b, rows_b) -> np.ndarray:
        """Dense ``len(rows_a) x len(rows_b)`` distance matrix."""
        out = np.empty((len(rows_a), len(rows_b)))
        for r, i in enumerate(rows_a):
            xi = self.point_at(packed_a, int(i))
            for c, j in enumerate(rows_b):
                out[r, c] = self.distance(xi, self.point_at(packed_b, int(j)))
        return out

    def nearest_among(self, packed_q, rows_q, packed_t, rows_t):
        """Nearest target (by position in ``rows_t``) for each query row.

        Exact distance ties resolve to the lowest position in ``rows_t``.
        Returns ``(positions, distances)``.
        """
        rows_q = np.asarray(rows_q, dtype=np.int64)
        rows_t = np.asarray(rows_t, dtype=np.int64)
        pos = np.empty(len(rows_q), dtype=np.int64)
        dmin = np.empty(len(rows_q))
        chunk = max(1, int(2_000_000 // max(1, len(rows_t))))
        for s in range(0, len(rows_q), chunk):
            block = self.distance_block(packed_q, rows_q[s : s + chunk], packed_t, rows_t)
            pos[s : s + chunk] = np.argmin(block, axis=1)  # argmin takes the first minimum
            dmin[s : s + chunk] = block[np.arange(block.shape[0]), pos[s : s + chunk]]
        return pos, dmin


@dataclass(frozen=True)
class EuclideanSpace(MetricSpace):
    """Flat ``R^dim`` with the l2 metric; points are float vectors."""

    dim: int
    ddim_hint: float | None = None

    def _check(self, x) -> np.ndarray:
        try:
            arr = np.asarray(x, dtype=float)
        except (TypeError, ValueError) as exc:
            raise MetricCompatibilityError(f"not a real vector: {x!r}") from exc
        if arr.ndim != 1 or arr.shape[0] != self.dim:
            raise MetricCompatibilityError(
                f"expected a length-{self.dim} real vector, got {x!r}"
            )
        if not np.all(np.isfinite(arr)):
            raise MetricCompatibilityError(f"non-finite coordinates in {x!r}")
        return arr

    def distance(self, x, y) -> float:
        a, b = self._check(x), self._check(y)
        return float(np.sqrt(np.sum((a - b) ** 2)))

    def pack(self, points) -> np.ndarray:
        arr = np.ascontiguousarray(points, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise MetricCompatibilityError(
                f"expected an (n, {self.dim}) point array, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise MetricCompatibilityError("non-finite coordinates in point array")
        return arr

    def distance_block(self, packed_a, rows_a, packed_b, rows_b) -> np.ndarray:
        A = packed_a[np.asarray(rows_a, dtype=np.int64)]
        B = packed_b[np.asarray(rows_b, dtype=np.int64)]
        diff = A[:, None, :] - B[None, :, :]
        return np.sqrt(np.einsum("abk,abk->ab", diff, diff))

    def nearest_among(self, packed_q, rows_q, packed_t, rows_t):
        rows_q = np.asarray(rows_q, dtype=np.int64)
        rows_t = np.asarray(rows_t, dtype=np.int64)
        if self.dim == 1 and len(rows_t) >= 64:
            return self._nearest_sorted_1d(packed_q, rows_q, packed_t, rows_t)
        return super().nearest_among(packed_q, rows_q, packed_t, rows_t)

    def _nearest_sorted_1d(self, packed_q, rows_q, packed_t, rows_t):
        # Nearest neighbor on a line via one searchsorted; candidates are the
        # two target values bracketing the query. Equal-distance ties go to
        # the lower position, so each value is represented by the first
        # position carrying it (stable sort keeps positions ordered).
        tv = packed_t[rows_t, 0]
        order = np.argsort(tv, kind="stable")
        sv = tv[order]
        q = packed_q[rows_q, 0]
        right = np.searchsorted(sv, q)
        left = np.clip(right - 1, 0, len(sv) - 1)
        right = np.clip(right, 0, len(sv) - 1)
        dl = np.abs(q - sv[left])
        dr = np.abs(q - sv[right])
        pos_l = order[np.searchsorted(sv, sv[left], side="left")]
        pos_r = order[np.searchsorted(sv, sv[right], side="left")]
        take_left = (dl < dr) | ((dl == dr) & (pos_l <= pos_r))
        pos = np.where(take_left, pos_l, pos_r)
        dmin = np.where(take_left, dl, dr)
        return pos.astype(np.int64), dmin


@dataclass(frozen=True)
class LabeledSample:
    """An indexed sequence of (point, label) pairs.

    Position ``i`` is the sample identity ``i``; every index vector handed
    around by the learners refers to these positions. Immutable by
    convention: do not mutate ``points`` or ``labels`` after construction.
    """

    points: Sequence
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if len(self.points) != len(labels):
            raise ValueError(
                f"{len(self.points)} points but {len(labels)} labels"
            )
        if len(labels) < 1:
            raise ValueError("a labeled sample needs at least one example")
        if labels.min() < 0:
            raise ValueError("labels must be non-negative integers")

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


def empirical_error(predict: Callable, subset: LabeledSample) -> float:
    """Fraction of ``subset`` on which ``predict`` disagrees with the label."""
    if len(subset) == 0:
        raise ValueError("empirical error of an empty subset is undefined")
    wrong = sum(
        1 for i in range(len(subset)) if int(predict(subset.points[i])) != int(subset.labels[i])
    )
    return wrong / len(subset)


def load_sample_csv(path) -> tuple[LabeledSample, EuclideanSpace]:
    """Read ``x_1,...,x_d,label`` rows; the label is the last column."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if rows and len(row) != len(rows[0]) :
                raise ValueError(f"{path}:{lineno}: ragged row of width {len(row)}")
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: empty sample file")
    if len(rows[0]) < 2:
        raise ValueError(f"{path}: rows need at least one feature and a label")
    feats = np.array([[float(v) for v in row[:-1]] for row in rows])
    raw = [row[-1].strip() for row in rows]
    try:
        labels = np.array([int(v) for v in raw], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: labels must be integers") from exc
    sample = LabeledSample(points=feats, labels=labels)
    return sample, EuclideanSpace(dim=feats.shape[1])


def save_sample_csv(path, sample: LabeledSample) -> None:
    pts = np.asarray(sample.points, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for i in range(sample.n):
            w.writerow([repr(float(v)) for v in pts[i]] + [int(sample.labels[i])])
