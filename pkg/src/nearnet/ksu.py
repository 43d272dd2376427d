"""Net-compressed 1-NN learning with bound-minimizing scale selection.

For every candidate scale gamma the learner builds the greedy gamma-net of
the sample, relabels each net anchor with the empirical majority label of
its Voronoi cell, measures the empirical error alpha(gamma) of the induced
1-NN classifier on the full sample (anchors included), and scores the scale
with the compression bound Q(n, alpha(gamma), 2*kappa(gamma), delta). The
returned classifier keeps the anchors of the Q-minimizing scale; ties go to
the largest scale, which favors smaller nets.

Candidate scales are either every distinct nonzero pairwise distance
(exact, O(n^2) work) or a geometric grid between the smallest nonzero
distance and the diameter. The grid is an engineering shortcut for large
samples and is recorded in the classifier metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import DEFAULT_PARAMS, BoundParams, q_value
from .metric import EuclideanSpace, LabeledSample, MetricSpace
from .nets import VoronoiAssignment, assign_voronoi, build_net
from .preiss import PreissParams, PreissSpace, point_from_json, point_to_json

__all__ = [
    "ScalePolicy",
    "ScaleDiagnostics",
    "CompressedClassifier",
    "candidate_scales",
    "majority_relabel",
    "fit",
    "predict",
    "predict_many",
    "verify_compression",
    "CompressionWitness",
    "save_model",
    "load_model",
]

FULL_POLICY_DEFAULT_LIMIT = 500


@dataclass(frozen=True)
class ScalePolicy:
    """``full`` enumerates all distinct pairwise distances; ``geometric``
    walks ratio powers from the smallest nonzero distance to the diameter;
    ``auto`` picks full for small samples and geometric(2) beyond."""

    kind: str = "auto"
    ratio: float = 2.0

    def __post_init__(self):
        if self.kind not in ("auto", "full", "geometric"):
            raise ValueError(f"unknown scale policy {self.kind!r}")
        if self.kind == "geometric" and not self.ratio > 1:
            raise ValueError("geometric ratio must exceed 1")

    @classmethod
    def full(cls) -> "ScalePolicy":
        return cls(kind="full")

    @classmethod
    def geometric(cls, ratio: float = 2.0) -> "ScalePolicy":
        return cls(kind="geometric", ratio=ratio)

    @classmethod
    def parse(cls, text: str) -> "ScalePolicy":
        if text == "auto":
            return cls()
        if text == "full":
            return cls.full()
        if text.startswith("geo:"):
            return cls.geometric(float(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse scale policy {text!r}; use full, auto, or geo:<ratio>")

    def resolved_kind(self, n: int) -> str:
        if self.kind == "auto":
            return "full" if n <= FULL_POLICY_DEFAULT_LIMIT else "geometric"
        return self.kind

    def describe(self, n: int) -> str:
        kind = self.resolved_kind(n)
        return kind if kind == "full" else f"geometric({self.ratio:g})"


def _pairwise_extremes(points, space, packed, want_all: bool):
    """Scan all pairs; return (min_nonzero, max, sorted distinct nonzero or None)."""
    n = len(points)
    rows = np.arange(n, dtype=np.int64)
    dmin, dmax = np.inf, 0.0
    uniq: set[float] | None = set() if want_all else None
    chunk = max(1, int(4_000_000 // max(1, n)))
    for s in range(0, n, chunk):
        block = space.distance_block(packed, rows[s : s + chunk], packed, rows)
        nz = block[block > 0.0]
        if nz.size:
            dmin = min(dmin, float(nz.min()))
            dmax = max(dmax, float(block.max()))
            if uniq is not None:
                uniq.update(np.unique(nz).tolist())
        else:
            dmax = max(dmax, float(block.max()))
    if uniq is not None:
        return dmin, dmax, sorted(uniq)
    return dmin, dmax, None


def candidate_scales(points, space: MetricSpace, policy: ScalePolicy, packed=None) -> list[float]:
    """Ascending candidate scales; empty iff all points coincide."""
    n = len(points)
    if n < 1:
        raise ValueError("need at least one point")
    if packed is None:
        packed = space.pack(points)
    kind = policy.resolved_kind(n)
    if kind == "full":
        _, _, uniq = _pairwise_extremes(points, space, packed, want_all=True)
        return uniq or []
    dmin, dmax, _ = _pairwise_extremes(points, space, packed, want_all=False)
    if not np.isfinite(dmin):
        return []
    scales = []
    g = dmin
    while g < dmax:
        scales.append(g)
        g *= policy.ratio
    scales.append(dmax)
    return scales


def majority_relabel(sample: LabeledSample, assignment: VoronoiAssignment) -> np.ndarray:
    """Per-cell empirical majority label; count ties go to the smallest label."""
    labels = sample.labels
    out = np.empty(len(assignment.cells), dtype=np.int64)
    for c, members in enumerate(assignment.cells):
        if not members:
            raise ValueError(f"cell {c} is empty; nets never produce empty cells")
        counts = np.bincount(labels[list(members)])
        out[c] = int(np.argmax(counts))  # argmax takes the first max: smallest label
    return out


@dataclass(frozen=True)
class ScaleDiagnostics:
    gamma: float
    kappa: int
    alpha: float
    q_value: float


@dataclass(frozen=True)
class CompressedClassifier:
    """A 1-NN classifier over majority-relabeled net anchors, plus the
    selected-scale diagnostics and the whole per-scale trace."""

    anchor_indices: tuple[int, ...]
    anchor_points: Sequence
    anchor_labels: np.ndarray = field(repr=False)
    gamma_star: float
    alpha_star: float
    kappa_star: int
    q_star: float
    per_scale: tuple[ScaleDiagnostics, ...]
    delta: float
    params: BoundParams
    scale_policy: str

    @property
    def anchors(self) -> list[tuple]:
        return [(p, int(l)) for p, l in zip(self.anchor_points, self.anchor_labels)]


def fit(
    sample: LabeledSample,
    space: MetricSpace,
    delta: float,
    params: BoundParams = DEFAULT_PARAMS,
    policy: ScalePolicy = ScalePolicy(),
) -> CompressedClassifier:
    n = sample.n
    packed = space.pack(sample.points)
    scales = candidate_scales(sample.points, space, policy, packed=packed)
    policy_name = policy.describe(n)
    if not scales:
        return _degenerate_classifier(sample, delta, params, policy_name)

    per_scale = []
    best = None  # (q, gamma, net, relabeled, alpha)
    for gamma in scales:
        net = build_net(sample.points, gamma, space, packed=packed)
        assignment = assign_voronoi(sample.points, net, space, packed=packed)
        relabeled = majority_relabel(sample, assignment)
        alpha = float(np.mean(relabeled[assignment.cell_of] != sample.labels))
        # The bound is undefined once the charged compression size reaches n;
        # such scales only win when nothing better exists.
        q = q_value(n, alpha, 2 * net.kappa, delta, params) if 2 * net.kappa < n else float("inf")
        per_scale.append(ScaleDiagnostics(gamma=float(gamma), kappa=net.kappa, alpha=alpha, q_value=q))
        if best is None or q <= best[0]:  # <= so equal Q prefers the larger scale
            best = (q, float(gamma), net, relabeled, alpha)

    q_star, gamma_star, net, relabeled, alpha_star = best
    idx = net.anchor_indices
    return CompressedClassifier(
        anchor_indices=idx,
        anchor_points=[sample.points[i] for i in idx],
        anchor_labels=relabeled.copy(),
        gamma_star=gamma_star,
        alpha_star=alpha_star,
        kappa_star=net.kappa,
        q_star=q_star,
        per_scale=tuple(per_scale),
        delta=float(delta),
        params=params,
        scale_policy=policy_name,
    )


def _degenerate_classifier(sample, delta, params, policy_name) -> CompressedClassifier:
    # All points coincide: a single anchor with the majority label.
    counts = np.bincount(sample.labels)
    label = int(np.argmax(counts))
    alpha = float(np.mean(sample.labels != label))
    q = q_value(sample.n, alpha, 2, delta, params) if sample.n > 2 else float("inf")
    return CompressedClassifier(
        anchor_indices=(0,),
        anchor_points=[sample.points[0]],
        anchor_labels=np.array([label], dtype=np.int64),
        gamma_star=0.0,
        alpha_star=alpha,
        kappa_star=1,
        q_star=q,
        per_scale=(),
        delta=float(delta),
        params=params,
        scale_policy=policy_name,
    )


def predict(clf: CompressedClassifier, x, space: MetricSpace) -> int:
    """Label of the nearest anchor; exact ties go to the lower anchor position."""
    best_pos, best_d = 0, None
    for pos, p in enumerate(clf.anchor_points):
        d = space.distance(x, p)
        if best_d is None or d < best_d:
            best_pos, best_d = pos, d
    return int(clf.anchor_labels[best_pos])


def predict_many(clf: CompressedClassifier, points, space: MetricSpace) -> np.ndarray:
    packed_q = space.pack(points)
    packed_a = space.pack(clf.anchor_points)
    pos, _ = space.nearest_among(
        packed_q,
        np.arange(len(points), dtype=np.int64),
        packed_a,
        np.arange(len(clf.anchor_points), dtype=np.int64),
    )
    return clf.anchor_labels[pos]


@dataclass(frozen=True)
class CompressionWitness:
    ok: bool
    point_indices: tuple[int, ...] | None
    label_indices: tuple[int, ...] | None
    failure: str | None = None


def verify_compression(
    sample: LabeledSample, clf: CompressedClassifier, space: MetricSpace
) -> CompressionWitness:
    """Check the classifier is reconstructible from sample indices alone:
    every anchor point occurs in the sample, and every anchor's Voronoi cell
    holds a sample point carrying the anchor's label. Returns the two index
    vectors on success, the offending anchor on failure."""
    packed_s = space.pack(sample.points)
    packed_a = space.pack(clf.anchor_points)
    n, ka = sample.n, len(clf.anchor_points)
    all_rows = np.arange(n, dtype=np.int64)
    a_rows = np.arange(ka, dtype=np.int64)
    block = space.distance_block(packed_a, a_rows, packed_s, all_rows)
    point_idx = []
    for a in range(ka):
        hits = np.nonzero(block[a] == 0.0)[0]
        if hits.size == 0:
            return CompressionWitness(False, None, None, f"anchor {a} matches no sample point")
        point_idx.append(int(hits[0]))
    pos, _ = space.nearest_among(packed_s, all_rows, packed_a, a_rows)
    label_idx = []
    for a in range(ka):
        members = np.nonzero(pos == a)[0]
        match = members[sample.labels[members] == int(clf.anchor_labels[a])]
        if match.size == 0:
            return CompressionWitness(
                False, None, None,
                f"anchor {a} has label {int(clf.anchor_labels[a])} but no cell member carries it",
            )
        label_idx.append(int(match[0]))
    return CompressionWitness(True, tuple(point_idx), tuple(label_idx))


# ----------------------------------------------------------------------
# Model serialization
# ----------------------------------------------------------------------


def save_model(path, clf: CompressedClassifier, space: MetricSpace) -> None:
    if isinstance(space, EuclideanSpace):
        space_obj = {"kind": "euclidean", "dim": space.dim}
        pts = [list(map(float, p)) for p in clf.anchor_points]
    elif isinstance(space, PreissSpace):
        space_obj = {
            "kind": "preiss",
            "alpha": float(space.params.alpha),
            "depth_cap": space.params.depth_cap,
        }
        pts = [point_to_json(p) for p in clf.anchor_points]
    else:
        raise TypeError(f"cannot serialize models over {type(space).__name__}")
    obj = {
        "space": space_obj,
        "anchors": [
            {"point": p, "label": int(l)} for p, l in zip(pts, clf.anchor_labels)
        ],
        "anchor_indices": list(clf.anchor_indices),
        "gamma_star": clf.gamma_star,
        "alpha_star": clf.alpha_star,
        "kappa_star": clf.kappa_star,
        "q_star": clf.q_star,
        "delta": clf.delta,
        "bound_params": {"c_linear": clf.params.c_linear, "c_sqrt": clf.params.c_sqrt},
        "scale_policy": clf.scale_policy,
        "per_scale": [
            {"gamma": s.gamma, "kappa": s.kappa, "alpha": s.alpha, "q": s.q_value}
            for s in clf.per_scale
        ],
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)


def load_model(path) -> tuple[CompressedClassifier, MetricSpace]:
    with open(path) as fh:
        obj = json.load(fh)
    sp = obj["space"]
    if sp["kind"] == "euclidean":
        space: MetricSpace = EuclideanSpace(dim=int(sp["dim"]))
        points = [np.asarray(a["point"], dtype=float) for a in obj["anchors"]]
    elif sp["kind"] == "preiss":
        space = PreissSpace(PreissParams(alpha=sp["alpha"], depth_cap=int(sp["depth_cap"])))
        points = [point_from_json(a["point"], depth_cap=int(sp["depth_cap"])) for a in obj["anchors"]]
    else:
        raise ValueError(f"unknown space kind {sp['kind']!r}")
    labels = np.array([int(a["label"]) for a in obj["anchors"]], dtype=np.int64)
    clf = CompressedClassifier(
        anchor_indices=tuple(int(i) for i in obj["anchor_indices"]),
        anchor_points=points,
        anchor_labels=labels,
        gamma_star=float(obj["gamma_star"]),
        alpha_star=float(obj["alpha_star"]),
        kappa_star=int(obj["kappa_star"]),
        q_star=float(obj["q_star"]),
        per_scale=tuple(
            ScaleDiagnostics(s["gamma"], s["kappa"], s["alpha"], s["q"])
            for s in obj["per_scale"]
        ),
        delta=float(obj["delta"]),
        params=BoundParams(**obj["bound_params"]),
        scale_policy=obj["scale_policy"],
    )
    return clf, space
