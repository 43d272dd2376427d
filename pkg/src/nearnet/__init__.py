"""Metric-space nearest-neighbor learning toolkit.

Pieces: a compressed 1-NN learner that picks its net scale by minimizing a
sample-compression generalization bound, a classical k-NN baseline, and an
exact rational oracle for an infinite-dimensional tree space on which the
two learners behave very differently.
"""

from .bounds import BoundParams, BoundInput, delta_schedule, property3_gap, q_bound, q_value
from .knn import KnnModel, default_k_schedule, knn_predict, knn_predict_many
from .ksu import (
    CompressedClassifier,
    ScalePolicy,
    candidate_scales,
    fit,
    majority_relabel,
    predict,
    predict_many,
    verify_compression,
)
from .metric import (
    EuclideanSpace,
    LabeledSample,
    MetricCompatibilityError,
    MetricSpace,
    empirical_error,
    load_sample_csv,
)
from .nets import GammaNet, VoronoiAssignment, assign_voronoi, build_net, net_size_bound
from .preiss import (
    DepthCapError,
    PreissParams,
    PreissSpace,
    SeqPoint,
    SubtreeId,
    branching,
    gamma_level,
    preiss_distance,
    sample_labeled_point,
    sample_preiss,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
