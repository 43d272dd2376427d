import numpy as np
import pytest

from nearnet import LabeledSample
from nearnet.knn import KnnModel, default_k_schedule, knn_predict, knn_predict_many

from conftest import random_plane_sample


def line_sample(xs, labels):
    return LabeledSample(points=np.array(xs, dtype=float)[:, None], labels=labels)


def test_k_schedule_examples():
    assert default_k_schedule(100) == 10
    assert default_k_schedule(1) == 1
    assert default_k_schedule(10**6) == 1000
    assert default_k_schedule(2) == 2  # ceil(sqrt(2)) = 2, still <= n
    with pytest.raises(ValueError):
        default_k_schedule(0)


def test_model_validation(line):
    sample = line_sample([0, 1], [0, 1])
    with pytest.raises(ValueError):
        KnnModel(sample=sample, k=0)
    with pytest.raises(ValueError):
        KnnModel(sample=sample, k=3)


def test_k1_returns_training_label(line):
    sample = line_sample([0, 1, 2], [2, 0, 1])
    model = KnnModel(sample=sample, k=1)
    for i in range(3):
        assert knn_predict(model, sample.points[i], line) == sample.labels[i]


def test_k_equals_n_is_global_majority(line):
    sample = line_sample([0, 1, 2, 3, 4], [1, 1, 0, 0, 0])
    model = KnnModel(sample=sample, k=5)
    assert knn_predict(model, np.array([100.0]), line) == 0
    balanced = line_sample([0, 1, 2, 3], [1, 1, 0, 0])
    model = KnnModel(sample=balanced, k=4)
    assert knn_predict(model, np.array([0.0]), line) == 0  # vote tie -> smaller label


def test_majority_of_three(line):
    sample = line_sample([0, 1, 2, 50], [1, 1, 0, 0])
    model = KnnModel(sample=sample, k=3)
    assert knn_predict(model, np.array([0.5]), line) == 1


def test_distance_ties_resolve_to_lower_index(line):
    # three coincident points at distance 1; k=2 must take indices 0 and 1
    sample = line_sample([1.0, 1.0, 1.0, 0.0], [0, 0, 1, 1])
    model = KnnModel(sample=sample, k=2)
    assert knn_predict(model, np.array([2.0]), line) == 0
    # flip the coincident labels: now indices 0,1 vote 1
    sample2 = line_sample([1.0, 1.0, 1.0, 0.0], [1, 1, 0, 0])
    model2 = KnnModel(sample=sample2, k=2)
    assert knn_predict(model2, np.array([2.0]), line) == 1


def test_prediction_label_among_neighbors(rng, plane):
    sample = random_plane_sample(rng, 40, n_labels=4)
    model = KnnModel(sample=sample, k=5)
    for _ in range(30):
        q = rng.random(2)
        got = knn_predict(model, q, plane)
        d = np.array([plane.distance(q, p) for p in sample.points])
        order = np.lexsort((np.arange(len(d)), d))
        assert got in set(sample.labels[order[:5]].tolist())


def test_bulk_matches_single(rng, plane):
    sample = random_plane_sample(rng, 60, n_labels=3)
    model = KnnModel(sample=sample, k=7)
    queries = rng.integers(0, 8, size=(50, 2)) / 8.0
    bulk = knn_predict_many(model, queries, plane, chunk=16)
    single = [knn_predict(model, q, plane) for q in queries]
    assert list(bulk) == single
