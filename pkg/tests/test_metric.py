import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearnet import (
    EuclideanSpace,
    LabeledSample,
    MetricCompatibilityError,
    empirical_error,
    load_sample_csv,
)
from nearnet.metric import MetricSpace, save_sample_csv


def test_euclidean_distance_examples(plane):
    assert plane.distance(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 5.0
    one = EuclideanSpace(dim=2)
    assert one.distance(np.array([1.0, 0.0]), np.array([0.0, 0.0])) == 1.0
    x = np.array([0.3, 0.7])
    assert plane.distance(x, x) == 0.0


def test_incompatible_points_rejected(plane):
    with pytest.raises(MetricCompatibilityError):
        plane.distance(np.array([1.0]), np.array([0.0, 0.0]))
    with pytest.raises(MetricCompatibilityError):
        plane.distance("not a point", np.array([0.0, 0.0]))
    with pytest.raises(MetricCompatibilityError):
        plane.distance(np.array([np.nan, 0.0]), np.array([0.0, 0.0]))
    with pytest.raises(MetricCompatibilityError):
        plane.pack(np.zeros((3, 5)))


@settings(max_examples=200)
@given(
    st.lists(
        st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)),
        min_size=3,
        max_size=3,
    )
)
def test_euclidean_metric_axioms(coords):
    space = EuclideanSpace(dim=3)
    x, y, z = (np.array(c) for c in coords)
    dxy = space.distance(x, y)
    assert dxy == space.distance(y, x)
    assert dxy >= 0.0
    scale = max(1.0, space.distance(x, z), dxy, space.distance(y, z))
    assert space.distance(x, z) <= dxy + space.distance(y, z) + 1e-12 * scale


def test_euclidean_axioms_bulk(rng):
    # 10^4 random triples, vectorized: symmetry exact, triangle within
    # 1e-12 relative slack.
    pts = rng.normal(size=(30000, 2)).reshape(10000, 3, 2)
    d = lambda a, b: np.sqrt(((a - b) ** 2).sum(axis=1))
    dxy, dyz, dxz = d(pts[:, 0], pts[:, 1]), d(pts[:, 1], pts[:, 2]), d(pts[:, 0], pts[:, 2])
    dyx = d(pts[:, 1], pts[:, 0])
    assert np.array_equal(dxy, dyx)
    scale = np.maximum(1.0, np.maximum(dxz, dxy + dyz))
    assert np.all(dxz <= dxy + dyz + 1e-12 * scale)


def test_labeled_sample_validation():
    with pytest.raises(ValueError):
        LabeledSample(points=np.zeros((2, 1)), labels=[0])
    with pytest.raises(ValueError):
        LabeledSample(points=np.zeros((0, 1)), labels=[])
    with pytest.raises(ValueError):
        LabeledSample(points=np.zeros((1, 1)), labels=[-1])
    s = LabeledSample(points=np.zeros((3, 1)), labels=[0, 1, 2])
    assert s.n == len(s) == 3


def test_empirical_error_examples(line):
    all_zero = LabeledSample(points=np.zeros((3, 1)), labels=[0, 0, 0])
    assert empirical_error(lambda x: 0, all_zero) == 0.0
    mixed = LabeledSample(points=np.zeros((3, 1)), labels=[0, 1, 1])
    assert empirical_error(lambda x: 0, mixed) == pytest.approx(2 / 3)


def test_empirical_error_perfect_one_nn(line, rng):
    # 1-NN evaluated on its own training set with distinct points is exact.
    pts = np.sort(rng.random(20))[:, None]
    labels = rng.integers(0, 2, size=20)
    sample = LabeledSample(points=pts, labels=labels)

    def one_nn(x):
        d = np.abs(pts[:, 0] - x[0])
        return int(labels[np.argmin(d)])

    assert empirical_error(one_nn, sample) == 0.0


def test_empirical_error_matches_recount(rng, line):
    sample = LabeledSample(points=rng.random((50, 1)), labels=rng.integers(0, 3, 50))
    pred = lambda x: int(x[0] * 3) % 3
    manual = np.mean([pred(sample.points[i]) != sample.labels[i] for i in range(50)])
    assert empirical_error(pred, sample) == pytest.approx(manual)
    assert 0.0 <= empirical_error(pred, sample) <= 1.0


def test_csv_round_trip(tmp_path, rng):
    sample = LabeledSample(points=rng.random((12, 3)), labels=rng.integers(0, 4, 12))
    path = tmp_path / "sample.csv"
    save_sample_csv(path, sample)
    loaded, space = load_sample_csv(path)
    assert space.dim == 3
    assert np.array_equal(loaded.labels, sample.labels)
    assert np.allclose(np.asarray(loaded.points), np.asarray(sample.points))


def test_csv_rejects_ragged_and_bad_labels(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,2.0,0\n1.0,1\n")
    with pytest.raises(ValueError):
        load_sample_csv(bad)
    bad.write_text("1.0,2.0,zebra\n")
    with pytest.raises(ValueError):
        load_sample_csv(bad)
    bad.write_text("")
    with pytest.raises(ValueError):
        load_sample_csv(bad)


def test_nearest_among_fast_path_matches_reference(rng):
    # Duplicated 1-d values force distance ties; the sorted fast path must
    # agree with the generic argmin reference, which encodes the tie rule.
    space = EuclideanSpace(dim=1)
    targets = rng.integers(0, 12, size=200)[:, None] / 12.0
    queries = rng.integers(0, 24, size=500)[:, None] / 24.0
    pt, pq = space.pack(targets), space.pack(queries)
    rows_q = np.arange(len(queries))
    rows_t = np.arange(len(targets))
    fast_pos, fast_d = space.nearest_among(pq, rows_q, pt, rows_t)
    ref_pos, ref_d = MetricSpace.nearest_among(space, pq, rows_q, pt, rows_t)
    assert np.array_equal(fast_pos, ref_pos)
    assert np.array_equal(fast_d, ref_d)
