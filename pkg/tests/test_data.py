"""Tests for point-cloud generation, initializations, and label tools."""

import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from eigenflow import (
    LabeledPointSet,
    Signal,
    cluster_from_function,
    clustering_accuracy,
    random_init,
    semi_supervised_init,
    three_moons,
    two_moons,
)


# ---------------------------------------------------------------------------
# LabeledPointSet


def test_point_set_validation():
    pts = np.zeros((4, 2))
    with pytest.raises(ValueError):
        LabeledPointSet(np.zeros((4, 3)), np.zeros(4, dtype=int), 0, 0.0)
    with pytest.raises(ValueError):
        LabeledPointSet(pts, np.zeros(3, dtype=int), 0, 0.0)
    with pytest.raises(ValueError):
        LabeledPointSet(pts, np.array([0, 0, 2, 2]), 0, 0.0)  # label 1 empty
    with pytest.raises(ValueError):
        LabeledPointSet(pts, np.array([-1, 0, 0, 0]), 0, 0.0)
    ok = LabeledPointSet(pts, np.array([0, 1, 1, 0]), 0, 0.0)
    assert ok.n == 4
    assert ok.n_clusters == 2


# ---------------------------------------------------------------------------
# moons


def test_two_moons_noiseless_arc_geometry():
    ps = two_moons(50, 0.0, seed=0)
    first, second = ps.points[:50], ps.points[50:]
    assert_allclose(np.hypot(first[:, 0], first[:, 1]), np.ones(50), atol=1e-12)
    assert np.all(first[:, 1] >= -1e-12)
    shifted = second - np.array([1.0, 0.5])
    assert_allclose(np.hypot(shifted[:, 0], shifted[:, 1]), np.ones(50), atol=1e-12)
    assert np.all(shifted[:, 1] <= 1e-12)


def test_two_moons_counts_and_labels():
    ps = two_moons(300, 0.015, seed=1)
    assert ps.points.shape == (600, 2)
    assert np.sum(ps.labels == 0) == 300
    assert np.sum(ps.labels == 1) == 300


def test_two_moons_deterministic_in_seed():
    a = two_moons(40, 0.02, seed=7)
    b = two_moons(40, 0.02, seed=7)
    c = two_moons(40, 0.02, seed=8)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_three_moons_balanced():
    ps = three_moons(250, 0.01, seed=2)
    assert ps.points.shape == (750, 2)
    for lab in range(3):
        assert np.sum(ps.labels == lab) == 250
    # third arc sits two units right of the first
    noiseless = three_moons(10, 0.0, seed=0)
    assert_allclose(
        noiseless.points[20:] - np.array([2.0, 0.0]),
        noiseless.points[:10],
        atol=1e-12,
    )


def test_moons_validation():
    with pytest.raises(ValueError):
        two_moons(0, 0.01)
    with pytest.raises(ValueError):
        two_moons(10, -0.1)


# ---------------------------------------------------------------------------
# initializations


def test_random_init_range_and_determinism():
    a = random_init(600, seed=4)
    b = random_init(600, seed=4)
    assert np.array_equal(a.values, b.values)
    assert a.values.min() >= -1.0
    assert a.values.max() <= 1.0
    assert np.unique(a.values).size > 500
    with pytest.raises(ValueError):
        random_init(0)


def test_semi_supervised_init_full_fraction():
    ps = two_moons(20, 0.01, seed=0)
    init = semi_supervised_init(ps, 1.0, seed=0)
    assert_allclose(np.unique(init.values), [-1.0, 1.0])
    assert_allclose(init.values[ps.labels == 0], np.full(20, -1.0))
    assert_allclose(init.values[ps.labels == 1], np.full(20, 1.0))


def test_semi_supervised_init_sparse_counts():
    ps = two_moons(300, 0.015, seed=0)
    init = semi_supervised_init(ps, 0.05, seed=3)
    marked = init.values != 0.0
    # ceil(0.05 * 300) = 15 per moon
    assert np.sum(marked & (ps.labels == 0)) == 15
    assert np.sum(marked & (ps.labels == 1)) == 15
    assert np.sum(~marked) == 570


def test_semi_supervised_init_three_cluster_codes():
    ps = three_moons(10, 0.0, seed=0)
    init = semi_supervised_init(ps, 1.0, seed=0)
    assert_allclose(np.unique(init.values), [-1.0, 0.0, 1.0])
    assert_allclose(init.values[ps.labels == 1], np.zeros(10))


def test_semi_supervised_init_validation():
    ps = two_moons(10, 0.0, seed=0)
    with pytest.raises(ValueError):
        semi_supervised_init(ps, 0.0)
    with pytest.raises(ValueError):
        semi_supervised_init(ps, 1.5)


# ---------------------------------------------------------------------------
# clustering from a vertex function


def test_cluster_sign_split():
    labels = cluster_from_function(Signal([5.0, 5.0, 7.0, 7.0]), 2)
    assert labels[0] == labels[1]
    assert labels[2] == labels[3]
    assert labels[0] != labels[2]


def test_cluster_invariant_under_positive_scaling():
    rng = np.random.default_rng(21)
    values = rng.standard_normal(40)
    base = cluster_from_function(Signal(values), 2)
    scaled = cluster_from_function(Signal(3.7 * values), 2)
    assert clustering_accuracy(base, scaled) == 1.0


def test_cluster_three_level_sets():
    values = np.concatenate([np.full(10, -2.0), np.zeros(10), np.full(10, 2.0)])
    labels = cluster_from_function(Signal(values), 3, seed=0)
    truth = np.repeat([0, 1, 2], 10)
    assert clustering_accuracy(labels, truth) == 1.0


def test_cluster_kmeans_separates_noisy_levels():
    rng = np.random.default_rng(22)
    truth = np.repeat([0, 1, 2], 30)
    values = np.array([-3.0, 0.1, 3.2])[truth] + 0.05 * rng.standard_normal(90)
    labels = cluster_from_function(Signal(values), 3, seed=1)
    assert clustering_accuracy(labels, truth) == 1.0


def test_cluster_degenerate_values_warn():
    with pytest.warns(UserWarning):
        labels = cluster_from_function(Signal(np.ones(6)), 2)
    assert labels.shape == (6,)


def test_cluster_validation():
    with pytest.raises(ValueError):
        cluster_from_function(Signal([1.0, 2.0]), 1)


# ---------------------------------------------------------------------------
# accuracy


def test_accuracy_examples():
    assert clustering_accuracy([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    assert clustering_accuracy([1, 1, 0, 0], [0, 0, 1, 1]) == 1.0  # relabeled
    # one flipped point out of ten
    a = clustering_accuracy([0, 0, 0, 0, 0, 1, 1, 1, 1, 0], np.repeat([0, 1], 5))
    assert a == pytest.approx(0.9)


def test_accuracy_hungarian_matching_beats_greedy():
    # greedy per-label matching would collapse both predictions onto
    # truth label 0; the assignment solver keeps them apart
    pred = [0, 0, 1, 1, 1]
    truth = [0, 1, 0, 0, 1]
    assert clustering_accuracy(pred, truth) == pytest.approx(0.6)


def test_accuracy_label_sets_may_differ_in_size():
    assert clustering_accuracy([0, 0, 0, 0], [0, 1, 0, 1]) == pytest.approx(0.5)
    assert clustering_accuracy([0, 1, 2, 3], [0, 0, 1, 1]) == pytest.approx(0.5)


def test_accuracy_validation():
    with pytest.raises(ValueError):
        clustering_accuracy([0, 1], [0, 1, 1])
    with pytest.raises(ValueError):
        clustering_accuracy([], [])
    with pytest.raises(ValueError):
        clustering_accuracy(np.zeros((2, 2), dtype=int), np.zeros((2, 2), dtype=int))


def test_accuracy_relabel_invariance_property():
    rng = np.random.default_rng(25)
    for _ in range(20):
        n = int(rng.integers(2, 40))
        k = int(rng.integers(1, 5))
        pred = rng.integers(0, k, n)
        truth = rng.integers(0, k, n)
        base = clustering_accuracy(pred, truth)
        perm = rng.permutation(k)
        assert clustering_accuracy(perm[pred], truth) == pytest.approx(base)
        assert clustering_accuracy(pred, perm[truth]) == pytest.approx(base)
