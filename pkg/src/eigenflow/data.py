"""Synthetic point clouds, flow initializations, and cluster scoring.

The moon generators place points on interleaved half-circle arcs and
add isotropic Gaussian noise; they are pure functions of their counts,
noise variance, and seed.  Cluster extraction turns a real-valued
vertex function into labels (sign split for two clusters, 1D k-means
otherwise), and accuracy compares labelings up to relabeling.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .functional import Signal

__all__ = [
    "LabeledPointSet",
    "two_moons",
    "three_moons",
    "random_init",
    "semi_supervised_init",
    "cluster_from_function",
    "clustering_accuracy",
]


@dataclass(frozen=True)
class LabeledPointSet:
    """2D points with ground-truth cluster labels.

    Attributes
    ----------
    points : ndarray, shape (n, 2)
        Point coordinates.
    labels : ndarray, shape (n,)
        Cluster id per point, in ``{0, ..., K-1}`` with every cluster
        non-empty.
    seed : int
        RNG seed the set was generated with.
    noise_var : float
        Variance of the isotropic Gaussian noise added to the points.
    """

    points: np.ndarray
    labels: np.ndarray
    seed: int
    noise_var: float

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        lab = np.array(self.labels, dtype=np.int64, copy=True)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
        if lab.shape != (pts.shape[0],):
            raise ValueError("labels must align with points")
        k = lab.max(initial=-1) + 1
        if k < 1 or not np.array_equal(np.unique(lab), np.arange(k)):
            raise ValueError(
                "labels must cover {0, ..., K-1} with every cluster non-empty"
            )
        pts.flags.writeable = False
        lab.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1


def _moon_points(n_per_moon: int, arcs, noise_var: float, seed: int):
    if n_per_moon < 1:
        raise ValueError("n_per_moon must be at least 1")
    if noise_var < 0:
        raise ValueError("noise_var must be nonnegative")
    theta = np.linspace(0.0, np.pi, n_per_moon)
    chunks = []
    for x_off, y_off, flip in arcs:
        x = x_off + np.cos(theta)
        y = y_off + (-np.sin(theta) if flip else np.sin(theta))
        chunks.append(np.column_stack([x, y]))
    points = np.concatenate(chunks)
    rng = np.random.default_rng(seed)
    points = points + rng.normal(0.0, math.sqrt(noise_var), points.shape)
    labels = np.repeat(np.arange(len(arcs)), n_per_moon)
    return points, labels


def two_moons(
    n_per_moon: int = 300, noise_var: float = 0.015, seed: int = 0
) -> LabeledPointSet:
    """Two interleaved noisy half-circles.

    The first arc is the upper unit half-circle; the second is the
    first shifted by ``(1, -0.5)`` and reflected about the x-axis, so
    the two hooks interlock.

    Parameters
    ----------
    n_per_moon : int
        Points per arc.
    noise_var : float
        Variance of the added isotropic Gaussian noise.
    seed : int
        RNG seed; the output is a pure function of all arguments.

    Returns
    -------
    LabeledPointSet
    """
    arcs = [(0.0, 0.0, False), (1.0, 0.5, True)]
    points, labels = _moon_points(n_per_moon, arcs, noise_var, seed)
    return LabeledPointSet(points, labels, seed=seed, noise_var=noise_var)


def three_moons(
    n_per_moon: int = 250, noise_var: float = 0.015, seed: int = 0
) -> LabeledPointSet:
    """Three interleaved noisy half-circles.

    The two-moon pair plus a third upper arc shifted right by 2, so
    the middle (reflected) moon interlocks with both neighbors.

    Parameters
    ----------
    n_per_moon : int
        Points per arc.
    noise_var : float
        Variance of the added isotropic Gaussian noise.
    seed : int
        RNG seed.

    Returns
    -------
    LabeledPointSet
    """
    arcs = [(0.0, 0.0, False), (1.0, 0.5, True), (2.0, 0.0, False)]
    points, labels = _moon_points(n_per_moon, arcs, noise_var, seed)
    return LabeledPointSet(points, labels, seed=seed, noise_var=noise_var)


def random_init(n: int, seed: int = 0) -> Signal:
    """I.i.d. uniform values on ``[-1, 1]`` for unsupervised flow runs.

    The flow null-projects its datum itself, so the raw draw is
    returned unchanged.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return Signal(rng.uniform(-1.0, 1.0, n))


def semi_supervised_init(
    ps: LabeledPointSet, fraction: float, seed: int = 0
) -> Signal:
    """Sparse cluster-coded initialization for a steered flow.

    Marks ``ceil(fraction * n_c)`` randomly chosen vertices of each
    cluster ``c`` with that cluster's code value and leaves the rest at
    zero.  Codes are ``-1, +1`` for two clusters and equispaced in
    ``[-1, 1]`` for more.  The result is returned raw; the flow
    null-projects it before stepping.

    Parameters
    ----------
    ps : LabeledPointSet
        Point set supplying cluster sizes and membership.
    fraction : float
        Fraction of each cluster to mark, in ``(0, 1]``.
    seed : int
        RNG seed for the per-cluster choices.

    Returns
    -------
    Signal
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    k = ps.n_clusters
    codes = np.linspace(-1.0, 1.0, k)
    rng = np.random.default_rng(seed)
    values = np.zeros(ps.n)
    for c in range(k):
        members = np.flatnonzero(ps.labels == c)
        count = math.ceil(fraction * members.size)
        chosen = rng.choice(members, size=count, replace=False)
        values[chosen] = codes[c]
    return Signal(values)


def _kmeans_plus_plus_1d(values: np.ndarray, k: int, rng) -> np.ndarray:
    """Seed centers by sampling proportionally to squared distance."""
    centers = np.empty(k)
    centers[0] = values[rng.integers(values.size)]
    dist_sq = (values - centers[0]) ** 2
    for j in range(1, k):
        total = dist_sq.sum()
        if total == 0.0:
            centers[j:] = values[rng.integers(values.size, size=k - j)]
            break
        probs = dist_sq / total
        centers[j] = values[rng.choice(values.size, p=probs)]
        dist_sq = np.minimum(dist_sq, (values - centers[j]) ** 2)
    return centers


def _kmeans_1d(
    values: np.ndarray, k: int, rng, restarts: int, max_iters: int = 100
):
    best_labels = None
    best_wcss = np.inf
    for _ in range(restarts):
        centers = _kmeans_plus_plus_1d(values, k, rng)
        labels = np.abs(values[:, None] - centers[None, :]).argmin(axis=1)
        for _ in range(max_iters):
            for j in range(k):
                mask = labels == j
                if mask.any():
                    centers[j] = values[mask].mean()
            new_labels = np.abs(values[:, None] - centers[None, :]).argmin(
                axis=1
            )
            if np.array_equal(new_labels, labels):
                break
            labels = new_labels
        wcss = float(np.sum((values - centers[labels]) ** 2))
        if wcss < best_wcss:
            best_wcss = wcss
            best_labels = labels
    return best_labels


def cluster_from_function(f: Signal, k: int = 2, seed: int = 0) -> np.ndarray:
    """Split a vertex function into ``k`` clusters by its values.

    Two clusters come from the sign of the mean-subtracted values; more
    clusters come from 1D k-means over the raw values (k-means++
    seeding, 50 restarts, best within-cluster sum of squares kept).
    Labels are invariant under positive rescaling of ``f``.

    Parameters
    ----------
    f : Signal
        Vertex function, typically a flow subgradient or profile.
    k : int
        Number of clusters, at least 2.
    seed : int
        RNG seed for the k-means restarts (unused for ``k = 2``).

    Returns
    -------
    ndarray
        Integer labels in ``{0, ..., k-1}`` (some possibly empty in
        degenerate cases, which are reported via a warning).
    """
    if k < 2:
        raise ValueError("need at least 2 clusters")
    values = f.values
    if np.unique(values).size < k:
        warnings.warn(
            f"signal has fewer than {k} distinct values; "
            "clustering is degenerate",
            stacklevel=2,
        )
    if k == 2:
        centered = values - values.mean()
        return (centered >= 0.0).astype(np.int64)
    rng = np.random.default_rng(seed)
    return _kmeans_1d(values, k, rng, restarts=50).astype(np.int64)


def clustering_accuracy(pred, truth) -> float:
    """Best label-matched agreement between two labelings.

    Builds the contingency table and maximizes the matched count over
    label assignments, so the score is invariant under relabeling of
    either argument.

    Parameters
    ----------
    pred, truth : array_like
        Integer labelings of equal length.

    Returns
    -------
    float
        Agreement fraction in ``[0, 1]``.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError("labelings must be 1D and of equal length")
    if pred.size == 0:
        raise ValueError("labelings must be non-empty")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    table = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(table, (pi, ti), 1)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / pred.size
