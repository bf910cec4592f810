"""Weighted undirected graphs and the spectral helpers built on them.

Graphs are stored as canonical edge lists (``i < j``, no duplicates, no
self loops) with strictly positive weights.  Construction from point
clouds uses a symmetrized k-nearest-neighbor rule with a Gaussian edge
kernel.  The linear-algebra helpers stay dense on purpose: every use in
this package is desk scale (at most a couple of thousand vertices).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .functional import Signal

__all__ = [
    "WeightedGraph",
    "DisconnectedGraphError",
    "build_knn_graph",
    "laplacian_matrix",
    "fiedler_vector",
    "p_laplacian_apply",
    "connected_components",
    "grid_graph",
]


class DisconnectedGraphError(ValueError):
    """An operation that needs a connected graph met several components."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph on vertices ``0 .. n-1``.

    Attributes
    ----------
    n : int
        Vertex count, at least one.
    edges : numpy.ndarray
        Integer array of shape ``(m, 2)`` with each row ``(i, j)``,
        ``i < j``, listing every undirected edge exactly once.
    weights : numpy.ndarray
        Positive finite weights, shape ``(m,)``.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        e = np.array(self.edges, dtype=np.int64, copy=True).reshape(-1, 2)
        w = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
        if e.shape[0] != w.shape[0]:
            raise ValueError("edges and weights disagree in length")
        if e.size:
            if e.min() < 0 or e.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self loops are not allowed")
            if np.any(e[:, 0] > e[:, 1]):
                raise ValueError("edges must be canonical (i < j)")
            key = e[:, 0] * self.n + e[:, 1]
            if np.unique(key).size != key.size:
                raise ValueError("duplicate edges are not allowed")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ValueError("weights must be positive and finite")
        e.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return self.edges.shape[0]

    @classmethod
    def from_edge_list(
        cls, n: int, triples: Sequence[tuple], merge_duplicates: bool = False
    ) -> "WeightedGraph":
        """Build a graph from ``(i, j, w)`` triples in any orientation.

        Endpoints are canonicalized to ``i < j``.  Duplicate edges raise
        unless ``merge_duplicates`` is set, in which case their weights
        are summed.
        """
        if len(triples) == 0:
            return cls(n, np.zeros((0, 2), dtype=np.int64), np.zeros(0))
        arr = np.asarray([(t[0], t[1]) for t in triples], dtype=np.int64)
        w = np.asarray([t[2] for t in triples], dtype=np.float64)
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        if np.any(lo < 0) or np.any(hi >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(lo == hi):
            raise ValueError("self loops are not allowed")
        key = lo * n + hi
        order = np.argsort(key, kind="stable")
        key, lo, hi, w = key[order], lo[order], hi[order], w[order]
        uniq, start = np.unique(key, return_index=True)
        if uniq.size != key.size and not merge_duplicates:
            raise ValueError("duplicate edges are not allowed")
        wsum = np.add.reduceat(w, start)
        edges = np.stack([lo[start], hi[start]], axis=1)
        return cls(n, edges, wsum)

    @cached_property
    def weighted_degrees(self) -> np.ndarray:
        """Vector of weighted vertex degrees ``d(x) = sum_y w(x, y)``."""
        d = np.zeros(self.n)
        if self.m:
            np.add.at(d, self.edges[:, 0], self.weights)
            np.add.at(d, self.edges[:, 1], self.weights)
        return d

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric sparse weight matrix ``W``."""
        if self.m == 0:
            return sp.csr_matrix((self.n, self.n))
        i, j = self.edges[:, 0], self.edges[:, 1]
        return sp.csr_matrix(
            (
                np.concatenate([self.weights, self.weights]),
                (np.concatenate([i, j]), np.concatenate([j, i])),
            ),
            shape=(self.n, self.n),
        )

    @cached_property
    def component_labels(self) -> np.ndarray:
        """Connected component index per vertex (labels ``0 .. c-1``)."""
        if self.m == 0:
            return np.arange(self.n)
        _, labels = _cc(self.adjacency, directed=False)
        return labels

    @property
    def n_components(self) -> int:
        return int(self.component_labels.max()) + 1


def connected_components(graph: WeightedGraph) -> np.ndarray:
    """Component label per vertex; vertices share a label iff connected."""
    return graph.component_labels


def build_knn_graph(
    points: np.ndarray,
    k: int,
    kernel_scale: Union[str, float] = "auto",
    scale_multiplier: float = 1.0,
) -> WeightedGraph:
    """Symmetrized k-nearest-neighbor graph with Gaussian edge weights.

    Vertices ``x`` and ``y`` are joined when either is among the ``k``
    nearest neighbors of the other (union rule).  Edge weights are
    ``w(x, y) = exp(-d(x, y)^2 / (2 s^2))`` where ``s`` is
    ``kernel_scale``, or, with the ``"auto"`` policy, the mean distance
    to the k-th nearest neighbor over all points.

    Parameters
    ----------
    points : numpy.ndarray
        Array of shape ``(n, d)``.
    k : int
        Neighborhood size, ``1 <= k < n``.
    kernel_scale : float or "auto"
        Gaussian bandwidth ``s``.
    scale_multiplier : float
        Factor applied to the resolved bandwidth.  Useful with the
        ``"auto"`` policy to tighten or loosen the kernel relative to
        the data's own scale without fixing an absolute value.

    Returns
    -------
    WeightedGraph
        Deterministic for fixed inputs.  Coincident points produce
        zero-distance edges of weight one.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array")
    n = pts.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")

    sq = np.sum(pts**2, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T), 0.0)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    kth_dist = np.sqrt(d2[np.arange(n), order[:, -1]])

    if kernel_scale == "auto":
        s = float(kth_dist.mean())
        if s <= 0:
            raise ValueError("kernel_scale 'auto' failed: all points coincide")
    else:
        s = float(kernel_scale)
        if s <= 0:
            raise ValueError("kernel_scale must be positive")
    if scale_multiplier <= 0:
        raise ValueError("scale_multiplier must be positive")
    s *= scale_multiplier

    rows = np.repeat(np.arange(n), k)
    cols = order.reshape(-1)
    lo = np.minimum(rows, cols)
    hi = np.maximum(rows, cols)
    key = lo * n + hi
    uniq_key, idx = np.unique(key, return_index=True)
    lo, hi = lo[idx], hi[idx]
    w = np.exp(-d2[lo, hi] / (2.0 * s * s))
    return WeightedGraph(n, np.stack([lo, hi], axis=1), w)


def grid_graph(height: int, width: int, weight: float = 1.0) -> WeightedGraph:
    """Four-neighbor grid graph on ``height x width`` vertices.

    Vertices are numbered row-major; all edges carry the same weight.
    """
    if height < 1 or width < 1:
        raise ValueError("grid dimensions must be positive")
    idx = np.arange(height * width).reshape(height, width)
    horiz = np.stack([idx[:, :-1].reshape(-1), idx[:, 1:].reshape(-1)], axis=1)
    vert = np.stack([idx[:-1, :].reshape(-1), idx[1:, :].reshape(-1)], axis=1)
    edges = np.concatenate([horiz, vert], axis=0)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    return WeightedGraph(height * width, edges, np.full(edges.shape[0], weight))


def laplacian_matrix(graph: WeightedGraph) -> np.ndarray:
    """Dense unnormalized graph Laplacian ``L = D - W``.

    Symmetric and positive semidefinite; constants are in its kernel
    exactly (row sums vanish identically by construction).
    """
    lap = -graph.adjacency.toarray()
    np.fill_diagonal(lap, graph.weighted_degrees)
    return lap


def fiedler_vector(graph: WeightedGraph, domain_id: str = "") -> Signal:
    """Unit-norm eigenvector of ``L`` for the second-smallest eigenvalue.

    Uses the dense symmetric eigendecomposition, which is exact at the
    problem sizes handled here.  The sign is fixed by making the first
    entry of magnitude above ``1e-12`` positive.

    Raises
    ------
    DisconnectedGraphError
        If the graph is disconnected: the second eigenvalue is then zero
        and its eigenspace is spanned by component indicators, so no
        single direction is meaningful.
    """
    if graph.n_components > 1:
        raise DisconnectedGraphError(
            f"graph has {graph.n_components} components; "
            "the second Laplacian eigenvector is ambiguous"
        )
    if graph.n < 2:
        raise ValueError("fiedler vector needs at least two vertices")
    lap = laplacian_matrix(graph)
    _, vecs = np.linalg.eigh(lap)
    v = vecs[:, 1]
    nz = np.nonzero(np.abs(v) > 1e-12)[0]
    if nz.size and v[nz[0]] < 0:
        v = -v
    return Signal(v, domain_id)


def p_laplacian_apply(
    graph: WeightedGraph, f: Signal, p: float, domain_id: Optional[str] = None
) -> Signal:
    """Apply the graph p-Laplacian to a signal.

    ``(L_p f)(x) = sum_{y ~ x} w(x,y)^{p/2} |f(y)-f(x)|^{p-2} (f(y)-f(x))``
    with the convention that vanishing differences contribute zero.  For
    ``p = 2`` this is exactly ``-(D - W) f``.

    Parameters
    ----------
    graph : WeightedGraph
        Underlying graph.
    f : Signal
        Vertex signal.
    p : float
        Exponent, ``p >= 1``.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    vals = f.values
    if vals.size != graph.n:
        raise ValueError(f"signal has {vals.size} samples, graph has {graph.n} vertices")
    out = np.zeros(graph.n)
    if graph.m:
        i, j = graph.edges[:, 0], graph.edges[:, 1]
        d = vals[j] - vals[i]
        mag = np.abs(d)
        term = np.zeros_like(d)
        nz = mag > 0
        term[nz] = graph.weights[nz] ** (p / 2.0) * mag[nz] ** (p - 2.0) * d[nz]
        np.add.at(out, i, term)
        np.add.at(out, j, -term)
    return Signal(out, f.domain_id if domain_id is None else domain_id)
