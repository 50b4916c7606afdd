"""Weighted undirected graphs and combinatorial Laplacians."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError

AUTO = "auto"


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph on ``n`` vertices.

    ``weights`` is a symmetric CSR array with an empty diagonal and
    nonnegative entries. Vertices are 0-based.
    """

    weights: sp.csr_array

    def __post_init__(self):
        w = sp.csr_array(self.weights, dtype=float)
        w.sum_duplicates()
        w.eliminate_zeros()
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise InvalidArgumentError(f"weights must be square and non-empty, got shape {w.shape}")
        if not np.all(np.isfinite(w.data)):
            raise InvalidArgumentError("weights contain non-finite values")
        if np.any(w.data < 0):
            raise InvalidArgumentError("weights must be nonnegative")
        if np.any(w.diagonal() != 0):
            raise InvalidArgumentError("self loops are not allowed")
        if (w != w.T).nnz:
            raise InvalidArgumentError("weights must be exactly symmetric")
        w.sort_indices()
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_dense(cls, weights) -> "Graph":
        return cls(sp.csr_array(np.asarray(weights, dtype=float)))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from ``(i, j, w)`` triples; each undirected edge listed once."""
        edges = list(edges)
        if not edges:
            return cls(sp.csr_array((n, n), dtype=float))
        i, j, w = (np.asarray(c) for c in zip(*edges))
        rows = np.concatenate([i, j]).astype(np.int64)
        cols = np.concatenate([j, i]).astype(np.int64)
        vals = np.concatenate([w, w]).astype(float)
        return cls(sp.csr_array((vals, (rows, cols)), shape=(n, n)))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def dense(self) -> np.ndarray:
        return self.weights.toarray()

    def edges(self) -> list[tuple[int, int, float]]:
        """Edge list ``(i, j, w)`` with ``i < j`` and ``w > 0``, sorted."""
        upper = sp.triu(self.weights, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return [(int(upper.row[k]), int(upper.col[k]), float(upper.data[k])) for k in order]

    def degrees(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()


def path_graph(n: int) -> Graph:
    if n < 2:
        raise InvalidArgumentError(f"path graph needs n >= 2, got {n}")
    return Graph.from_edges(n, [(i, i + 1, 1.0) for i in range(n - 1)])


def ring_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidArgumentError(f"ring graph needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, i + 1, 1.0) for i in range(n - 1)] + [(0, n - 1, 1.0)])


def pairwise_sq_distances(rows: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", rows, rows)
    d = sq[:, None] + sq[None, :] - 2.0 * rows @ rows.T
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def knn_gaussian_graph(rows, k: int, bandwidth=AUTO) -> Graph:
    """k-nearest-neighbour graph with Gaussian kernel weights.

    Parameters
    ----------
    rows : array_like, shape (m, p)
        One data point per row.
    k : int
        Number of neighbours selected by each point; ``1 <= k < m``.
    bandwidth : float or ``"auto"``
        Kernel width ``sigma`` in ``exp(-||x_i - x_j||^2 / sigma)``. With
        ``"auto"`` it is the median squared distance over the retained
        pairs, or 1.0 if that median is zero.

    Notes
    -----
    An edge is kept when either endpoint selects the other. Distance ties
    are broken in favour of the lower vertex index.
    """
    x = np.asarray(rows, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    m = x.shape[0]
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("rows contain non-finite values")
    if k < 1 or k >= m:
        raise InvalidArgumentError(f"k must satisfy 1 <= k < m={m}, got {k}")
    if bandwidth != AUTO and not (float(bandwidth) > 0):
        raise InvalidArgumentError(f"bandwidth must be positive or 'auto', got {bandwidth}")

    d = pairwise_sq_distances(x)
    masked = d.copy()
    np.fill_diagonal(masked, np.inf)
    # stable sort keeps the lower index first among equal distances
    nbrs = np.argsort(masked, axis=1, kind="stable")[:, :k]

    selected = np.zeros((m, m), dtype=bool)
    selected[np.repeat(np.arange(m), k), nbrs.ravel()] = True
    selected |= selected.T
    iu, ju = np.nonzero(np.triu(selected, k=1))
    dist = d[iu, ju]

    if bandwidth == AUTO:
        sigma = float(np.median(dist)) if dist.size else 1.0
        if sigma == 0.0:
            sigma = 1.0
    else:
        sigma = float(bandwidth)

    w = np.exp(-dist / sigma)
    # exp underflow would silently drop a selected edge
    w = np.maximum(w, np.finfo(float).tiny)
    return Graph.from_edges(m, zip(iu, ju, w))


def laplacian(g: Graph, sparse: bool = False):
    """Combinatorial Laplacian ``D - W``; dense unless ``sparse`` is set."""
    lap = sp.diags_array(g.degrees()) - g.weights
    lap = sp.csr_array(lap)
    return lap if sparse else lap.toarray()


def laplacian_quadratic_form(lap, f) -> float:
    """Smoothness ``f^T L f`` of a signal ``f``."""
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.shape[0] != lap.shape[0]:
        raise InvalidArgumentError(f"signal length {f.shape} does not match Laplacian size {lap.shape[0]}")
    return float(f @ (lap @ f))


def edge_quadratic_form(g: Graph, f) -> float:
    """``sum_{(i,j) in E} w_ij (f_i - f_j)^2`` evaluated edge by edge."""
    f = np.asarray(f, dtype=float)
    upper = sp.triu(g.weights, k=1).tocoo()
    return float(np.sum(upper.data * (f[upper.row] - f[upper.col]) ** 2))
