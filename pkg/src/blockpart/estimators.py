"""scikit-learn style wrappers: ``fit`` a graph, read the partition from ``labels_``.

``X`` may be a :class:`Graph`, a networkx graph with integer nodes ``0..n-1``,
a square 0/1 adjacency matrix (dense or scipy sparse), or an instance dict as
written by the generators.  The plane partitioners need an embedding, so they
take a :class:`RotationSystem` or an instance dict carrying one.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .decomposition import TreeDecomposition, min_fill_decomposition
from .embedding import RotationSystem
from .graph import Graph, GraphError, Partition
from .verify import blocking_number


def check_graph(X) -> Graph:
    """Coerce the accepted inputs to a :class:`Graph`."""
    if isinstance(X, Graph):
        return X
    if isinstance(X, RotationSystem):
        return X.graph
    if isinstance(X, dict):
        if "graph" in X:
            return Graph.from_json(X["graph"])
        if "n" in X and "edges" in X:
            return Graph.from_json(X)
        raise GraphError("dict input needs a 'graph' entry")
    if hasattr(X, "nodes") and hasattr(X, "edges"):
        nodes = sorted(X.nodes)
        if nodes != list(range(len(nodes))):
            raise GraphError("networkx input must have nodes 0..n-1")
        return Graph(len(nodes), [(int(u), int(v)) for u, v in X.edges if u != v])
    if hasattr(X, "tocoo"):
        A = X.tocoo()
        if A.shape[0] != A.shape[1]:
            raise GraphError(f"adjacency matrix must be square, got {A.shape}")
        edges = {(int(min(i, j)), int(max(i, j))) for i, j, w in zip(A.row, A.col, A.data) if w and i != j}
        return _symmetric(A.shape[0], edges, {(int(i), int(j)) for i, j, w in zip(A.row, A.col, A.data) if w})
    A = np.asarray(X)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphError(f"adjacency matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise GraphError("adjacency matrix has non-finite entries")
    if np.any(np.diag(A) != 0):
        raise GraphError("adjacency matrix has self-loops")
    if not np.array_equal(A != 0, (A != 0).T):
        raise GraphError("adjacency matrix is not symmetric")
    rows, cols = np.nonzero(np.triu(A != 0, 1))
    return Graph(A.shape[0], zip(rows.tolist(), cols.tolist()))


def _symmetric(n, edges, directed):
    for i, j in directed:
        if i != j and (j, i) not in directed:
            raise GraphError("adjacency matrix is not symmetric")
    return Graph(n, sorted(edges))


def check_embedding(X) -> RotationSystem:
    if isinstance(X, RotationSystem):
        return X
    if isinstance(X, dict) and "embedding" in X:
        return RotationSystem.from_json(X["embedding"])
    raise GraphError("a plane embedding is required (RotationSystem or instance dict with 'embedding')")


def check_decomposition(X, G: Graph, supplied=None) -> TreeDecomposition:
    """The supplied decomposition, the instance's own, or a min-fill one; validated."""
    td = supplied
    if td is None and isinstance(X, dict) and "decomposition" in X:
        td = TreeDecomposition.from_json(X["decomposition"])
    if td is None:
        return min_fill_decomposition(G)
    td.validate(G)
    return td


class _PartitionEstimator(ClusterMixin, BaseEstimator):
    def _store(self, G: Graph, P: Partition):
        self.labels_ = np.asarray(P.part_of, dtype=np.int64)
        self.partition_ = P
        self.n_parts_ = len(P.parts)
        self.width_ = P.width
        self.n_features_in_ = G.n
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def blocking_number(self, X, budget: int = 10 ** 8):
        """Longest clean path of the fitted partition on ``X`` (with exactness flag)."""
        check_is_fitted(self, "labels_")
        G = check_graph(X)
        if G.n != self.n_features_in_:
            raise GraphError("graph differs from the one fitted")
        rep = blocking_number(G, self.partition_, budget)
        return rep.max_length_found, rep.exhausted


class ChordalPartitioner(_PartitionEstimator):
    """Connected partition with a chordal quotient, built tree by tree on a plane graph."""

    def __init__(self, tau: int = 1, check: bool = True):
        self.tau = tau
        self.check = check

    def fit(self, X, y=None):
        from .chordal import build_chordal_partition

        R = check_embedding(X)
        self.result_ = build_chordal_partition(R, self.tau, self.check)
        return self._store(R.graph, self.result_.partition)


class RefinedPartitioner(_PartitionEstimator):
    """Chordal partition with every tree cut along an edge family; ``aborted_`` is set
    (and ``labels_`` is the chordal partition) when no admissible cut exists."""

    def __init__(self, tau: int = 2, c: int = 2, d_indep: int = 8, n0: int = 16, seed: int = 0):
        self.tau = tau
        self.c = c
        self.d_indep = d_indep
        self.n0 = n0
        self.seed = seed

    def fit(self, X, y=None):
        from .chordal import build_chordal_partition
        from .refinement import RefinementParams, refine

        R = check_embedding(X)
        params = RefinementParams(c=self.c, d_indep=self.d_indep, n0=self.n0, tau=self.tau)
        chordal = build_chordal_partition(R, self.tau)
        self.result_ = refine(chordal, params, seed=self.seed)
        self.aborted_ = self.result_.aborted
        P = self.result_.partition if self.result_.partition is not None else chordal.partition
        return self._store(R.graph, P)


class TreePartitioner(_PartitionEstimator):
    """Detached tree-partition; ``labels_`` indexes the tree nodes that hold vertices."""

    def __init__(self, decomposition: TreeDecomposition | None = None, check: bool = True):
        self.decomposition = decomposition
        self.check = check

    def fit(self, X, y=None):
        from .treepart import improved_tree_partition

        G = check_graph(X)
        td = check_decomposition(X, G, self.decomposition)
        self.tree_partition_ = improved_tree_partition(G, td, self.check)
        return self._store(G, self.tree_partition_.to_partition(G.n))


class TwoBlockingPartitioner(_PartitionEstimator):
    """Partition in which every clean path has length at most 2."""

    def __init__(self, decomposition: TreeDecomposition | None = None, check: bool = True):
        self.decomposition = decomposition
        self.check = check

    def fit(self, X, y=None):
        from .treepart import two_blocking_partition

        G = check_graph(X)
        td = check_decomposition(X, G, self.decomposition)
        self.decomposition_width_ = td.width
        return self._store(G, two_blocking_partition(G, td, self.check))
