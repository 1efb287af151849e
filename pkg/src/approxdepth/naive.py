"""Primal-only quadtree/octree refined down to cells of diameter at most epsilon."""

from __future__ import annotations

import math

import numpy as np

from .engine import PrimalDual
from .geometry import DepthEstimate, check_in_cube
from .params import check_epsilon
from .scenes import halfspaces_of


def naive_depth(eps, d, side=1.0):
    """Levels needed so a cell of a root box of the given side has diameter <= eps."""
    return max(0, math.ceil(math.log2(side * math.sqrt(d) / eps) - 1e-12))


class NaiveTree:
    """Pruned primal tree over the unit cube with containment and crossing counters."""

    def __init__(self, A, b, eps):
        self.eps = check_epsilon(eps)
        A = np.asarray(A, dtype=float)
        self.d = A.shape[1]
        self.n = A.shape[0]
        self.k = naive_depth(self.eps, self.d)
        self.engine = PrimalDual(A, b, np.zeros(self.n, np.int64), np.zeros((1, self.d)),
                                 np.ones(1), self.k, self.eps, dual=False)
        self.tree = self.engine.tree

    @property
    def n_nodes(self):
        return self.tree.n_nodes

    def query_many(self, Q):
        Q = check_in_cube(Q, self.d)
        return self.engine.query(Q, np.zeros(len(Q), np.int64))

    def query(self, q):
        lo, hi = self.query_many(np.asarray(q, dtype=float)[None, :])
        return DepthEstimate(int(lo[0]), int(hi[0]))

    def explain(self, q):
        """Per-halfspace status for ``q``: 0 not counted, 1 only in d_plus, 2 in both."""
        q = check_in_cube(np.asarray(q, dtype=float)[None, :], self.d)[0]
        return self.engine.explain(q, 0)

    def leaf_depths(self):
        """(leaf node ids, d-minus, d-plus) for every leaf of the tree."""
        t = self.tree
        ps = t.path_sums()
        leaves = np.flatnonzero(t.node_child < 0)
        return leaves, ps[leaves], ps[leaves] + t.node_b[leaves]

    def max_depth(self):
        from .maxdepth import MaxDepthResult

        leaves, dm, dp = self.leaf_depths()
        i_m = int(np.argmax(dm))
        i_p = int(np.argmax(dp))
        lo, side = self.tree.cell_lo(leaves[[i_m, i_p]])
        centers = lo + side[:, None] / 2
        return MaxDepthResult(centers[0], int(dm[i_m]), centers[1], int(dp[i_p]))


def build_naive(S, eps):
    A, b = halfspaces_of(S)
    return NaiveTree(A, b, eps)


def query_naive(t, q):
    return t.query(q)


def max_depth_naive(t):
    return t.max_depth()
