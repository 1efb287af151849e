"""Primal-dual structure for halfplanes.

A coarse quadtree of cell size delta1 resolves most halfplanes exactly; the
ones crossing a bottom cell are split by slope class, dualized relative to the
cell corner and stored in dual quadtrees whose bottom boxes are fine enough
that every undecided halfplane lies within vertical distance 3*eps/4 of the
query.
"""

from __future__ import annotations

import numpy as np

from .engine import PrimalDual
from .geometry import CLASS_M, CLASS_T, DepthEstimate, check_in_cube, slope_classes
from .naive import naive_depth
from .params import PRIMAL_ONLY, Params, choose_parameters, clamp_depth, coarsened, depth_for
from .scenes import halfspaces_of


class PDStructure:
    def __init__(self, A, b, params: Params):
        A = np.asarray(A, dtype=float).reshape(-1, 2)
        b = np.asarray(b, dtype=float).reshape(-1)
        self.params = params
        self.n = len(A)
        self.d = 2
        eps = params.epsilon
        inst = np.zeros(self.n, np.int64)
        if params.regime == PRIMAL_ONLY:
            self.k = naive_depth(eps, 2)
            self.engine = PrimalDual(A, b, inst, np.zeros((1, 2)), np.ones(1), self.k, eps,
                                     dual=False)
        else:
            k = depth_for(1.0, params.delta1)
            self.k = clamp_depth(k, self.n, 2)
            self.params = params = coarsened(params, k - self.k)
            cls = slope_classes(A) if self.n else np.zeros(0, np.int64)
            self.engine = PrimalDual(A, b, inst, np.zeros((1, 2)), np.ones(1), self.k, eps,
                                     dual=True, classes=(cls, CLASS_M, CLASS_T),
                                     slope_lo=[0.0], slope_hi=[1.0])

    @property
    def n_primal_nodes(self):
        return self.engine.n_primal_nodes

    @property
    def n_dual_nodes(self):
        return self.engine.n_dual_nodes

    def query_many(self, Q):
        Q = check_in_cube(Q, 2)
        return self.engine.query(Q, np.zeros(len(Q), np.int64))

    def query(self, q):
        lo, hi = self.query_many(np.asarray(q, dtype=float)[None, :])
        return DepthEstimate(int(lo[0]), int(hi[0]))

    def explain(self, q):
        """Per-halfplane status for ``q``: 0 not counted, 1 only in d_plus, 2 in both."""
        q = check_in_cube(np.asarray(q, dtype=float)[None, :], 2)[0]
        return self.engine.explain(q, 0)


def build_pd(S, params: Params | None = None, eps=None, m=None, tune_factor=1.0):
    A, b = halfspaces_of(S)
    if params is None:
        params = choose_parameters(len(A), m or 1, eps, tune_factor)
    return PDStructure(A, b, params)


def query_pd(st, q):
    return st.query(q)
