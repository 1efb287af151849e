"""Approximate depth among triangles.

Each triangle is rotated so that one of a fixed set of directions becomes
+y and is split into signed trapezoids.  Trapezoids are indexed by a segment
tree on their x-spans; each segment tree node holds a primal-dual structure
over the ceiling halfplanes of its trapezoids.

Near the two x-extreme vertices a triangle can be thinner than the dual
fuzz, and an undecided top edge together with an undecided bottom edge
would subtract a whole triangle from the lower estimate.  Trapezoids are
therefore cut where the triangle's vertical thickness reaches 2*eps: thin
ends (tips) only ever feed the upper estimate.
"""

from __future__ import annotations

import math

import numpy as np

from .decompose import CENTER2, triangle_pieces
from .directions import DirectionSet, good_directions
from .engine import PrimalDual
from .halfspace import cube_filters
from .geometry import DepthEstimate, as_triangles, check_in_cube
from .params import Params, check_epsilon, choose_parameters, clamp_depth, coarsened, depth_for
from .segtree import SegmentForest

CORE_P, CORE_N, TIP_P, TIP_N = 0, 1, 2, 3
ROOT_LO = np.array([-0.5, -0.5])
ROOT_SIDE = 2.0


def ceiling_halfplanes(px, py, qx, qy):
    """Normal form of ``y <= line(p, q)``."""
    slope = (qy - py) / (qx - px)
    icpt = py - slope * px
    A = np.stack([slope, -np.ones_like(slope)], axis=1)
    norm = np.linalg.norm(A, axis=1)
    return A / norm[:, None], -icpt / norm


class TriangleStructure:
    def __init__(self, V, eps, m, D: DirectionSet = DirectionSet(), tune_factor=1.0):
        self.eps = check_epsilon(eps)
        V = as_triangles(V) if len(V) else np.zeros((0, 3, 2))
        self.V = V
        self.n = len(V)
        self.d = 2
        self.D = D
        self.dirs = good_directions(V, D) if self.n else np.zeros(0, np.int64)
        rots = D.rotations()
        self.rots = rots
        Vrot = np.einsum("nij,nvj->nvi", rots[self.dirs], V - CENTER2) + CENTER2
        pc = triangle_pieces(Vrot, self.eps)
        self.pieces = pc
        pdir = self.dirs[pc["tri"].astype(np.int64)] if len(pc["tri"]) else np.zeros(0, np.int64)
        kind = np.where(pc["tip"].astype(bool), 2, 0) + np.where(pc["sign"] < 0, 1, 0)
        gid = pdir * 4 + kind
        self.segs = SegmentForest(gid, pc["xl"], pc["xr"], pc["cl"], pc["cr"])
        groups = self.segs.groups
        self.group_dir = (groups // 4).astype(np.int64)
        self.group_kind = (groups % 4).astype(np.int64)
        self.n_inst = n_inst = self.segs.n_inst
        op, oi = self.segs.copy_item, self.segs.copy_inst
        self.n_copies = len(op)
        A, b = ceiling_halfplanes(pc["px"][op], pc["py"][op], pc["qx"][op], pc["qy"][op])
        m_eff = max(1, int(m)) * max(1, math.ceil(math.log2(max(self.n, 2))))
        self.params: Params = choose_parameters(self.n_copies, m_eff, self.eps, tune_factor)
        # the trapezoid split needs the dual fuzz bound, so the dual level is always used
        k = depth_for(ROOT_SIDE, self.params.delta1)
        self.k = clamp_depth(k, self.n_copies, 2)
        self.params = coarsened(self.params, k - self.k)
        cot = 1.0 / math.tan(D.beta) + 1e-9
        I = max(n_inst, 1)
        # filters: the node's x-range and the rotated unit square
        FA, FB = cube_filters(rots[pdir[op]], CENTER2)
        FA = np.concatenate([np.tile([[[1.0, 0.0], [-1.0, 0.0]]], (len(op), 1, 1)), FA], axis=1)
        FB = np.concatenate([np.stack([np.clip(self.segs.inst_lo[oi], -4.0, 4.0),
                                       -np.clip(self.segs.inst_hi[oi], -4.0, 4.0)], axis=1), FB],
                            axis=1)
        self.engine = PrimalDual(A, b, oi, np.tile(ROOT_LO, (I, 1)), np.full(I, ROOT_SIDE),
                                 self.k, self.eps, dual=True, slope_lo=[-cot], slope_hi=[cot],
                                 filters=(FA, FB))

    @property
    def n_primal_nodes(self):
        return self.engine.n_primal_nodes

    @property
    def n_dual_nodes(self):
        return self.engine.n_dual_nodes

    def query_parts(self, Q):
        """Per query and group kind: (lo, hi) sums, shape (m, 4) each."""
        Q = check_in_cube(Q, 2)
        m = len(Q)
        lo4 = np.zeros((m, 4), np.int64)
        hi4 = np.zeros((m, 4), np.int64)
        if self.n == 0 or m == 0:
            return lo4, hi4
        X = np.einsum("dij,mj->dmi", self.rots, Q - CENTER2) + CENTER2
        qi, gi, ii = self.segs.pairs(X[:, :, 0], self.group_dir)
        pts = X[self.group_dir[gi], qi]
        lo, hi = self.engine.query(pts, ii)
        flat = qi * 4 + self.group_kind[gi]
        lo4 += np.bincount(flat, weights=lo, minlength=4 * m).reshape(m, 4).astype(np.int64)
        hi4 += np.bincount(flat, weights=hi, minlength=4 * m).reshape(m, 4).astype(np.int64)
        return lo4, hi4

    def query_many(self, Q):
        lo4, hi4 = self.query_parts(Q)
        d_minus = lo4[:, CORE_P] - hi4[:, CORE_N]
        d_plus = hi4[:, CORE_P] + hi4[:, TIP_P] - lo4[:, CORE_N] - lo4[:, TIP_N]
        return d_minus, d_plus

    def query(self, q):
        lo, hi = self.query_many(np.asarray(q, dtype=float)[None, :])
        return DepthEstimate(int(lo[0]), int(hi[0]))


def build_triangle_structure(S, eps, m, tune_factor=1.0):
    V = S.objects if hasattr(S, "objects") else S
    return TriangleStructure(np.asarray(V, dtype=float).reshape(-1, 3, 2), eps, m,
                             tune_factor=tune_factor)


def query_triangle(st, q):
    return st.query(q)
