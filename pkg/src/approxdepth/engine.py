"""Generic primal-dual engine for families of closed halfspaces.

Objects are single halfspaces ``A . x >= B`` given in the frame of an
instance root box.  A primal tree of depth ``k`` resolves every object that
misses or contains a cell; the objects crossing a bottom cell are dualized in
one of several class frames and stored in a dual tree.  With ``dual=False``
the bottom cells keep plain crossing counters instead.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels as K
from .geometry import ParameterError
from .trees import DualForest, PrimalTree

MAX_WORK = 5e8



def dual_depth(cell_side, eps, slope_widths, height):
    """Depth of a dual tree whose bottom boxes keep the vertical fuzz below 3*eps/4.

    ``height`` is the extent of the dual box along the offset axis in units
    of the primal cell side.
    """
    spread = cell_side * (float(np.sum(slope_widths)) + height)
    return max(0, math.ceil(math.log2(4.0 * spread / (3.0 * eps)) - 1e-12))


class PrimalDual:
    """Primal tree plus per-bottom-cell dual trees.

    ``slope_lo``/``slope_hi`` bound the vertical-form slope coefficients in
    every class frame; ``l1_neg``/``l1_pos`` bound the negative and positive
    parts of their sums (default: derived from the slope box).
    """

    def __init__(self, A, B, inst, root_lo, root_side, k, eps, dual=True, classes=None,
                 slope_lo=None, slope_hi=None, l1_neg=None, l1_pos=None, filters=None):
        A = np.asarray(A, dtype=float).reshape(-1, np.atleast_2d(root_lo).shape[1])
        B = np.asarray(B, dtype=float).reshape(-1)
        d = A.shape[1]
        # a boundary crosses about 2^(k(d-1)) bottom cells per level
        work = len(A) * d * 2.0 ** (int(k) * (d - 1))
        if work > MAX_WORK:
            raise ParameterError(f"primal tree too deep for this input (about {work:.2g} cells)")
        AJ, BJ = A[:, None, :], B[:, None]
        if filters is not None:
            # per-object (N, F, d), (N, F) halfspaces that only restrict where queries land
            FB = np.asarray(filters[1], float).reshape(len(A), -1 if len(A) else 0)
            FA = np.asarray(filters[0], float).reshape(len(A), FB.shape[1], d)
            AJ = np.concatenate([AJ, FA], axis=1)
            BJ = np.concatenate([BJ, FB], axis=1)
        self.tree = PrimalTree(AJ, BJ, inst, root_lo, root_side, k, want_pairs=dual, nhard=1)
        self._AJ, self._BJ, self._A, self._B = AJ, BJ, A, B
        t = self.tree
        self.d, self.k, self.eps, self.dual = d, int(k), float(eps), bool(dual)
        if classes is None:
            cls = np.zeros(len(A), np.int64)
            cls_M = np.eye(d)[None]
            cls_t = np.zeros((1, d))
        else:
            cls, cls_M, cls_t = classes
        self.cls = np.ascontiguousarray(cls, dtype=np.int64) if len(cls) else np.zeros(len(A), np.int64)
        self.cls_M = np.ascontiguousarray(cls_M, dtype=float)
        self.cls_t = np.ascontiguousarray(cls_t, dtype=float)
        C = self.cls_M.shape[0]
        self.node_b = t.node_b.copy()
        self.node_slot = np.full(t.n_nodes, -1, np.int64)
        sides = t.root_side * (0.5 ** self.k)
        self.cell_side = float(sides.max()) if len(sides) else 1.0
        self.lo_d = np.zeros(d)
        self.size_d = np.ones(d)
        self.Kd = 0
        if not dual:
            self.root_table = np.zeros((0, C), np.int64)
            self.forest = DualForest.empty(d)
            return
        if not np.allclose(sides, self.cell_side):
            raise ValueError("dual mode needs equal bottom cell sizes across instances")
        s = self.cell_side
        slope_lo = np.full(d - 1, -1.0) if slope_lo is None else np.asarray(slope_lo, float)
        slope_hi = np.full(d - 1, 1.0) if slope_hi is None else np.asarray(slope_hi, float)
        neg = float(np.sum(np.maximum(-slope_lo, 0))) if l1_neg is None else float(l1_neg)
        pos = float(np.sum(np.maximum(slope_hi, 0))) if l1_pos is None else float(l1_pos)
        lo_d = np.r_[slope_lo, -(1.0 + neg) * s]
        size_d = np.r_[slope_hi - slope_lo, (1.0 + neg + pos) * s]
        self.Kd = dual_depth(s, eps, slope_hi - slope_lo, 1.0 + neg + pos)
        self.lo_d, self.size_d = lo_d, size_d
        self.node_b[:] = 0

        if len(cls) == 0:
            cls = np.zeros(len(A), np.int64)
        lk = t.level_off[self.k]
        level_keys = t.node_key[lk:t.level_off[self.k + 1]]
        slot_of, self.root_table, skeys, self.dual_overflow = K.dual_leaf_keys(
            np.ascontiguousarray(A), B, t.pair_obj, t.pair_key, t.root_lo, t.root_side, self.k,
            level_keys, np.ascontiguousarray(cls, dtype=np.int64), self.cls_M, self.cls_t,
            lo_d, size_d, self.Kd)
        self.node_slot[lk:lk + len(slot_of)] = slot_of
        skeys.sort()
        self.forest = DualForest.from_signed_keys(skeys, int(self.root_table.max(initial=-1)) + 1,
                                                  lo_d, size_d, self.Kd)

    @property
    def n_primal_nodes(self):
        return self.tree.n_nodes

    @property
    def n_dual_nodes(self):
        return self.forest.n_nodes

    @property
    def n_dual_points(self):
        return len(self.tree.pair_obj) if self.dual else 0

    def query(self, Q, qinst):
        """Return (lo, hi): certified-containing counts and those plus undecided ones."""
        Q = np.ascontiguousarray(Q, dtype=float)
        qinst = np.ascontiguousarray(qinst, dtype=np.int64)
        t = self.tree
        f = self.forest
        return K.pd_query(Q, qinst, t.root_lo, t.root_side, t.k, t.node_c, t.node_child,
                          self.node_b, self.node_slot, self.root_table, self.cls_M, self.cls_t,
                          f.lo_d, f.size_d, f.K, f.cpos, f.cneg, f.cstart, f.cend, f.cidx,
                          max(f.K, 1))

    def explain(self, q, inst):
        """Per-object status for one query: 0 not counted, 1 upper estimate only, 2 both."""
        q = np.ascontiguousarray(q, dtype=float)
        objs = np.flatnonzero(self.tree.inst == inst).astype(np.int64)
        out = np.zeros(len(self._A), np.int64)
        if len(objs) == 0:
            return out
        t = self.tree
        out[objs] = K.pd_explain(q, int(inst), objs, self._AJ, self._BJ, 1, t.root_lo,
                                 t.root_side, self.k, self.dual, self._A, self._B, self.cls,
                                 self.cls_M, self.cls_t, self.lo_d, self.size_d, self.Kd)
        return out
