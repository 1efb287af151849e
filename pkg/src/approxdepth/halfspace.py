"""Primal-dual structure for halfspaces in R^d.

Normals are grouped into caps; each cap is rotated so its center points
along the last axis, which bounds the slopes of its hyperplanes and makes
vertical distance a good proxy for euclidean distance.  Every cap gets its
own primal tree over a common box around the rotated unit cube.
"""

from __future__ import annotations

import math

import numpy as np

from .directions import CapFamily
from .engine import PrimalDual
from .geometry import DepthEstimate, check_in_cube
from .naive import naive_depth
from .params import PRIMAL_ONLY, Params, choose_parameters_d, clamp_depth, coarsened, depth_for
from .scenes import halfspaces_of


def root_box_side(d):
    """Power-of-two side of a cube around the unit cube's center holding all its rotations."""
    return 2.0 ** math.ceil(math.log2(math.sqrt(d)) - 1e-12)


def cube_filters(R, center):
    """Faces of the unit cube seen in frames ``x -> R (x - c) + c``, as (N, 2d, d), (N, 2d)."""
    R = np.asarray(R, dtype=float)
    rows = np.swapaxes(R, 1, 2)
    rc = rows @ center
    FA = np.concatenate([rows, -rows], axis=1)
    FB = np.concatenate([rc - 0.5, -rc - 0.5], axis=1)
    return FA, FB


class HalfspaceStructure:
    def __init__(self, A, b, params: Params, caps: CapFamily | None = None):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).reshape(-1)
        self.d = d = A.shape[1]
        self.n = len(A)
        self.params = params
        eps = params.epsilon
        self.primal_only = params.regime == PRIMAL_ONLY
        if self.primal_only:
            self.k = naive_depth(eps, d)
            self.engine = PrimalDual(A, b, np.zeros(self.n, np.int64), np.zeros((1, d)),
                                     np.ones(1), self.k, eps, dual=False)
            self.caps = None
            return
        self.caps = caps or CapFamily(d)
        cap = self.caps.assign(A)
        used, inst = np.unique(cap, return_inverse=True)
        self.used_caps = used
        self.R = self.caps.rotations[used]
        self.c0 = np.full(d, 0.5)
        A2 = np.einsum("nij,nj->ni", self.R[inst], A) if self.n else A
        b2 = b - A @ self.c0 + A2 @ self.c0 if self.n else b
        self.rotated = (A2, b2, inst)
        L = root_box_side(d)
        self.root_side = L
        k = depth_for(L, params.delta1)
        self.k = clamp_depth(k, self.n, d)
        self.params = params = coarsened(params, k - self.k)
        I = max(len(used), 1)
        root_lo = np.tile(self.c0 - L / 2, (I, 1))
        t = self.caps.tan_phi
        self.engine = PrimalDual(A2, b2, inst, root_lo, np.full(I, L), self.k, eps, dual=True,
                                 slope_lo=np.full(d - 1, -t), slope_hi=np.full(d - 1, t),
                                 l1_neg=1.0, l1_pos=1.0,
                                 filters=cube_filters(self.R[inst], self.c0))

    @property
    def n_primal_nodes(self):
        return self.engine.n_primal_nodes

    @property
    def n_dual_nodes(self):
        return self.engine.n_dual_nodes

    def query_many(self, Q):
        Q = check_in_cube(Q, self.d)
        m = len(Q)
        if self.primal_only:
            return self.engine.query(Q, np.zeros(m, np.int64))
        C = len(self.used_caps)
        if C == 0 or m == 0:
            z = np.zeros(m, np.int64)
            return z, z.copy()
        Qr = np.einsum("cij,mj->cmi", self.R, Q - self.c0) + self.c0
        inst = np.repeat(np.arange(C, dtype=np.int64), m)
        lo, hi = self.engine.query(Qr.reshape(-1, self.d), inst)
        return lo.reshape(C, m).sum(axis=0), hi.reshape(C, m).sum(axis=0)

    def query(self, q):
        lo, hi = self.query_many(np.asarray(q, dtype=float)[None, :])
        return DepthEstimate(int(lo[0]), int(hi[0]))

    def explain(self, q):
        """Per-halfspace status for ``q``: 0 not counted, 1 only in d_plus, 2 in both."""
        q = check_in_cube(np.asarray(q, dtype=float)[None, :], self.d)[0]
        if self.primal_only:
            return self.engine.explain(q, 0)
        out = np.zeros(self.n, np.int64)
        for c in range(len(self.used_caps)):
            qr = self.R[c] @ (q - self.c0) + self.c0
            out += self.engine.explain(qr, c)
        return out


def build_halfspace_structure(S, eps, m, d=None, tune_factor=1.0, caps=None):
    A, b = halfspaces_of(S)
    d = d or A.shape[1]
    params = choose_parameters_d(len(A), m, eps, d, tune_factor)
    return HalfspaceStructure(A, b, params, caps)


def query_halfspace(st, q):
    return st.query(q)
