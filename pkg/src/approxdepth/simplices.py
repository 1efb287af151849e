"""Approximate depth among simplices in R^3.

Each simplex gets a frame: a rotation making every facet steep enough
against the z-axis, followed by a rotation of the xy-plane making every
projected edge steep enough against the y-axis.  In that frame the simplex
is a signed union of twelve z-vertical prisms, one per (facet, trapezoid of
the projected facet).  A prism is bounded by two slanted planes: the
z-vertical plane over the trapezoid's ceiling edge and the facet plane.

Prisms are indexed by segment trees on their x-spans.  Every segment tree
node owns a primal octree over both planes; bottom cells keep dual trees:
one level for prisms with a single crossing plane, two levels (facet plane
first, edge plane second) when both cross.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .decompose import lerp_at, triangle_pieces
from .directions import DirectionSet, face_grid_axes, face_grid_radius, householder_to_last, \
    line_angle_gap
from .engine import dual_depth
from .geometry import DepthEstimate, ParameterError, ValidationError, as_simplices, \
    check_in_cube, simplex_facets
from .params import Params, check_epsilon, choose_parameters_simplex3, clamp_depth, coarsened, depth_for
from .segtree import SegmentForest
from .trees import DualForest, PrimalTree, morton_encode

AXIS_GRID = 9
EDGE_DIRECTIONS = 12
BETA2 = math.pi / 24
CENTER3 = np.full(3, 0.5)
ROOT_LO = np.full(3, -0.5)
ROOT_SIDE = 2.0
BASELINE = -1.0


class FrameFamily:
    """Frames ``(axis, direction)``: an axis sent to +z, then a planar direction sent to +y.

    Any four planes miss the bands of half-width ``beta3`` around some axis
    (the bands cover at most ``4 sin`` of the sphere), and any six lines in
    the plane leave one of twelve directions at angle >= ``beta2``.
    """

    def __init__(self, grid=AXIS_GRID, count2=EDGE_DIRECTIONS, beta2=BETA2):
        self.axes = face_grid_axes(grid)
        self.rho = face_grid_radius(3, grid)
        self.beta3 = math.asin(0.25) - self.rho
        if self.beta3 <= 0:
            raise ParameterError("axis grid too coarse for a facet angle guarantee")
        if count2 <= 6 or math.pi / count2 < 2 * beta2 - 1e-15:
            raise ParameterError("too few planar directions for the edge angle guarantee")
        self.D2 = DirectionSet(count2, beta2)
        self.beta2 = beta2
        self.count2 = count2
        self.R3 = np.stack([householder_to_last(a) for a in self.axes])
        self.R2 = self.D2.rotations()
        # the axis along +z, present for odd grids; its frame with direction 0 is the identity
        self.z_axis = int(np.argmax(self.axes[:, 2]))

    def __len__(self):
        return len(self.axes) * self.count2

    def rotations(self, fids):
        fids = np.asarray(fids, dtype=np.int64)
        a, j = np.divmod(fids, self.count2)
        E = np.tile(np.eye(3), (len(fids), 1, 1))
        E[:, :2, :2] = self.R2[j]
        return E @ self.R3[a]

    def distance_multiple(self):
        """Bound on dist(q, simplex) / eps for simplices counted by the upper estimate."""
        return 1.0 / (math.sin(self.beta2) * math.sin(self.beta3))

    def assign(self, V):
        """Frame id per simplex: the identity if valid, else best facet angle, then best edge angle."""
        V = np.asarray(V, dtype=float).reshape(-1, 4, 3)
        n = len(V)
        if n == 0:
            return np.zeros(0, np.int64)
        nrm, _ = simplex_facets(V)
        score = np.abs(np.einsum("nft,at->nfa", nrm, self.axes)).min(axis=1)
        a = np.argmax(score, axis=1)
        if np.any(score[np.arange(n), a] < math.sin(self.beta3) - 1e-12):
            raise ValidationError("simplex without a valid frame (degenerate input)")
        W = np.einsum("nij,nvj->nvi", self.R3[a], V - CENTER3)
        i, j = np.triu_indices(4, 1)
        e = W[:, j, :2] - W[:, i, :2]
        ang = np.arctan2(e[..., 1], e[..., 0])
        gap = line_angle_gap(self.D2.angles[None, None, :], ang[:, :, None]).min(axis=1)
        b = np.argmax(gap, axis=1)
        if np.any(gap[np.arange(n), b] < self.beta2 - 1e-12):
            raise ValidationError("simplex without a valid frame (degenerate input)")
        # the identity frame wins whenever it is valid
        z = self.z_axis
        if np.allclose(self.R3[z], np.eye(3)):
            ez = np.abs(nrm[..., 2]).min(axis=1) >= math.sin(self.beta3) - 1e-12
            ei = np.triu_indices(4, 1)
            e0 = V[:, ei[1], :2] - V[:, ei[0], :2]
            g0 = line_angle_gap(math.pi / 2, np.arctan2(e0[..., 1], e0[..., 0])).min(axis=1)
            ident = ez & (g0 >= self.beta2 - 1e-12)
            a = np.where(ident, z, a)
            b = np.where(ident, 0, b)
        return a * self.count2 + b

    def is_valid(self, V, fid):
        V = np.asarray(V, dtype=float).reshape(4, 3)
        R = self.rotations([fid])[0]
        nrm, _ = simplex_facets(V[None])
        nz = np.abs(nrm[0] @ R[2])
        if nz.min() < math.sin(self.beta3) - 1e-12:
            return False
        W = (V - CENTER3) @ R.T
        i, j = np.triu_indices(4, 1)
        e = W[j, :2] - W[i, :2]
        ang = np.arctan2(e[:, 1], e[:, 0])
        return bool(line_angle_gap(math.pi / 2, ang).min() >= self.beta2 - 1e-12)


DEFAULT_FRAMES = None


def default_frames():
    global DEFAULT_FRAMES
    if DEFAULT_FRAMES is None:
        DEFAULT_FRAMES = FrameFamily()
    return DEFAULT_FRAMES


def frame_assign(V, fam=None):
    """(frame ids, rotations) for simplices ``V`` (n, 4, 3); rotations act about the cube center."""
    fam = fam or default_frames()
    f = fam.assign(V)
    return f, fam.rotations(f)


def frame_xspans(V, fam=None):
    """x-span of each simplex in its frame, relative to the cube center.

    Returns (xl, xr, rot, center) so that ``rot[:, 0] @ (q - center)`` is the
    frame abscissa of q.
    """
    V = np.asarray(V, dtype=float).reshape(-1, 4, 3)
    _, R = frame_assign(V, fam)
    xs = np.einsum("nt,nvt->nv", R[:, 0, :], V - CENTER3) if len(V) else np.zeros((0, 4))
    return xs.min(axis=1), xs.max(axis=1), R, CENTER3


@dataclass(frozen=True)
class SignedPrism:
    """z-vertical prism under a facet plane over a trapezoid, in frame coordinates.

    ``y_strict``/``z_strict`` make the edge and facet ceilings open.
    """

    p: tuple
    q: tuple
    x_lo: float
    x_hi: float
    closed_lo: bool
    closed_hi: bool
    plane: tuple
    sign: int
    y_strict: bool
    z_strict: bool

    def contains(self, pt):
        pt = np.atleast_2d(pt)
        x, y, z = pt[:, 0], pt[:, 1], pt[:, 2]
        inx = ((x > self.x_lo) | (self.closed_lo & (x == self.x_lo))) & \
              ((x < self.x_hi) | (self.closed_hi & (x == self.x_hi)))
        top = lerp_at(self.p[0], self.p[1], self.q[0], self.q[1], x)
        iny = (y < top) if self.y_strict else (y <= top)
        gx, gy, h = self.plane
        ceil = gx * x + gy * y + h
        inz = (z < ceil) if self.z_strict else (z <= ceil)
        return inx & iny & inz & (y >= BASELINE) & (z >= BASELINE)


def _prisms_in_frames(V, R):
    """Prism arrays for simplices ``V`` (n, 4, 3) under rotations ``R`` (n, 3, 3)."""
    n = len(V)
    W = np.einsum("nij,nvj->nvi", R, V - CENTER3) + CENTER3
    nrm, off = simplex_facets(V)
    nr = np.einsum("nij,nfj->nfi", R, nrm)
    offr = off - nrm @ CENTER3 + nr @ CENTER3
    others = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
    tri2 = W[:, others, :2].reshape(-1, 3, 2)
    pc = triangle_pieces(tri2)
    tri = pc["tri"].astype(np.int64)
    s, f = np.divmod(tri, 4)
    nx, ny, nz = nr[s, f, 0], nr[s, f, 1], nr[s, f, 2]
    # inward normals: the simplex lies below the facet plane when nz < 0
    upper = nz < 0
    tsign = pc["sign"].astype(np.int64)
    slope = (pc["qy"] - pc["py"]) / (pc["qx"] - pc["px"])
    return dict(simplex=s, facet=f, px=pc["px"], py=pc["py"], qx=pc["qx"], qy=pc["qy"],
                xl=pc["xl"], xr=pc["xr"], cl=pc["cl"].astype(bool), cr=pc["cr"].astype(bool),
                c=slope, he=pc["py"] - slope * pc["px"],
                gx=-nx / nz, gy=-ny / nz, h=offr[s, f] / nz,
                sign=np.where(upper, tsign, -tsign), y_strict=tsign < 0, z_strict=~upper,
                R=R[s])


def prism_arrays(V, fam=None):
    """Prisms of every simplex in its assigned frame, as flat arrays."""
    V = as_simplices(V) if len(V) else np.zeros((0, 4, 3))
    fids, R = frame_assign(V, fam)
    pr = _prisms_in_frames(V, R)
    pr["frame"] = fids[pr["simplex"]] if len(V) else np.zeros(0, np.int64)
    return pr


def decompose_simplex3(sigma, frame=None, fam=None):
    """Twelve signed prisms of one simplex in the given (or assigned) frame."""
    fam = fam or default_frames()
    V = as_simplices(np.asarray(sigma, dtype=float).reshape(1, 4, 3))
    if frame is None:
        frame = int(fam.assign(V)[0])
    elif not fam.is_valid(V[0], frame):
        raise ValidationError("frame is not valid for this simplex")
    pr = _prisms_in_frames(V, fam.rotations([frame]))
    out = []
    for i in range(len(pr["px"])):
        out.append(SignedPrism((pr["px"][i], pr["py"][i]), (pr["qx"][i], pr["qy"][i]),
                               pr["xl"][i], pr["xr"][i], bool(pr["cl"][i]), bool(pr["cr"][i]),
                               (pr["gx"][i], pr["gy"][i], pr["h"][i]), int(pr["sign"][i]),
                               bool(pr["y_strict"][i]), bool(pr["z_strict"][i])))
    return out


def to_frame(P, R):
    return (np.atleast_2d(P) - CENTER3) @ R.T + CENTER3


def prism_sum(sigma, pts, frame=None, fam=None):
    """Signed count of prisms containing each point (points in the input frame)."""
    fam = fam or default_frames()
    V = as_simplices(np.asarray(sigma, dtype=float).reshape(1, 4, 3))
    if frame is None:
        frame = int(fam.assign(V)[0])
    P = to_frame(pts, fam.rotations([frame])[0])
    total = np.zeros(len(P), np.int64)
    for pr in decompose_simplex3(V[0], frame, fam):
        total += pr.sign * pr.contains(P)
    return total


def prism_margins(pr, Q):
    """For every query and prism: x-span membership and signed distances to both planes."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    P = np.einsum("nij,mj->mni", pr["R"], Q - CENTER3) + CENTER3
    x, y, z = P[..., 0], P[..., 1], P[..., 2]
    inx = ((x > pr["xl"]) | (pr["cl"] & (x == pr["xl"]))) & \
          ((x < pr["xr"]) | (pr["cr"] & (x == pr["xr"])))
    mA = (pr["c"] * x + pr["he"] - y) / np.sqrt(1 + pr["c"] ** 2)
    mB = (pr["gx"] * x + pr["gy"] * y + pr["h"] - z) / np.sqrt(1 + pr["gx"] ** 2 + pr["gy"] ** 2)
    return inx, mA, mB


class Simplex3Structure:
    def __init__(self, V, eps, m, fam: FrameFamily | None = None, tune_factor=1.0):
        self.eps = eps = check_epsilon(eps)
        self.fam = fam = fam or default_frames()
        V = as_simplices(V) if len(V) else np.zeros((0, 4, 3))
        self.V = V
        self.n = len(V)
        self.d = 3
        pr = prism_arrays(V, fam)
        self.prisms = pr
        self.frames = np.unique(pr["frame"])
        self.Rf = fam.rotations(self.frames)
        gid = pr["frame"] * 2 + (pr["sign"] < 0)
        self.segs = SegmentForest(gid, pr["xl"], pr["xr"], pr["cl"], pr["cr"])
        groups = self.segs.groups
        self.group_row = np.searchsorted(self.frames, groups // 2).astype(np.int64)
        self.group_neg = (groups % 2).astype(np.int64)
        op, oi = self.segs.copy_item, self.segs.copy_inst
        self.n_copies = N = len(op)
        m_eff = max(1, int(m)) * max(1, math.ceil(math.log2(max(self.n, 2))))
        self.params: Params = choose_parameters_simplex3(N, m_eff, eps, tune_factor)
        # bounded-fuzz dual levels are used in every regime
        k0 = depth_for(ROOT_SIDE, self.params.delta1)
        self.k = k = clamp_depth(k0, N, 3)
        self.params = coarsened(self.params, k0 - k)
        c, he = pr["c"][op], pr["he"][op]
        gx, gy, h = pr["gx"][op], pr["gy"][op], pr["h"][op]
        nA = np.sqrt(1 + c ** 2)
        nB = np.sqrt(1 + gx ** 2 + gy ** 2)
        # constraints: edge plane, facet plane, then filters for the node's
        # x-range and the rotated unit cube
        A = np.zeros((N, 10, 3))
        B = np.zeros((N, 10))
        A[:, 0, 0], A[:, 0, 1] = c / nA, -1 / nA
        A[:, 1, 0], A[:, 1, 1], A[:, 1, 2] = gx / nB, gy / nB, -1 / nB
        A[:, 2, 0], A[:, 3, 0] = 1.0, -1.0
        B[:, 0], B[:, 1] = -he / nA, -h / nB
        B[:, 2] = np.clip(self.segs.inst_lo[oi], -4.0, 4.0)
        B[:, 3] = -np.clip(self.segs.inst_hi[oi], -4.0, 4.0)
        Rc = self.Rf[self.group_row[np.searchsorted(groups, gid[op])]] if N else np.zeros((0, 3, 3))
        for i in range(3):
            r = Rc[:, :, i]
            rc = r @ CENTER3
            A[:, 4 + 2 * i], B[:, 4 + 2 * i] = r, rc - 0.5
            A[:, 5 + 2 * i], B[:, 5 + 2 * i] = -r, -rc - 0.5
        self.constraints = (A, B)
        I = max(self.segs.n_inst, 1)
        self.tree = t = PrimalTree(A, B, oi, np.tile(ROOT_LO, (I, 1)), np.full(I, ROOT_SIDE), k,
                                   want_pairs=True, nhard=2)
        s = ROOT_SIDE * 0.5 ** k
        self.cell_side = s
        S = max(float(np.abs(c).max(initial=0.0)), 1e-6) * (1 + 1e-9)
        G = max(float(np.abs(np.r_[gx, gy]).max(initial=0.0)), 1e-6) * (1 + 1e-9)
        self.box2 = (np.array([-S, -(1 + S) * s]), np.array([2 * S, (1 + 2 * S) * s]))
        self.box3 = (np.array([-G, -G, -(1 + 2 * G) * s]), np.array([2 * G, 2 * G, (1 + 4 * G) * s]))
        self.K2 = dual_depth(s, eps, [2 * S], 1 + 2 * S)
        self.K3 = dual_depth(s, eps, [2 * G, 2 * G], 1 + 4 * G)
        self._build_duals(t, c, he, gx, gy, h)

    def _build_duals(self, t, c, he, gx, gy, h):
        node_slot = np.full(t.n_nodes, -1, np.int64)
        pn = t.pair_node
        used, slot = np.unique(pn, return_inverse=True)
        node_slot[used] = np.arange(len(used))
        self.node_slot = node_slot
        nslot = len(used)
        o = t.pair_obj
        flags = t.pair_flag
        lo, _ = t.cell_lo(pn) if len(pn) else (np.zeros((0, 3)), None)
        ptA = np.stack([c[o], -(c[o] * lo[:, 0] + he[o] - lo[:, 1])], axis=1) if len(o) else np.zeros((0, 2))
        ptB = np.stack([gx[o], gy[o], -(gx[o] * lo[:, 0] + gy[o] * lo[:, 1] + h[o] - lo[:, 2])],
                       axis=1) if len(o) else np.zeros((0, 3))

        def forest(sel, pts, box, depth):
            tab = np.full(nslot, -1, np.int64)
            u = np.unique(slot[sel])
            tab[u] = np.arange(len(u))
            f = DualForest(tab[slot[sel]], pts[sel], np.zeros(int(sel.sum()), bool), len(u),
                           box[0], box[1], depth)
            return tab, f

        self.tabA, self.fA = forest(flags == 1, ptA, self.box2, self.K2)
        self.tabB, self.fB = forest(flags == 2, ptB, self.box3, self.K3)
        both = flags == 3
        self.tab1, self.f1 = forest(both, ptB, self.box3, self.K3)
        # second level: every first-level node holds the edge points below it
        f1 = self.f1
        if both.any():
            tree = self.tab1[slot[both]]
            nk = 1 << self.K3
            co = np.clip(np.floor((ptB[both] - f1.lo_d) / f1.size_d * nk).astype(np.int64), 0, nk - 1)
            key = (tree << (3 * self.K3)) | morton_encode(co, self.K3)
            ids = []
            for L in range(self.K3 + 1):
                a, b = f1.level_off[L], f1.level_off[L + 1]
                kl = key >> (3 * (self.K3 - L))
                ids.append(a + np.searchsorted(f1.node_key[a:b], kl))
            ids = np.concatenate(ids)
            pts2 = np.tile(ptA[both], (self.K3 + 1, 1))
            self.f2 = DualForest(ids, pts2, np.zeros(len(ids), bool), f1.n_nodes, self.box2[0],
                                 self.box2[1], self.K2)
        else:
            self.f2 = DualForest.empty(2)

    @property
    def n_primal_nodes(self):
        return self.tree.n_nodes

    @property
    def n_dual_nodes(self):
        return self.fA.n_nodes + self.fB.n_nodes + self.f1.n_nodes + self.f2.n_nodes

    def query_parts(self, Q):
        """(lo, hi) per query for positive (column 0) and negative (column 1) prisms."""
        Q = check_in_cube(Q, 3)
        m = len(Q)
        lo2 = np.zeros((m, 2), np.int64)
        hi2 = np.zeros((m, 2), np.int64)
        if self.n == 0 or m == 0:
            return lo2, hi2
        X = np.einsum("fij,mj->fmi", self.Rf, Q - CENTER3) + CENTER3
        qi, gi, ii = self.segs.pairs(X[:, :, 0], self.group_row)
        pts = np.ascontiguousarray(X[self.group_row[gi], qi])
        t = self.tree
        lo, hi = K.simplex_query(pts, ii, t.root_lo, t.root_side, t.k, t.node_c, t.node_child,
                                 self.node_slot, self.tabA, self.tabB, self.tab1,
                                 self.fA.arrays(), self.fB.arrays(), self.f1.arrays(),
                                 self.f2.arrays())
        flat = qi * 2 + self.group_neg[gi]
        lo2 += np.bincount(flat, weights=lo, minlength=2 * m).reshape(m, 2).astype(np.int64)
        hi2 += np.bincount(flat, weights=hi, minlength=2 * m).reshape(m, 2).astype(np.int64)
        return lo2, hi2

    def query_many(self, Q):
        lo2, hi2 = self.query_parts(Q)
        # near an edge shared by two projected facets one simplex can add 2 or -1;
        # the true depth always lies in [0, n]
        lo = np.maximum(lo2[:, 0] - hi2[:, 1], 0)
        hi = np.minimum(hi2[:, 0] - lo2[:, 1], self.n)
        return lo, hi

    def query(self, q):
        lo, hi = self.query_many(np.asarray(q, dtype=float)[None, :])
        return DepthEstimate(int(lo[0]), int(hi[0]))


def build_simplex3_structure(S, eps, m, tune_factor=1.0, fam=None):
    V = S.objects if hasattr(S, "objects") else S
    return Simplex3Structure(np.asarray(V, dtype=float).reshape(-1, 4, 3), eps, m, fam,
                             tune_factor)


def query_simplex3(st, q):
    return st.query(q)
