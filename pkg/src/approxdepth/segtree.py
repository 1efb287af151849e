"""Segment trees over x-spans with open or closed endpoints.

The elementary intervals of sorted endpoints e_0 < ... < e_{m-1} are numbered
so that leaf ``2i+1`` is the point ``e_i``, leaf ``2i`` is the open gap just
before it and leaf ``2m`` is everything after the last endpoint.  Nodes use
heap numbering with the leaves at ``P + leaf``.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def canonical_nodes(lo, hi, P):
    """Canonical covers of leaf ranges [lo, hi]; returns (item, node) pairs."""
    n = lo.shape[0]
    cap = max(16, 4 * n)
    items = np.empty(cap, np.int64)
    nodes = np.empty(cap, np.int64)
    cnt = 0
    for i in range(n):
        if hi[i] < lo[i]:
            continue
        l = lo[i] + P
        r = hi[i] + P + 1
        while l < r:
            if cnt + 2 > items.shape[0]:
                ni = np.empty(2 * items.shape[0], np.int64)
                nn = np.empty(2 * items.shape[0], np.int64)
                ni[:cnt] = items[:cnt]
                nn[:cnt] = nodes[:cnt]
                items = ni
                nodes = nn
            if l & 1:
                items[cnt] = i
                nodes[cnt] = l
                cnt += 1
                l += 1
            if r & 1:
                r -= 1
                items[cnt] = i
                nodes[cnt] = r
                cnt += 1
            l >>= 1
            r >>= 1
    return items[:cnt], nodes[:cnt]


class SegmentTree:
    """Static segment tree; each stored interval is attached to its canonical nodes."""

    def __init__(self, xl, xr, closed_lo, closed_hi):
        xl = np.asarray(xl, dtype=float)
        xr = np.asarray(xr, dtype=float)
        self.endpoints = np.unique(np.r_[xl, xr])
        m = len(self.endpoints)
        self.n_leaves = 2 * m + 1
        P = 1
        while P < self.n_leaves:
            P *= 2
        self.P = P
        il = np.searchsorted(self.endpoints, xl)
        ir = np.searchsorted(self.endpoints, xr)
        lo = np.where(closed_lo, 2 * il + 1, 2 * il + 2)
        hi = np.where(closed_hi, 2 * ir + 1, 2 * ir)
        self.items, self.nodes = canonical_nodes(lo.astype(np.int64), hi.astype(np.int64), P)

    def node_range(self, nodes):
        """Closed x-hull (lo, hi) of the elementary intervals under each heap node."""
        nodes = np.asarray(nodes, dtype=np.int64)
        h = self.P.bit_length() - 1
        lvl = np.floor(np.log2(nodes)).astype(np.int64)
        a = (nodes << (h - lvl)) - self.P
        b = ((nodes + 1) << (h - lvl)) - 1 - self.P
        e = np.r_[-np.inf, self.endpoints, np.inf]
        # leaf 2i+1 is e_i and leaf 2i is the gap (e_{i-1}, e_i); e is shifted by one
        lo = e[np.where(a % 2 == 1, (a - 1) // 2 + 1, a // 2)]
        bi = np.minimum(b, self.n_leaves - 1)
        hi = e[np.where(bi % 2 == 1, (bi - 1) // 2 + 1, bi // 2 + 1)]
        return lo, hi

    def leaf(self, x):
        x = np.asarray(x, dtype=float)
        e = self.endpoints
        i = np.searchsorted(e, x)
        hit = (i < len(e)) & (e[np.minimum(i, len(e) - 1)] == x) if len(e) else np.zeros(x.shape, bool)
        return np.where(hit, 2 * i + 1, 2 * i)

    def path(self, x):
        """Heap indices of the nodes on the root path of the leaf holding ``x``, (m, depth)."""
        node = self.leaf(x) + self.P
        depth = int(np.log2(self.P)) + 1
        return node[:, None] >> np.arange(depth)[None, :]

    def stabbed(self, x):
        """Items whose interval contains each x (for testing)."""
        out = []
        for row in self.path(np.atleast_1d(x)):
            out.append(np.sort(self.items[np.isin(self.nodes, row)]))
        return out


@njit(cache=True)
def _forest_pairs(X, group_frame, ends, ends_off, Ps, node_inst, inst_off):
    G = group_frame.shape[0]
    m = X.shape[1]
    cap = max(16, m * G * 4)
    q_out = np.empty(cap, np.int64)
    g_out = np.empty(cap, np.int64)
    i_out = np.empty(cap, np.int64)
    cnt = 0
    for r in range(m):
        for g in range(G):
            x = X[group_frame[g], r]
            e = ends[ends_off[g]:ends_off[g + 1]]
            i = np.searchsorted(e, x)
            if i < e.shape[0] and e[i] == x:
                leaf = 2 * i + 1
            else:
                leaf = 2 * i
            node = Ps[g] + leaf
            base = inst_off[g]
            while node >= 1:
                inst = node_inst[base + node]
                if inst >= 0:
                    if cnt == q_out.shape[0]:
                        q2 = np.empty(2 * cnt, np.int64)
                        g2 = np.empty(2 * cnt, np.int64)
                        i2 = np.empty(2 * cnt, np.int64)
                        q2[:cnt] = q_out
                        g2[:cnt] = g_out
                        i2[:cnt] = i_out
                        q_out, g_out, i_out = q2, g2, i2
                    q_out[cnt] = r
                    g_out[cnt] = g
                    i_out[cnt] = inst
                    cnt += 1
                node >>= 1
    return q_out[:cnt], g_out[:cnt], i_out[:cnt]


class SegmentForest:
    """One segment tree per group id; every non-empty node becomes an instance.

    ``copy_item``/``copy_inst`` list the stored copies of the intervals.
    """

    def __init__(self, gid, xl, xr, closed_lo, closed_hi):
        gid = np.asarray(gid, dtype=np.int64)
        self.groups = np.unique(gid)
        ends, ends_off, Ps, node_inst, inst_off = [], [0], [], [], [0]
        items, insts, rlo, rhi = [], [], [], []
        n_inst = 0
        self.trees = []
        for g in self.groups:
            sel = np.flatnonzero(gid == g)
            st = SegmentTree(xl[sel], xr[sel], closed_lo[sel], closed_hi[sel])
            self.trees.append(st)
            ends.append(st.endpoints)
            ends_off.append(ends_off[-1] + len(st.endpoints))
            Ps.append(st.P)
            used, inv = np.unique(st.nodes, return_inverse=True)
            table = np.full(2 * st.P, -1, np.int64)
            table[used] = n_inst + np.arange(len(used))
            node_inst.append(table)
            inst_off.append(inst_off[-1] + 2 * st.P)
            lo, hi = st.node_range(used)
            rlo.append(lo)
            rhi.append(hi)
            items.append(sel[st.items])
            insts.append(n_inst + inv.reshape(-1))
            n_inst += len(used)
        self.n_inst = n_inst
        cat = lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt)
        self.ends = cat(ends, float)
        self.ends_off = np.asarray(ends_off, np.int64)
        self.Ps = np.asarray(Ps, np.int64)
        self.node_inst = cat(node_inst, np.int64)
        self.inst_off = np.asarray(inst_off, np.int64)
        self.copy_item = cat(items, np.int64)
        self.copy_inst = cat(insts, np.int64)
        self.inst_lo = cat(rlo, float)
        self.inst_hi = cat(rhi, float)

    def __len__(self):
        return len(self.groups)

    def pairs(self, X, group_frame):
        """(query, group, instance) for the instances on each query's paths.

        ``X`` (F, m) holds the query abscissae in every frame and
        ``group_frame`` maps each group to its frame row.
        """
        return _forest_pairs(np.ascontiguousarray(X, dtype=float),
                             np.ascontiguousarray(group_frame, dtype=np.int64), self.ends,
                             self.ends_off, self.Ps, self.node_inst, self.inst_off)
