"""Pruned primal trees and forests of dual trees.

Both are stored as flat level-major arrays so that the compiled kernels can
walk them without Python objects.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K

DENSE_LIMIT = 1 << 24
KEY_BITS = 62


def morton_encode(coords, nbits):
    """Interleave integer coordinates (P, D) into Morton codes, axis 0 lowest."""
    coords = np.asarray(coords, dtype=np.int64)
    D = coords.shape[1]
    code = np.zeros(coords.shape[0], np.int64)
    for b in range(nbits):
        for t in range(D):
            code |= ((coords[:, t] >> b) & 1) << (b * D + t)
    return code


def morton_decode(code, D, nbits):
    code = np.asarray(code, dtype=np.int64)
    coords = np.zeros((code.shape[0], D), np.int64)
    for b in range(nbits):
        for t in range(D):
            coords[:, t] |= ((code >> (b * D + t)) & 1) << b
    return coords


class PrimalTree:
    """Forest of pruned 2^d-ary trees, one per instance root box.

    ``A`` (N, J, d) and ``B`` (N, J) describe each object as the conjunction of
    ``J`` closed halfspaces; ``inst`` assigns objects to root boxes.  The
    constraints from ``nhard`` on only restrict where queries can land.  Nodes are
    stored level by level; the children of an expanded node are contiguous
    and ordered by child index.
    """

    def __init__(self, A, B, inst, root_lo, root_side, k, want_pairs=False, dense=None,
                 nhard=None):
        A = np.ascontiguousarray(A, dtype=float)
        B = np.ascontiguousarray(B, dtype=float)
        self.root_lo = np.ascontiguousarray(np.atleast_2d(root_lo), dtype=float)
        self.root_side = np.ascontiguousarray(np.atleast_1d(root_side), dtype=float)
        self.inst = np.ascontiguousarray(inst, dtype=np.int64)
        I, d = self.root_lo.shape
        self.d, self.k, self.n_inst = d, int(k), I
        if A.ndim == 2:
            A = A[:, None, :]
            B = B[:, None]
        if A.shape[0] == 0:
            A = np.zeros((0, 1, d))
            B = np.zeros((0, 1))
        if I > 1 and (I - 1).bit_length() + d * k > KEY_BITS:
            raise ValueError("primal tree keys overflow; reduce depth or instances")
        per_level = np.array([I << (d * l) for l in range(k + 1)], dtype=np.int64)
        off = np.zeros(k + 2, np.int64)
        off[1:] = np.cumsum(per_level)
        if dense is None:
            dense = off[-1] <= DENSE_LIMIT
        (c_dense, x_dense, b_dense, c_lvl, c_key, x_lvl, x_key,
         p_obj, p_key, p_flag) = K.primal_build(A, B, self.inst, self.root_lo, self.root_side,
                                                self.k, bool(dense), off, bool(want_pairs),
                                                A.shape[1] if nhard is None else int(nhard))
        nch = 1 << d
        keys = [np.arange(I, dtype=np.int64)]
        expanded = []
        for lvl in range(k + 1):
            if lvl < k:
                if dense:
                    e = np.flatnonzero(x_dense[off[lvl]:off[lvl + 1]]).astype(np.int64)
                else:
                    e = np.unique(x_key[x_lvl == lvl])
                expanded.append(e)
                keys.append(((e[:, None] << d) | np.arange(nch, dtype=np.int64)).ravel())
        sizes = np.array([len(x) for x in keys], dtype=np.int64)
        node_off = np.zeros(k + 2, np.int64)
        node_off[1:] = np.cumsum(sizes)
        total = int(node_off[-1])
        self.level_off = node_off
        self.node_key = np.concatenate(keys)
        self.node_lvl = np.repeat(np.arange(k + 1, dtype=np.int64), sizes)
        self.node_c = np.zeros(total, np.int64)
        self.node_b = np.zeros(total, np.int64)
        self.node_child = np.full(total, -1, np.int64)
        for lvl in range(k + 1):
            s = keys[lvl]
            base = node_off[lvl]
            if dense:
                self.node_c[base:base + len(s)] = c_dense[off[lvl] + s]
            else:
                u, cnt = np.unique(c_key[c_lvl == lvl], return_counts=True)
                pos = np.searchsorted(s, u)
                self.node_c[base + pos] = cnt
            if lvl < k:
                e = expanded[lvl]
                pos = np.searchsorted(s, e)
                self.node_child[base + pos] = node_off[lvl + 1] + np.arange(len(e), dtype=np.int64) * nch
        sk = keys[k]
        basek = node_off[k]
        if dense:
            self.node_b[basek:basek + len(sk)] = b_dense[sk]
        else:
            u, cnt = np.unique(p_key, return_counts=True)
            self.node_b[basek + np.searchsorted(sk, u)] = cnt
        if want_pairs:
            self.pair_obj = p_obj
            self.pair_key = p_key
            self.pair_flag = p_flag
        self.n_nodes = total

    @property
    def pair_node(self):
        sk = self.node_key[self.level_off[self.k]:self.level_off[self.k + 1]]
        return self.level_off[self.k] + np.searchsorted(sk, self.pair_key)

    def cell_lo(self, node):
        """Lower corner and side of the cells of the given node indices."""
        node = np.asarray(node, dtype=np.int64)
        lvl = self.node_lvl[node]
        key = self.node_key[node]
        d = self.d
        inst = key >> (d * lvl)
        morton = key & ((np.int64(1) << (d * lvl)) - 1)
        coords = morton_decode(morton, d, int(lvl.max()) if len(lvl) else 0)
        side = self.root_side[inst] * (0.5 ** lvl)
        return self.root_lo[inst] + coords * side[:, None], side

    def locate(self, Q, qinst):
        Q = np.ascontiguousarray(Q, dtype=float)
        return K.primal_locate(Q, np.ascontiguousarray(qinst, dtype=np.int64), self.root_lo,
                               self.root_side, self.k, self.node_c, self.node_child)

    def path_sums(self):
        """Sum of containment counters from the root to every node."""
        ps = self.node_c.copy()
        nch = 1 << self.d
        for lvl in range(self.k):
            a, b = self.level_off[lvl], self.level_off[lvl + 1]
            par = np.arange(a, b)
            par = par[self.node_child[a:b] >= 0]
            ch = (self.node_child[par][:, None] + np.arange(nch)).ravel()
            ps[ch] += np.repeat(ps[par], nch)
        return ps


class DualForest:
    """Many pruned 2^D-ary trees over a common dual box.

    Points carry a dense tree id, coordinates and a sign; tree ``t`` has its
    root at node ``t``.  Each node stores the counts of positive and negative
    points inside its box.
    """

    def __init__(self, tree_id, pts, pos, n_trees, lo_d, size_d, depth):
        tree_id = np.asarray(tree_id, dtype=np.int64)
        pts = np.asarray(pts, dtype=float)
        pos = np.asarray(pos, dtype=bool)
        lo_d = np.asarray(lo_d, dtype=float)
        size_d = np.asarray(size_d, dtype=float)
        D = lo_d.shape[0]
        nk = 1 << int(depth)
        co = np.floor((pts - lo_d) / size_d * nk).astype(np.int64)
        np.clip(co, 0, nk - 1, out=co)
        key = (tree_id << (D * int(depth))) | morton_encode(co, int(depth))
        self._assemble(np.sort((key << 1) | pos), n_trees, lo_d, size_d, depth)

    @classmethod
    def from_signed_keys(cls, skeys, n_trees, lo_d, size_d, depth):
        """Build from sorted keys ``(tree << D*depth | morton) << 1 | positive``."""
        self = cls.__new__(cls)
        self._assemble(skeys, n_trees, lo_d, size_d, depth)
        return self

    def _assemble(self, skeys, n_trees, lo_d, size_d, depth):
        self.lo_d = np.ascontiguousarray(lo_d, dtype=float)
        self.size_d = np.ascontiguousarray(size_d, dtype=float)
        D = self.lo_d.shape[0]
        self.D, self.K, self.n_trees = D, int(depth), int(n_trees)
        n_trees = self.n_trees
        Kd = self.K
        if n_trees > 1 and (n_trees - 1).bit_length() + D * Kd + 1 > KEY_BITS:
            raise ValueError("dual tree keys overflow; reduce depth or trees")
        key, cpos, cneg, cs, ce, off = K.forest_assemble(np.ascontiguousarray(skeys, dtype=np.int64),
                                                         D, Kd)
        self.level_off = off
        n_roots = off[1] - off[0]
        if n_roots != self.n_trees or (self.n_trees and not np.array_equal(key[:n_roots],
                                                                          np.arange(self.n_trees))):
            raise ValueError("dual tree ids must be dense and non-empty")
        self.cpos, self.cneg, self.cstart, self.cend = cpos, cneg, cs, ce
        self.cidx = key & ((1 << D) - 1)
        self.node_key = key
        self.n_nodes = int(off[-1])

    @classmethod
    def empty(cls, D):
        return cls(np.zeros(0, np.int64), np.zeros((0, D)), np.zeros(0, bool), 0,
                   np.zeros(D), np.ones(D), 0)

    def arrays(self):
        return (self.lo_d, self.size_d, self.K, self.cpos, self.cneg,
                self.cstart, self.cend, self.cidx)
