"""Compiled inner loops shared by every tree structure.

Objects reaching the primal kernels are conjunctions of ``J`` closed
halfspaces ``A[o, j] . x >= B[o, j]``.  Cells are boxes addressed by a Morton
key inside an instance root box; the child index ``ch`` has bit ``t`` equal to
the next bit of the cell coordinate along axis ``t``.
"""

import numpy as np
from numba import njit

TOL = 1e-12


@njit(cache=True)
def _grow(a, n):
    out = np.empty(max(2 * a.shape[0], 16), a.dtype)
    out[:n] = a[:n]
    return out


@njit(cache=True)
def primal_build(A, B, inst, root_lo, root_side, k, dense, off, want_pairs, nhard):
    """Insert every object into the pruned primal trees.

    Constraints from index ``nhard`` on are filters: they only discard the
    cells they miss and never make a cell crossed.

    Dense mode accumulates into arrays indexed by ``off[level] + key``; sparse
    mode emits (level, key) events that the caller aggregates.  Deep-leaf
    crossings at level ``k`` are emitted as (object, key, flags) triples where
    bit ``j`` of flags marks constraint ``j`` as crossing.
    """
    N, J, d = A.shape
    nch = 1 << d
    if dense:
        total = off[k + 1]
        c_dense = np.zeros(total, np.int64)
        x_dense = np.zeros(total, np.uint8)
        b_dense = np.zeros(off[k + 1] - off[k], np.int64)
    else:
        c_dense = np.zeros(1, np.int64)
        x_dense = np.zeros(1, np.uint8)
        b_dense = np.zeros(1, np.int64)
    c_lvl = np.empty(16, np.int64)
    c_key = np.empty(16, np.int64)
    nc = 0
    x_lvl = np.empty(16, np.int64)
    x_key = np.empty(16, np.int64)
    nx = 0
    p_obj = np.empty(16, np.int64)
    p_key = np.empty(16, np.int64)
    p_flag = np.empty(16, np.int64)
    npairs = 0

    cap = (k + 1) * nch + 2
    st_lvl = np.empty(cap, np.int64)
    st_key = np.empty(cap, np.int64)
    st_co = np.empty((cap, d), np.int64)
    # constraints not yet known to contain the cell
    st_mask = np.empty(cap, np.int64)
    negs = np.empty(J)
    poss = np.empty(J)
    lo = np.empty(d)
    pc = np.empty(d, np.int64)
    scale = np.empty(k + 1)
    for l in range(k + 1):
        scale[l] = 0.5 ** l

    for o in range(N):
        i = inst[o]
        for j in range(J):
            ns = 0.0
            ps = 0.0
            for t in range(d):
                v = A[o, j, t]
                if v < 0:
                    ns += v
                else:
                    ps += v
            negs[j] = ns
            poss[j] = ps
        sp = 0
        st_lvl[0] = 0
        st_key[0] = i
        for t in range(d):
            st_co[0, t] = 0
        st_mask[0] = (1 << J) - 1
        sp = 1
        while sp > 0:
            sp -= 1
            lvl = st_lvl[sp]
            key = st_key[sp]
            mask = st_mask[sp]
            w = root_side[i] * scale[lvl]
            for t in range(d):
                lo[t] = root_lo[i, t] + st_co[sp, t] * w
            allin = True
            out = False
            flags = 0
            for j in range(J):
                if not (mask >> j) & 1:
                    continue
                f = -B[o, j]
                for t in range(d):
                    f += A[o, j, t] * lo[t]
                fmin = f + negs[j] * w
                fmax = f + poss[j] * w
                if fmax < -TOL:
                    out = True
                    break
                if fmin > TOL:
                    mask &= ~(1 << j)
                elif j < nhard:
                    allin = False
                    flags |= 1 << j
            if out:
                continue
            if allin:
                if dense:
                    c_dense[off[lvl] + key] += 1
                else:
                    if nc == c_lvl.shape[0]:
                        c_lvl = _grow(c_lvl, nc)
                        c_key = _grow(c_key, nc)
                    c_lvl[nc] = lvl
                    c_key[nc] = key
                    nc += 1
                continue
            if lvl == k:
                if dense:
                    b_dense[key] += 1
                if want_pairs or not dense:
                    if npairs == p_obj.shape[0]:
                        p_obj = _grow(p_obj, npairs)
                        p_key = _grow(p_key, npairs)
                        p_flag = _grow(p_flag, npairs)
                    p_obj[npairs] = o
                    p_key[npairs] = key
                    p_flag[npairs] = flags
                    npairs += 1
                continue
            if dense:
                x_dense[off[lvl] + key] = 1
            else:
                if nx == x_lvl.shape[0]:
                    x_lvl = _grow(x_lvl, nx)
                    x_key = _grow(x_key, nx)
                x_lvl[nx] = lvl
                x_key[nx] = key
                nx += 1
            # push children, reusing the parent's stack slot
            base = sp
            for t in range(d):
                pc[t] = st_co[base, t]
            for ch in range(nch):
                s = base + ch
                st_lvl[s] = lvl + 1
                st_key[s] = (key << d) | ch
                st_mask[s] = mask
                for t in range(d):
                    st_co[s, t] = 2 * pc[t] + ((ch >> t) & 1)
            sp = base + nch

    return (c_dense, x_dense, b_dense,
            c_lvl[:nc], c_key[:nc], x_lvl[:nx], x_key[:nx],
            p_obj[:npairs], p_key[:npairs], p_flag[:npairs])


@njit(cache=True)
def primal_locate(Q, qinst, root_lo, root_side, k, node_c, node_child):
    """Walk each query down its instance tree; return (path sum, leaf node)."""
    m, d = Q.shape
    acc = np.zeros(m, np.int64)
    leaf = np.empty(m, np.int64)
    nk = 1 << k
    ix = np.empty(d, np.int64)
    for r in range(m):
        i = qinst[r]
        sk = root_side[i] * (0.5 ** k)
        for t in range(d):
            v = int(np.floor((Q[r, t] - root_lo[i, t]) / sk))
            if v < 0:
                v = 0
            elif v >= nk:
                v = nk - 1
            ix[t] = v
        node = i
        lvl = 0
        s = node_c[node]
        while node_child[node] >= 0:
            ch = 0
            for t in range(d):
                ch |= ((ix[t] >> (k - lvl - 1)) & 1) << t
            node = node_child[node] + ch
            lvl += 1
            s += node_c[node]
        acc[r] = s
        leaf[r] = node
    return acc, leaf


@njit(cache=True)
def dual_trace(tree, a, bq, lo_d, size_d, K, cpos, cneg, cstart, cend, cidx,
               st_node, st_lvl, st_co):
    """Count dual points strictly on the containing side of the dual hyperplane.

    The dual hyperplane is ``g(x) = x[D-1] - sum_j a[j] x[j] + bq``; boxes
    with ``g > 0`` contribute positive points, boxes with ``g < 0`` negative
    points.  Bottom-level boxes meeting the hyperplane go to the fuzzy count.
    """
    D = lo_d.shape[0]
    inn = 0
    fuzzy = 0
    sp = 1
    st_node[0] = tree
    st_lvl[0] = 0
    for t in range(D):
        st_co[0, t] = 0
    while sp > 0:
        sp -= 1
        node = st_node[sp]
        lvl = st_lvl[sp]
        scale = 0.5 ** lvl
        g0 = bq
        spread_lo = 0.0
        spread_hi = 0.0
        for t in range(D - 1):
            w = size_d[t] * scale
            xl = lo_d[t] + st_co[sp, t] * w
            c = -a[t]
            g0 += c * xl
            if c < 0:
                spread_lo += c * w
            else:
                spread_hi += c * w
        w = size_d[D - 1] * scale
        g0 += lo_d[D - 1] + st_co[sp, D - 1] * w
        spread_hi += w
        gmin = g0 + spread_lo
        gmax = g0 + spread_hi
        if gmin > TOL:
            inn += cpos[node]
        elif gmax < -TOL:
            inn += cneg[node]
        elif lvl == K:
            fuzzy += cpos[node] + cneg[node]
        else:
            base_co = st_co[sp].copy()
            for c in range(cstart[node], cend[node]):
                ch = cidx[c]
                st_node[sp] = c
                st_lvl[sp] = lvl + 1
                for t in range(D):
                    st_co[sp, t] = 2 * base_co[t] + ((ch >> t) & 1)
                sp += 1
    return inn, fuzzy


@njit(cache=True)
def dual_collect(tree, a, bq, lo_d, size_d, K, cstart, cend, cidx,
                 st_node, st_lvl, st_co, out_node, out_stat, nout, sign):
    """Like ``dual_trace`` but report node ids instead of counts.

    ``sign`` selects which side counts as inside (+1 for g > 0, -1 for g < 0).
    Inside nodes are reported with status 0, crossed bottom-level boxes with
    status 1.  Returns the new output length.
    """
    D = lo_d.shape[0]
    sp = 1
    st_node[0] = tree
    st_lvl[0] = 0
    for t in range(D):
        st_co[0, t] = 0
    while sp > 0:
        sp -= 1
        node = st_node[sp]
        lvl = st_lvl[sp]
        scale = 0.5 ** lvl
        g0 = bq
        spread_lo = 0.0
        spread_hi = 0.0
        for t in range(D - 1):
            w = size_d[t] * scale
            xl = lo_d[t] + st_co[sp, t] * w
            c = -a[t]
            g0 += c * xl
            if c < 0:
                spread_lo += c * w
            else:
                spread_hi += c * w
        w = size_d[D - 1] * scale
        g0 += lo_d[D - 1] + st_co[sp, D - 1] * w
        spread_hi += w
        gmin = g0 + spread_lo
        gmax = g0 + spread_hi
        if (sign > 0 and gmin > TOL) or (sign < 0 and gmax < -TOL):
            out_node[nout] = node
            out_stat[nout] = 0
            nout += 1
        elif (sign > 0 and gmax < -TOL) or (sign < 0 and gmin > TOL):
            pass
        elif lvl == K:
            out_node[nout] = node
            out_stat[nout] = 1
            nout += 1
        else:
            base_co = st_co[sp].copy()
            for c in range(cstart[node], cend[node]):
                ch = cidx[c]
                st_node[sp] = c
                st_lvl[sp] = lvl + 1
                for t in range(D):
                    st_co[sp, t] = 2 * base_co[t] + ((ch >> t) & 1)
                sp += 1
    return nout


@njit(cache=True)
def pd_query(Q, qinst, root_lo, root_side, k, node_c, node_child, node_b, node_slot,
             root_table, cls_M, cls_t, lo_d, size_d, K, cpos, cneg, cstart, cend, cidx,
             max_depth_d):
    """Primal walk followed by dual traces in the leaf's class frames.

    Returns (lo, hi) per query: ``lo`` counts objects certified to contain the
    query, ``hi - lo`` counts undecided objects near it.
    """
    m, d = Q.shape
    lo_out = np.zeros(m, np.int64)
    hi_out = np.zeros(m, np.int64)
    acc, leaf = primal_locate(Q, qinst, root_lo, root_side, k, node_c, node_child)
    C = cls_M.shape[0]
    D = lo_d.shape[0]
    cap = (max_depth_d + 1) * (1 << D) + 2
    st_node = np.empty(cap, np.int64)
    st_lvl = np.empty(cap, np.int64)
    st_co = np.empty((cap, D), np.int64)
    nk = 1 << k
    cell_lo = np.empty(d)
    tlo = np.empty(d)
    qp = np.empty(d)
    for r in range(m):
        node = leaf[r]
        lo_v = acc[r]
        hi_v = acc[r] + node_b[node]
        slot = node_slot[node]
        if slot >= 0:
            i = qinst[r]
            sk = root_side[i] * (0.5 ** k)
            for t in range(d):
                v = int(np.floor((Q[r, t] - root_lo[i, t]) / sk))
                if v < 0:
                    v = 0
                elif v >= nk:
                    v = nk - 1
                cell_lo[t] = root_lo[i, t] + v * sk
            for c in range(C):
                tree = root_table[slot, c]
                if tree < 0:
                    continue
                for u in range(d):
                    s_lo = cls_t[c, u]
                    s_q = cls_t[c, u]
                    for t in range(d):
                        mv = cls_M[c, u, t]
                        s_lo += mv * cell_lo[t]
                        if mv < 0:
                            s_lo += mv * sk
                        s_q += mv * Q[r, t]
                    tlo[u] = s_lo
                    qp[u] = s_q - s_lo
                inn, fz = dual_trace(tree, qp[:d - 1], qp[d - 1], lo_d, size_d, K,
                                     cpos, cneg, cstart, cend, cidx, st_node, st_lvl, st_co)
                lo_v += inn
                hi_v += inn + fz
        lo_out[r] = lo_v
        hi_out[r] = hi_v
    return lo_out, hi_out


@njit(cache=True)
def dual_leaf_keys(A, B, p_obj, p_key, root_lo, root_side, k, level_keys, cls, cls_M, cls_t,
                   lo_d, size_d, Kd):
    """Dualize every (object, bottom cell) pair and key it into a dual forest.

    Returns per bottom cell its slot (or -1), the (slot, class) -> tree table,
    the signed leaf keys ``((tree << D*Kd | morton) << 1) | positive`` and the
    largest distance by which a dual point left the dual box.
    """
    P = p_obj.shape[0]
    d = A.shape[1]
    C = cls_M.shape[0]
    nlev = level_keys.shape[0]
    node = np.empty(P, np.int64)
    used = np.zeros(nlev, np.int64)
    for r in range(P):
        j = np.searchsorted(level_keys, p_key[r])
        node[r] = j
        used[j] = 1
    slot_of = np.full(nlev, -1, np.int64)
    ns = 0
    for j in range(nlev):
        if used[j]:
            slot_of[j] = ns
            ns += 1
    table = np.full((ns, C), -1, np.int64)
    for r in range(P):
        table[slot_of[node[r]], cls[p_obj[r]]] = 1
    nt = 0
    for s in range(ns):
        for c in range(C):
            if table[s, c] > 0:
                table[s, c] = nt
                nt += 1
    nk = 1 << Kd
    mask = (np.int64(1) << (d * k)) - 1
    keys = np.empty(P, np.int64)
    co = np.empty(d, np.int64)
    lo = np.empty(d)
    lop = np.empty(d)
    Ap = np.empty(d)
    eta = np.empty(d)
    overflow = 0.0
    for r in range(P):
        o = p_obj[r]
        key = p_key[r]
        i = key >> (d * k)
        mort = key & mask
        for t in range(d):
            co[t] = 0
        for bit in range(k):
            for t in range(d):
                co[t] |= ((mort >> (bit * d + t)) & 1) << bit
        s = root_side[i] * (0.5 ** k)
        for t in range(d):
            lo[t] = root_lo[i, t] + co[t] * s
        c = cls[o]
        bp = B[o]
        for u in range(d):
            av = 0.0
            lv = cls_t[c, u]
            for t in range(d):
                mv = cls_M[c, u, t]
                av += mv * A[o, t]
                lv += mv * lo[t]
                if mv < 0:
                    lv += mv * s
            Ap[u] = av
            lop[u] = lv
            bp += av * cls_t[c, u]
        ad = Ap[d - 1]
        last = -bp / ad + lop[d - 1]
        for t in range(d - 1):
            eta[t] = -Ap[t] / ad
            last -= eta[t] * lop[t]
        eta[d - 1] = last
        code = np.int64(0)
        for t in range(d):
            rel = (eta[t] - lo_d[t]) / size_d[t]
            ov = max(lo_d[t] - eta[t], eta[t] - lo_d[t] - size_d[t])
            if ov > overflow:
                overflow = ov
            v = int(np.floor(rel * nk))
            if v < 0:
                v = 0
            elif v >= nk:
                v = nk - 1
            for bit in range(Kd):
                code |= np.int64((v >> bit) & 1) << (bit * d + t)
        tree = table[slot_of[node[r]], c]
        keys[r] = (((np.int64(tree) << (d * Kd)) | code) << 1) | (1 if ad > 0 else 0)
    return slot_of, table, keys, overflow


@njit(cache=True)
def simplex_query(Q, qinst, root_lo, root_side, k, node_c, node_child, node_slot,
                  tabA, tabB, tab1, fA, fB, f1, f2):
    """Primal walk, then the dual levels of a bottom cell for two-constraint objects.

    Forest tuples are (lo_d, size_d, K, cpos, cneg, cstart, cend, cidx).
    ``fA`` holds single-level 2D trees for objects whose first constraint
    alone crosses the cell, ``fB`` single-level 3D trees for the second
    constraint alone.  When both cross, ``f1`` is searched on the second
    constraint and every reported node's tree in ``f2`` (tree id = node id
    of ``f1``) on the first; crossed bottom boxes of ``f1`` add to ``hi`` only.
    """
    m, d = Q.shape
    lo_out = np.zeros(m, np.int64)
    hi_out = np.zeros(m, np.int64)
    acc, leaf = primal_locate(Q, qinst, root_lo, root_side, k, node_c, node_child)
    cap2 = (max(fA[2], f2[2]) + 1) * 4 + 2
    cap3 = (max(fB[2], f1[2]) + 1) * 8 + 2
    s2n = np.empty(cap2, np.int64)
    s2l = np.empty(cap2, np.int64)
    s2c = np.empty((cap2, 2), np.int64)
    s3n = np.empty(cap3, np.int64)
    s3l = np.empty(cap3, np.int64)
    s3c = np.empty((cap3, 3), np.int64)
    n1 = f1[3].shape[0]
    out_node = np.empty(n1 + 1, np.int64)
    out_stat = np.empty(n1 + 1, np.int64)
    nk = 1 << k
    qp = np.empty(d)
    for r in range(m):
        node = leaf[r]
        lo_v = acc[r]
        hi_v = acc[r]
        slot = node_slot[node]
        if slot >= 0:
            i = qinst[r]
            sk = root_side[i] * (0.5 ** k)
            for t in range(d):
                v = int(np.floor((Q[r, t] - root_lo[i, t]) / sk))
                if v < 0:
                    v = 0
                elif v >= nk:
                    v = nk - 1
                qp[t] = Q[r, t] - (root_lo[i, t] + v * sk)
            ta = tabA[slot]
            if ta >= 0:
                inn, fz = dual_trace(ta, qp[0:1], qp[1], fA[0], fA[1], fA[2], fA[3], fA[4],
                                     fA[5], fA[6], fA[7], s2n, s2l, s2c)
                lo_v += inn
                hi_v += inn + fz
            tb = tabB[slot]
            if tb >= 0:
                inn, fz = dual_trace(tb, qp[0:2], qp[2], fB[0], fB[1], fB[2], fB[3], fB[4],
                                     fB[5], fB[6], fB[7], s3n, s3l, s3c)
                lo_v += inn
                hi_v += inn + fz
            t1 = tab1[slot]
            if t1 >= 0:
                nout = dual_collect(t1, qp[0:2], qp[2], f1[0], f1[1], f1[2], f1[5], f1[6],
                                    f1[7], s3n, s3l, s3c, out_node, out_stat, 0, -1)
                for j in range(nout):
                    inn, fz = dual_trace(out_node[j], qp[0:1], qp[1], f2[0], f2[1], f2[2],
                                         f2[3], f2[4], f2[5], f2[6], f2[7], s2n, s2l, s2c)
                    if out_stat[j] == 0:
                        lo_v += inn
                    hi_v += inn + fz
        lo_out[r] = lo_v
        hi_out[r] = hi_v
    return lo_out, hi_out


@njit(cache=True)
def forest_assemble(skeys, D, Kd):
    """Level arrays of a dual forest from sorted signed leaf keys.

    Returns root-first concatenated (key, cpos, cneg, cstart, cend) and the
    level offsets.
    """
    n = skeys.shape[0]
    size = np.zeros(Kd + 1, np.int64)
    for lvl in range(Kd + 1):
        sh = 1 + D * (Kd - lvl)
        cnt = 0
        for r in range(n):
            if r == 0 or (skeys[r] >> sh) != (skeys[r - 1] >> sh):
                cnt += 1
        size[lvl] = cnt
    off = np.zeros(Kd + 2, np.int64)
    for lvl in range(Kd + 1):
        off[lvl + 1] = off[lvl] + size[lvl]
    total = off[Kd + 1]
    okey = np.empty(total, np.int64)
    opos = np.zeros(total, np.int64)
    oneg = np.zeros(total, np.int64)
    ocs = np.full(total, -1, np.int64)
    oce = np.full(total, -1, np.int64)
    j = off[Kd] - 1
    for r in range(n):
        key = skeys[r] >> 1
        if r == 0 or key != okey[j]:
            j += 1
            okey[j] = key
        if skeys[r] & 1:
            opos[j] += 1
        else:
            oneg[j] += 1
    for lvl in range(Kd - 1, -1, -1):
        j = off[lvl] - 1
        for c in range(off[lvl + 1], off[lvl + 2]):
            par = okey[c] >> D
            if j < off[lvl] or okey[j] != par:
                j += 1
                okey[j] = par
                ocs[j] = c
            oce[j] = c + 1
            opos[j] += opos[c]
            oneg[j] += oneg[c]
    return okey, opos, oneg, ocs, oce, off


@njit(cache=True)
def pd_explain(q, i, objs, A, B, nhard, root_lo, root_side, k, dual, A1, B1, cls, cls_M, cls_t,
               lo_d, size_d, Kd):
    """Per-object decision of the primal-dual structure for one query.

    Replays the primal descent along the query's path and the dual box chain
    of each crossing object with the same arithmetic as the build and query
    kernels.  Status per object: 0 not counted, 1 counted in the upper
    estimate only, 2 counted in both.
    """
    N, J, d = A.shape
    nk = 1 << k
    sk = root_side[i] * (0.5 ** k)
    ix = np.empty(d, np.int64)
    for t in range(d):
        v = int(np.floor((q[t] - root_lo[i, t]) / sk))
        if v < 0:
            v = 0
        elif v >= nk:
            v = nk - 1
        ix[t] = v
    cell_lo = np.empty(d)
    for t in range(d):
        cell_lo[t] = root_lo[i, t] + ix[t] * sk
    status = np.zeros(objs.shape[0], np.int64)
    lo = np.empty(d)
    D = d
    nkd = 1 << Kd
    Ap = np.empty(d)
    lop = np.empty(d)
    eta = np.empty(d)
    qp = np.empty(d)
    for r in range(objs.shape[0]):
        o = objs[r]
        mask = (1 << J) - 1
        decided = False
        for lvl in range(k + 1):
            w = root_side[i] * (0.5 ** lvl)
            for t in range(d):
                lo[t] = root_lo[i, t] + (ix[t] >> (k - lvl)) * w
            allin = True
            out = False
            for j in range(J):
                if not (mask >> j) & 1:
                    continue
                ns = 0.0
                ps = 0.0
                for t in range(d):
                    v = A[o, j, t]
                    if v < 0:
                        ns += v
                    else:
                        ps += v
                f = -B[o, j]
                for t in range(d):
                    f += A[o, j, t] * lo[t]
                fmin = f + ns * w
                fmax = f + ps * w
                if fmax < -TOL:
                    out = True
                    break
                if fmin > TOL:
                    mask &= ~(1 << j)
                elif j < nhard:
                    allin = False
            if out:
                decided = True
                break
            if allin:
                status[r] = 2
                decided = True
                break
        if decided:
            continue
        if not dual:
            status[r] = 1
            continue
        # dual point of the object relative to the query's bottom cell
        c = cls[o]
        bp = B1[o]
        for u in range(d):
            av = 0.0
            lv = cls_t[c, u]
            for t in range(d):
                mv = cls_M[c, u, t]
                av += mv * A1[o, t]
                lv += mv * cell_lo[t]
                if mv < 0:
                    lv += mv * sk
            Ap[u] = av
            lop[u] = lv
            bp += av * cls_t[c, u]
        ad = Ap[d - 1]
        last = -bp / ad + lop[d - 1]
        for t in range(d - 1):
            eta[t] = -Ap[t] / ad
            last -= eta[t] * lop[t]
        eta[d - 1] = last
        pos = ad > 0
        vco = np.empty(D, np.int64)
        for t in range(D):
            rel = (eta[t] - lo_d[t]) / size_d[t]
            v = int(np.floor(rel * nkd))
            if v < 0:
                v = 0
            elif v >= nkd:
                v = nkd - 1
            vco[t] = v
        # the query's dual hyperplane in the same class frame
        for u in range(d):
            s_lo = cls_t[c, u]
            s_q = cls_t[c, u]
            for t in range(d):
                mv = cls_M[c, u, t]
                s_lo += mv * cell_lo[t]
                if mv < 0:
                    s_lo += mv * sk
                s_q += mv * q[t]
            qp[u] = s_q - s_lo
        bq = qp[d - 1]
        for lvl in range(Kd + 1):
            scale = 0.5 ** lvl
            g0 = bq
            spread_lo = 0.0
            spread_hi = 0.0
            for t in range(D - 1):
                w = size_d[t] * scale
                xl = lo_d[t] + (vco[t] >> (Kd - lvl)) * w
                cc = -qp[t]
                g0 += cc * xl
                if cc < 0:
                    spread_lo += cc * w
                else:
                    spread_hi += cc * w
            w = size_d[D - 1] * scale
            g0 += lo_d[D - 1] + (vco[D - 1] >> (Kd - lvl)) * w
            spread_hi += w
            gmin = g0 + spread_lo
            gmax = g0 + spread_hi
            if gmin > TOL:
                status[r] = 2 if pos else 0
                break
            if gmax < -TOL:
                status[r] = 0 if pos else 2
                break
            if lvl == Kd:
                status[r] = 1
    return status
