"""Approximate maximum depth by querying the centers of a fine grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import check_epsilon

CHUNK = 1 << 18


@dataclass(frozen=True)
class MaxDepthResult:
    q_minus: np.ndarray
    d_minus: int
    q_plus: np.ndarray
    d_plus: int


def grid_size(eps, d):
    """Cells per axis: side 1/count <= eps / (2 sqrt(d))."""
    eps = check_epsilon(eps)
    return math.ceil(2.0 * math.sqrt(d) / eps - 1e-9)


def grid_centers(eps, d, chunk=CHUNK):
    """Yield blocks of grid-cell centers in row-major order (last axis fastest)."""
    g = grid_size(eps, d)
    total = g ** d
    for s in range(0, total, chunk):
        idx = np.arange(s, min(total, s + chunk), dtype=np.int64)
        out = np.empty((len(idx), d))
        for t in range(d - 1, -1, -1):
            out[:, t] = (idx % g + 0.5) / g
            idx //= g
        yield out


def approx_max_depth(structure, eps, d=None):
    """Query every grid center; return the maximizers of d-minus and d-plus.

    Ties go to the first center in row-major order.
    """
    d = d or structure.d
    best_m, best_p = -1, -1
    q_m = q_p = None
    for Q in grid_centers(eps, d):
        lo, hi = structure.query_many(Q)
        i = int(np.argmax(lo))
        if lo[i] > best_m:
            best_m, q_m = int(lo[i]), Q[i].copy()
        j = int(np.argmax(hi))
        if hi[j] > best_p:
            best_p, q_p = int(hi[j]), Q[j].copy()
    return MaxDepthResult(q_m, best_m, q_p, best_p)
