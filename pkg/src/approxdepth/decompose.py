"""Signed decompositions of triangles into trapezoids and simplices into prisms.

Frames are chosen so that the projection direction is +y (triangles) or +z
(simplices).  Every region reaches down to a baseline below the rotated unit
cube, so only its ceiling and its x-span matter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .directions import DirectionSet
from .geometry import ValidationError

BASELINE = -1.0
CENTER2 = np.array([0.5, 0.5])


def lerp_at(px, py, qx, qy, x):
    """Height of segment pq at abscissa x, exact at both endpoints."""
    t = (x - px) / (qx - px)
    return py * (1.0 - t) + qy * t


@dataclass(frozen=True)
class SignedTrapezoid:
    """Region below ceiling edge ``p``-``q`` over an x-span, down to the baseline.

    Positive trapezoids have a closed ceiling, negative ones an open ceiling.
    """

    p: tuple
    q: tuple
    x_lo: float
    x_hi: float
    closed_lo: bool
    closed_hi: bool
    sign: int

    def contains(self, pt):
        pt = np.atleast_2d(pt)
        x, y = pt[:, 0], pt[:, 1]
        inx = ((x > self.x_lo) | (self.closed_lo & (x == self.x_lo))) & \
              ((x < self.x_hi) | (self.closed_hi & (x == self.x_hi)))
        top = lerp_at(self.p[0], self.p[1], self.q[0], self.q[1], x)
        below = (y <= top) if self.sign > 0 else (y < top)
        return inx & below & (y >= BASELINE)


def rotate_about(P, R, center):
    P = np.asarray(P, dtype=float)
    return (P - center) @ R.T + center


def _sorted_by_x(V):
    order = np.argsort(V[..., 0], axis=-1, kind="stable")
    return np.take_along_axis(V, order[..., None], axis=-2)


def decompose_triangle(tri, u=0, D: DirectionSet = DirectionSet()):
    """Three signed trapezoids, in the frame where direction ``u`` points to +y.

    Raises ValidationError if ``u`` is not a good direction for the triangle.
    """
    tri = np.asarray(tri, dtype=float).reshape(3, 2)
    from .directions import edge_angles, line_angle_gap

    gap = line_angle_gap(D.angles[u], edge_angles(tri[None])[0]).min()
    if gap < D.beta - 1e-12:
        raise ValidationError("direction is not good for this triangle")
    V = _sorted_by_x(rotate_about(tri, D.rotation(u), CENTER2))
    (x0, y0), (x1, y1), (x2, y2) = V
    above = y1 > lerp_at(x0, y0, x2, y2, x1)
    s = 1 if above else -1
    return [
        SignedTrapezoid((x0, y0), (x1, y1), x0, x1, True, True, s),
        SignedTrapezoid((x1, y1), (x2, y2), x1, x2, False, True, s),
        SignedTrapezoid((x0, y0), (x2, y2), x0, x2, True, True, -s),
    ]


def trapezoid_sum(tri, pts, u=0, D: DirectionSet = DirectionSet()):
    """Signed count of trapezoids containing each point (points in the input frame)."""
    P = rotate_about(np.atleast_2d(pts), D.rotation(u), CENTER2)
    total = np.zeros(len(P), np.int64)
    for t in decompose_triangle(tri, u, D):
        total += t.sign * t.contains(P)
    return total


def triangle_pieces(Vrot, eps=None):
    """Trapezoid pieces of rotated triangles as flat arrays.

    Without ``eps`` each triangle yields its three trapezoids.  With ``eps``
    every trapezoid is further cut where the triangle's vertical thickness
    crosses ``2*eps``: the thick middle part (core) and the thin ends (tips)
    go to separate groups.

    Returns a dict of arrays: tri, px, py, qx, qy, xl, xr, cl, cr, sign, tip.
    """
    V = _sorted_by_x(np.asarray(Vrot, dtype=float).reshape(-1, 3, 2))
    n = len(V)
    x0, y0 = V[:, 0, 0], V[:, 0, 1]
    x1, y1 = V[:, 1, 0], V[:, 1, 1]
    x2, y2 = V[:, 2, 0], V[:, 2, 1]
    mid = lerp_at(x0, y0, x2, y2, x1)
    s = np.where(y1 > mid, 1, -1)
    T = np.abs(y1 - mid)
    ids = np.arange(n)
    rows = []

    def add(mask, px, py, qx, qy, xl, xr, cl, cr, sign, tip):
        m = np.broadcast_to(mask, (n,))
        if not m.any():
            return
        b = lambda v: np.broadcast_to(np.asarray(v), (n,))[m]
        rows.append(dict(tri=ids[m], px=b(px), py=b(py), qx=b(qx), qy=b(qy), xl=b(xl), xr=b(xr),
                         cl=b(cl), cr=b(cr), sign=b(sign), tip=b(tip)))

    if eps is None:
        add(True, x0, y0, x1, y1, x0, x1, True, True, s, False)
        add(True, x1, y1, x2, y2, x1, x2, False, True, s, False)
        add(True, x0, y0, x2, y2, x0, x2, True, True, -s, False)
    else:
        tau = 2.0 * eps
        thin = T < tau
        with np.errstate(divide="ignore", invalid="ignore"):
            cL = np.where(thin, x0, x0 + (x1 - x0) * tau / T)
            cR = np.where(thin, x2, x2 - (x2 - x1) * tau / T)
        cL = np.minimum(cL, x1)
        cR = np.maximum(cR, x1)
        thick = ~thin
        # whole triangle is a tip
        add(thin, x0, y0, x1, y1, x0, x1, True, True, s, True)
        add(thin, x1, y1, x2, y2, x1, x2, False, True, s, True)
        add(thin, x0, y0, x2, y2, x0, x2, True, True, -s, True)
        # short edges
        add(thick, x0, y0, x1, y1, cL, x1, True, True, s, False)
        add(thick, x0, y0, x1, y1, x0, cL, True, False, s, True)
        add(thick, x1, y1, x2, y2, x1, cR, False, True, s, False)
        add(thick, x1, y1, x2, y2, cR, x2, False, True, s, True)
        # long edge
        add(thick, x0, y0, x2, y2, cL, cR, True, True, -s, False)
        add(thick, x0, y0, x2, y2, x0, cL, True, False, -s, True)
        add(thick, x0, y0, x2, y2, cR, x2, False, True, -s, True)
    out = {k: np.concatenate([r[k] for r in rows]) if rows else np.zeros(0) for k in
           ("tri", "px", "py", "qx", "qy", "xl", "xr", "cl", "cr", "sign", "tip")}
    return out


def pieces_contain(pc, P, tri_of_point=None):
    """Membership of points in pieces; (m, npieces) boolean, or (m,) if paired."""
    P = np.atleast_2d(P)
    x = P[:, 0][:, None]
    y = P[:, 1][:, None]
    inx = ((x > pc["xl"]) | (pc["cl"] & (x == pc["xl"]))) & \
          ((x < pc["xr"]) | (pc["cr"] & (x == pc["xr"])))
    top = lerp_at(pc["px"], pc["py"], pc["qx"], pc["qy"], x)
    below = np.where(pc["sign"] > 0, y <= top, y < top)
    return inx & below & (y >= BASELINE)
