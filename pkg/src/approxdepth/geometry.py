"""Geometric primitives: objects, duality maps, distances and slope classes.

Linear objects are carried internally in normal form ``A . x >= b`` with a
unit normal ``A``, so signed distances are plain dot products.  The vertical
form used by the duality maps is

    x_d = sum_k eta_k x_k - eta_d

and a halfspace is *upper* when it contains the points above its boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Slack used by every "strictly inside / strictly outside" decision.  It only
# ever pushes a classification towards "crossed", never the other way.
TOL = 1e-12
MIN_AREA = 1e-12


class ParameterError(ValueError):
    """Invalid numeric parameter (epsilon, counts, dimension)."""


class DomainError(ValueError):
    """Query point outside the unit cube."""


class ValidationError(ValueError):
    """Malformed or degenerate input object."""


@dataclass(frozen=True)
class DepthEstimate:
    d_minus: int
    d_plus: int


@dataclass(frozen=True)
class Halfplane:
    """Halfplane bounded by ``y = slope*x + intercept``.

    ``side`` is ``"upper"`` or ``"lower"``.  A vertical boundary ``x = x0`` is
    written with ``slope=None, intercept=x0`` and side ``"right"``/``"left"``.
    """

    slope: float | None
    intercept: float
    side: str = "upper"

    def normal_form(self) -> tuple[np.ndarray, float]:
        if self.slope is None:
            if self.side == "right":
                return np.array([1.0, 0.0]), float(self.intercept)
            if self.side == "left":
                return np.array([-1.0, 0.0]), -float(self.intercept)
            raise ValidationError(f"vertical halfplane side must be left/right, got {self.side!r}")
        c, dd = float(self.slope), float(self.intercept)
        if not (math.isfinite(c) and math.isfinite(dd)):
            raise ValidationError("non-finite halfplane coefficients")
        if self.side == "upper":
            a, b = np.array([-c, 1.0]), dd
        elif self.side == "lower":
            a, b = np.array([c, -1.0]), -dd
        else:
            raise ValidationError(f"halfplane side must be upper/lower, got {self.side!r}")
        norm = math.hypot(a[0], a[1])
        return a / norm, b / norm


@dataclass(frozen=True)
class HyperplaneD:
    """Halfspace bounded by ``x_d = sum eta_k x_k - eta_d``; side above/below."""

    eta: tuple[float, ...]
    side: str = "above"

    def normal_form(self) -> tuple[np.ndarray, float]:
        eta = np.asarray(self.eta, dtype=float)
        if eta.ndim != 1 or eta.size < 2 or not np.all(np.isfinite(eta)):
            raise ValidationError("eta must be a finite vector of length >= 2")
        a = np.append(-eta[:-1], 1.0)
        b = -eta[-1]
        if self.side == "below":
            a, b = -a, -b
        elif self.side != "above":
            raise ValidationError(f"hyperplane side must be above/below, got {self.side!r}")
        norm = float(np.linalg.norm(a))
        return a / norm, b / norm


def normalize_halfspaces(A, b) -> tuple[np.ndarray, np.ndarray]:
    """Scale rows of ``A . x >= b`` to unit normals; reject zero normals."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != b.shape[0]:
        raise ValidationError("normal/offset count mismatch")
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms <= 1e-300) or not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
        raise ValidationError("degenerate or non-finite halfspace normal")
    return A / norms[:, None], b / norms


def halfspace_arrays(objects: Sequence[Halfplane | HyperplaneD]) -> tuple[np.ndarray, np.ndarray]:
    """Stack a list of halfplanes/hyperplanes into normal-form arrays."""
    if len(objects) == 0:
        return np.zeros((0, 2)), np.zeros(0)
    rows = [o.normal_form() for o in objects]
    dims = {len(r[0]) for r in rows}
    if len(dims) != 1:
        raise ValidationError("mixed dimensions in halfspace list")
    return np.array([r[0] for r in rows]), np.array([r[1] for r in rows])


def vertical_form(A, b) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(eta, upper)`` for normal-form rows with nonzero last coefficient."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    ad = A[:, -1]
    if np.any(ad == 0):
        raise ValidationError("vertical boundary has no vertical form")
    eta = np.empty_like(A)
    eta[:, :-1] = -A[:, :-1] / ad[:, None]
    eta[:, -1] = -b / ad
    return eta, ad > 0


# ---------------------------------------------------------------- duality


def dual_line_to_point(c: float, dd: float) -> tuple[float, float]:
    """Line ``y = c x + dd`` maps to the point ``(c, -dd)``."""
    return (c, -dd)


def dual_point_to_line(p) -> tuple[float, float]:
    """Point ``(xi, eta)`` maps to the line ``y = xi x - eta``, as (slope, intercept)."""
    return (float(p[0]), -float(p[1]))


def shifted_dual_line(corner, c: float, dd: float) -> tuple[float, float]:
    """Dual point of ``y = c x + dd`` after translating ``corner`` to the origin."""
    a, b = float(corner[0]), float(corner[1])
    return (c, -(dd + c * a - b))


def shifted_dual_point(corner, p) -> tuple[float, float]:
    """Dual line of ``p`` after translating ``corner`` to the origin."""
    return (float(p[0]) - float(corner[0]), -(float(p[1]) - float(corner[1])))


def shift_eta(eta, corner) -> np.ndarray:
    """Vertical-form coefficients of the same hyperplane in the frame anchored at ``corner``."""
    eta = np.asarray(eta, dtype=float)
    corner = np.asarray(corner, dtype=float)
    out = eta.copy()
    out[..., -1] = eta[..., -1] - np.sum(eta[..., :-1] * corner[..., :-1], axis=-1) + corner[..., -1]
    return out


def vertical_offset(p, eta) -> np.ndarray:
    """Signed vertical offset of ``p`` above the hyperplane ``eta`` (vertical form)."""
    p = np.asarray(p, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return p[..., -1] - (np.sum(eta[..., :-1] * p[..., :-1], axis=-1) - eta[..., -1])


def vertical_distance(p, eta) -> np.ndarray:
    return np.abs(vertical_offset(p, eta))


def distance_to_hyperplane(p, eta) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    return vertical_distance(p, eta) / np.sqrt(1.0 + np.sum(eta[..., :-1] ** 2, axis=-1))


def distance_to_segment(p, a, b) -> np.ndarray:
    """Euclidean distance from points ``p`` to segments ``ab`` (broadcasting)."""
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = b - a
    L2 = np.sum(ab * ab, axis=-1)
    t = np.clip(np.sum((p - a) * ab, axis=-1) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.linalg.norm(p - proj, axis=-1)


# ---------------------------------------------------------------- slope classes

# Isometries of the unit square x' = M x + t, one per slope class:
# 0 slopes in [0,1], 1 steep positive or vertical, 2 in [-1,0), 3 steep negative.
CLASS_M = np.array([
    [[1.0, 0.0], [0.0, 1.0]],
    [[0.0, 1.0], [1.0, 0.0]],
    [[-1.0, 0.0], [0.0, 1.0]],
    [[0.0, 1.0], [-1.0, 0.0]],
])
CLASS_T = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def slope_classes(A) -> np.ndarray:
    """Slope class of each boundary line given unit normals ``A`` (n, 2)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    ax, ay = A[:, 0], A[:, 1]
    # slope = -ax/ay; compare |ax| with |ay| without dividing
    pos = ax * ay <= 0  # slope >= 0 (includes horizontal)
    flat = np.abs(ax) <= np.abs(ay)
    cls = np.where(pos, np.where(flat, 0, 1), np.where(flat, 2, 3))
    vertical = ay == 0
    cls[vertical] = 1
    return cls.astype(np.int64)


def slope_class(h: Halfplane) -> tuple[int, np.ndarray, np.ndarray]:
    """Return the class id and its canonical transform ``(M, t)``."""
    a, _ = h.normal_form()
    k = int(slope_classes(a[None, :])[0])
    return k, CLASS_M[k].copy(), CLASS_T[k].copy()


def transform_halfspaces(A, b, M, t) -> tuple[np.ndarray, np.ndarray]:
    """Image of ``A . x >= b`` under the isometry ``x' = M x + t`` (broadcasting)."""
    A = np.asarray(A, dtype=float)
    A2 = np.einsum("...ij,...j->...i", M, A)
    b2 = np.asarray(b, dtype=float) + np.sum(A2 * t, axis=-1)
    return A2, b2


def transform_box_lo(lo, side, M, t) -> np.ndarray:
    """Lower corner of the image of the axis box ``[lo, lo+side]`` under ``x' = M x + t``."""
    lo = np.asarray(lo, dtype=float)
    side = np.asarray(side, dtype=float)
    img = np.einsum("...ij,...j->...i", M, lo) + t
    neg = np.sum(np.minimum(M, 0.0), axis=-1)  # each row has one nonzero entry
    return img + neg * side[..., None]


# ---------------------------------------------------------------- objects


def as_triangles(V) -> np.ndarray:
    """Validate an (n, 3, 2) vertex array and return it counterclockwise."""
    V = np.array(V, dtype=float).reshape(-1, 3, 2)
    if not np.all(np.isfinite(V)):
        raise ValidationError("non-finite triangle vertex")
    cross = ((V[:, 1, 0] - V[:, 0, 0]) * (V[:, 2, 1] - V[:, 0, 1])
             - (V[:, 1, 1] - V[:, 0, 1]) * (V[:, 2, 0] - V[:, 0, 0]))
    if np.any(np.abs(cross) / 2 <= MIN_AREA):
        bad = int(np.flatnonzero(np.abs(cross) / 2 <= MIN_AREA)[0])
        raise ValidationError(f"degenerate triangle at index {bad}")
    cw = cross < 0
    V[cw] = V[cw][:, [0, 2, 1]]
    return V


def as_simplices(V) -> np.ndarray:
    """Validate an (n, 4, 3) vertex array and return it positively oriented."""
    V = np.array(V, dtype=float).reshape(-1, 4, 3)
    if not np.all(np.isfinite(V)):
        raise ValidationError("non-finite simplex vertex")
    vol = np.linalg.det(V[:, 1:] - V[:, :1]) / 6.0
    if np.any(np.abs(vol) <= MIN_AREA):
        bad = int(np.flatnonzero(np.abs(vol) <= MIN_AREA)[0])
        raise ValidationError(f"degenerate simplex at index {bad}")
    neg = vol < 0
    V[neg] = V[neg][:, [0, 2, 1, 3]]
    return V


def triangle_edges(V) -> tuple[np.ndarray, np.ndarray]:
    """Inward unit normals and offsets of the three edges, (n,3,2), (n,3).

    Edge ``i`` runs from vertex ``i`` to vertex ``i+1``; either orientation is accepted.
    """
    V = np.asarray(V, dtype=float)
    P = V
    Q = np.roll(V, -1, axis=-2)
    e = Q - P
    nrm = np.stack([-e[..., 1], e[..., 0]], axis=-1)
    nrm /= np.linalg.norm(nrm, axis=-1, keepdims=True)
    off = np.sum(nrm * P, axis=-1)
    opp = np.roll(V, -2, axis=-2)
    flip = np.sum(nrm * opp, axis=-1) < off
    nrm = np.where(flip[..., None], -nrm, nrm)
    off = np.where(flip, -off, off)
    return nrm, off


def simplex_facets(V) -> tuple[np.ndarray, np.ndarray]:
    """Inward unit normals and offsets of the four facets, (n,4,3), (n,4).

    Facet ``i`` is opposite vertex ``i``.
    """
    V = np.asarray(V, dtype=float)
    normals = np.empty(V.shape[:-2] + (4, 3))
    offsets = np.empty(V.shape[:-2] + (4,))
    for i in range(4):
        idx = [j for j in range(4) if j != i]
        a, b, c = V[..., idx[0], :], V[..., idx[1], :], V[..., idx[2], :]
        nrm = np.cross(b - a, c - a)
        nrm /= np.linalg.norm(nrm, axis=-1, keepdims=True)
        off = np.sum(nrm * a, axis=-1)
        flip = np.sum(nrm * V[..., i, :], axis=-1) < off
        nrm = np.where(flip[..., None], -nrm, nrm)
        off = np.where(flip, -off, off)
        normals[..., i, :] = nrm
        offsets[..., i] = off
    return normals, offsets


def check_in_cube(Q, d: int) -> np.ndarray:
    """Return ``Q`` as an (m, d) array, raising DomainError outside ``[0,1]^d``."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.shape[1] != d:
        raise DomainError(f"expected {d}-dimensional query points, got {Q.shape[1]}")
    if Q.size and (np.any(Q < 0.0) or np.any(Q > 1.0) or not np.all(np.isfinite(Q))):
        raise DomainError("query point outside the unit cube")
    return Q
