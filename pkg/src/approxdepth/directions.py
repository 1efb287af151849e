"""Finite direction families: projection directions for triangles and caps of normals."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import HyperplaneD, ParameterError, ValidationError

# ---------------------------------------------------------------- triangles


@dataclass(frozen=True)
class DirectionSet:
    """Unit directions at angles ``pi/2 + j*spacing`` (mod pi); +y comes first."""

    count: int = 24
    beta: float = math.pi / 12

    def __post_init__(self):
        if self.spacing > (math.pi - 6 * self.beta) / 3 + 1e-15:
            raise ParameterError("direction spacing too coarse for the guard angle")

    @property
    def spacing(self):
        return math.pi / self.count

    @property
    def angles(self):
        return np.mod(math.pi / 2 + np.arange(self.count) * self.spacing, math.pi)

    @property
    def directions(self):
        a = self.angles
        return np.stack([np.cos(a), np.sin(a)], axis=1)

    def rotation(self, j):
        """Rotation matrix sending direction ``j`` to +y."""
        phi = math.pi / 2 - self.angles[j]
        c, s = math.cos(phi), math.sin(phi)
        return np.array([[c, -s], [s, c]])

    def rotations(self):
        return np.stack([self.rotation(j) for j in range(self.count)])


def line_angle_gap(a, b):
    """Angle between two undirected lines with direction angles a and b."""
    d = np.mod(np.asarray(a) - np.asarray(b), math.pi)
    return np.minimum(d, math.pi - d)


def edge_angles(V):
    """Direction angles of the three edges of each triangle, (n, 3)."""
    V = np.asarray(V, dtype=float).reshape(-1, 3, 2)
    e = np.roll(V, -1, axis=1) - V
    return np.arctan2(e[..., 1], e[..., 0])


def good_directions(V, D: DirectionSet = DirectionSet()):
    """Index of the first direction making angle >= beta with every edge, per triangle."""
    ang = edge_angles(V)
    gap = line_angle_gap(D.angles[None, None, :], ang[:, :, None]).min(axis=1)
    ok = gap >= D.beta - 1e-12
    if not np.all(ok.any(axis=1)):
        raise ValidationError("triangle without a good direction (degenerate input)")
    return np.argmax(ok, axis=1)


def good_direction(tri, D: DirectionSet = DirectionSet()):
    return int(good_directions(np.asarray(tri, dtype=float)[None], D)[0])


# ---------------------------------------------------------------- caps


def cap_angle(d):
    """Opening angle phi with sqrt(d-1) tan(phi) = 1."""
    return math.atan(1.0 / math.sqrt(d - 1)) if d > 1 else math.pi / 2


def householder_to_last(c):
    """Orthogonal matrix sending unit vector ``c`` to the last basis vector."""
    d = len(c)
    e = np.zeros(d)
    e[-1] = 1.0
    v = c - e
    nv = float(v @ v)
    if nv < 1e-30:
        return np.eye(d)
    return np.eye(d) - 2.0 * np.outer(v, v) / nv


def face_grid_radius(d, g):
    """Largest angle between a point of a cell of the g^(d-1) face grid and the cell center."""
    edges = np.linspace(-1.0, 1.0, g + 1)
    worst = 0.0
    for cell in itertools.product(range(g), repeat=d - 1):
        lo = edges[list(cell)]
        hi = edges[[c + 1 for c in cell]]
        center = np.r_[(lo + hi) / 2, 1.0]
        center /= np.linalg.norm(center)
        for corner in itertools.product(*zip(lo, hi)):
            v = np.r_[corner, 1.0]
            v /= np.linalg.norm(v)
            worst = max(worst, math.acos(min(1.0, float(v @ center))))
    return worst


def _cap_cells_fit(d, g):
    """Whether a g^(d-1) grid on each cube face fits every cell in one phi-cap."""
    return face_grid_radius(d, g) <= cap_angle(d) + 1e-12


@lru_cache(maxsize=None)
def minimal_cap_grid(d):
    """Smallest odd grid that fits; odd grids put a cap center on every axis."""
    g = 1
    while not _cap_cells_fit(d, g):
        g += 2
    return g


class CapFamily:
    """Caps: dominant axis and sign of the normal, then a g^(d-1) grid on that cube face."""

    def __init__(self, d, g=None):
        if d < 2:
            raise ParameterError("dimension must be >= 2")
        self.d = d
        self.g = int(g) if g is not None else minimal_cap_grid(d)
        if not _cap_cells_fit(d, self.g):
            raise ParameterError(f"cap grid {self.g} does not fit phi-caps in dimension {d}")
        self.phi = cap_angle(d)
        self.tan_phi = math.tan(self.phi)
        g = self.g
        centers = []
        edges = np.linspace(-1.0, 1.0, g + 1)
        for axis in range(d):
            for sign in (1.0, -1.0):
                for cell in itertools.product(range(g), repeat=d - 1):
                    r = (edges[list(cell)] + edges[[c + 1 for c in cell]]) / 2
                    v = np.empty(d)
                    others = [t for t in range(d) if t != axis]
                    v[others] = r
                    v[axis] = sign
                    centers.append(v / np.linalg.norm(v))
        self.centers = np.array(centers)
        self.rotations = np.stack([householder_to_last(c) for c in self.centers])

    def __len__(self):
        return len(self.centers)

    def assign(self, A):
        """Cap index of each unit normal in ``A`` (n, d)."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        d, g = self.d, self.g
        if A.shape[0] == 0:
            return np.zeros(0, np.int64)
        axis = np.argmax(np.abs(A), axis=1)
        dom = A[np.arange(len(A)), axis]
        if np.any(dom == 0):
            raise ValidationError("zero normal")
        sign_idx = (dom < 0).astype(np.int64)
        cell = np.zeros(len(A), np.int64)
        for i in range(len(A)):
            others = [t for t in range(d) if t != axis[i]]
            r = A[i, others] / abs(dom[i])
            c = np.clip(np.floor((r + 1.0) / 2.0 * g).astype(np.int64), 0, g - 1)
            idx = 0
            for v in c:
                idx = idx * g + int(v)
            cell[i] = idx
        per_face = g ** (d - 1)
        return (axis * 2 + sign_idx) * per_face + cell


def cap_assign(h, d, family: CapFamily | None = None):
    """Return (cap id, rotated HyperplaneD) for a hyperplane, rotating about the cube center."""
    fam = family or CapFamily(d)
    a, b = h.normal_form() if hasattr(h, "normal_form") else h
    a = np.asarray(a, dtype=float)
    cap = int(fam.assign(a[None])[0])
    R = fam.rotations[cap]
    c0 = np.full(d, 0.5)
    a2 = R @ a
    b2 = b - a @ c0 + a2 @ c0
    eta = np.r_[-a2[:-1] / a2[-1], -b2 / a2[-1]]
    return cap, HyperplaneD(tuple(float(v) for v in eta), "above" if a2[-1] > 0 else "below")


def face_grid_axes(g):
    """Unit axes through the cell centers of a g x g grid on the three positive cube faces.

    Every line through the origin lies within ``face_grid_radius(3, g)`` of one of them.
    """
    edges = np.linspace(-1.0, 1.0, g + 1)
    mids = (edges[:-1] + edges[1:]) / 2
    out = []
    for axis in range(3):
        others = [t for t in range(3) if t != axis]
        for a in mids:
            for b in mids:
                v = np.empty(3)
                v[others] = (a, b)
                v[axis] = 1.0
                out.append(v / np.linalg.norm(v))
    return np.array(out)
