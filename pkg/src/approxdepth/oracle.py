"""Brute-force reference depths, independent of every tree structure.

All functions take a Scene and a batch of query points and evaluate each
object directly, so they cost O(n) per query.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import ParameterError, simplex_facets, triangle_edges

DEEP_INSIDE = 0
BAND_INSIDE = 1
BAND_OUTSIDE = 2
FAR_OUTSIDE = 3

MAX_EXACT_N = 500
PERTURB = 1e-9
# points this close to a boundary count as on it, absorbing rounding in the margins
ON_TOL = 1e-12


@dataclass
class OracleReport:
    exact: int
    inner_eps: int
    outer_eps: int
    classes: np.ndarray


def _margins(scene, Q):
    """Signed margins (m, n, faces) of each query against each object's supporting planes."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    fam = scene.family
    if fam in ("halfplanes", "halfspaces"):
        A, b = scene.halfspaces()
        return (Q @ A.T - b)[:, :, None]
    V = np.asarray(scene.objects, dtype=float)
    if len(V) == 0:
        return np.zeros((len(Q), 0, 1))
    nrm, off = triangle_edges(V) if fam == "triangles" else simplex_facets(V)
    return np.einsum("mt,nft->mnf", Q, nrm) - off[None]


def exact_depth(scene, Q):
    """Number of (closed) objects containing each query."""
    f = _margins(scene, Q)
    return (f.min(axis=2) >= -ON_TOL).sum(axis=1)


def inner_eps_depth(scene, Q, eps):
    """Objects containing the query at distance >= eps from their boundary.

    For convex objects and an inside point, the distance to the boundary is
    the smallest margin to a supporting line or plane.
    """
    if eps < 0:
        raise ParameterError("eps must be >= 0")
    f = _margins(scene, Q)
    return (f.min(axis=2) >= eps).sum(axis=1)


def segment_boundary_distance(V, Q):
    """Euclidean distance from each query to the boundary of each triangle, (m, n)."""
    from .geometry import distance_to_segment

    V = np.asarray(V, dtype=float)
    Q = np.atleast_2d(Q)
    a = V[None, :, :, :]
    b = np.roll(V, -1, axis=1)[None]
    return distance_to_segment(Q[:, None, None, :], a, b).min(axis=2)


def outer_eps_depth(scene, Q, eps, family=None, variant="offset"):
    """Objects whose eps-neighbourhood (halfspaces) or eps-offset (polytopes) holds the query.

    ``variant`` applies to simplices: ``"offset"`` uses the pure offset
    simplex, ``"offset-xspan"`` also requires the query to lie in the x-span
    of the simplex in its assigned frame.
    """
    fam = family or scene.family
    if fam not in ("halfplanes", "halfspaces", "triangles", "simplices"):
        raise ParameterError(f"unknown family {fam!r}")
    if eps < 0:
        raise ParameterError("eps must be >= 0")
    f = _margins(scene, Q)
    ok = f.min(axis=2) >= -eps - ON_TOL
    if fam == "simplices" and variant == "offset-xspan":
        from .simplices import frame_xspans

        xl, xr, rot, center = frame_xspans(np.asarray(scene.objects))
        Q = np.atleast_2d(Q)
        qx = np.einsum("nt,mt->mn", rot[:, 0, :], Q - center)
        ok &= (qx >= xl[None]) & (qx <= xr[None])
    elif fam == "simplices" and variant != "offset":
        raise ParameterError(f"unknown variant {variant!r}")
    return ok.sum(axis=1)


def classify(scene, q, eps):
    """Per-object classification of a single query."""
    f = _margins(scene, np.asarray(q, dtype=float)[None])[0].min(axis=1)
    out = np.full(f.shape, FAR_OUTSIDE, np.int64)
    out[f >= -eps - ON_TOL] = BAND_OUTSIDE
    out[f >= -ON_TOL] = BAND_INSIDE
    out[f >= eps] = DEEP_INSIDE
    return out


def report(scene, q, eps):
    c = classify(scene, q, eps)
    return OracleReport(int((c <= BAND_INSIDE).sum()), int((c == DEEP_INSIDE).sum()),
                        int((c <= BAND_OUTSIDE).sum()), c)


def prism_depths(scene, Q, eps, fam=None):
    """Brute-force signed-prism counts for a simplex scene.

    Returns a dict of (m,) arrays: ``pi``/``nu`` count positive/negative
    prisms containing the query; the ``_inner`` variants require distance
    >= eps inside both slanted planes, the ``_outer`` variants allow the
    query up to eps outside them.  The x-span condition is always exact.
    """
    from .simplices import prism_arrays, prism_margins

    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    pr = prism_arrays(np.asarray(scene.objects, dtype=float).reshape(-1, 4, 3), fam)
    m = len(Q)
    if len(pr["px"]) == 0:
        z = np.zeros(m, np.int64)
        return {k: z.copy() for k in ("pi", "nu", "pi_inner", "nu_inner", "pi_outer", "nu_outer")}
    inx, mA, mB = prism_margins(pr, Q)
    inA = np.where(pr["y_strict"], mA > 0, mA >= 0)
    inB = np.where(pr["z_strict"], mB > 0, mB >= 0)
    exact = inx & inA & inB
    inner = inx & (mA >= eps) & (mB >= eps)
    outer = inx & (mA >= -eps) & (mB >= -eps)
    pos = pr["sign"] > 0
    out = {}
    for name, arr in (("", exact), ("_inner", inner), ("_outer", outer)):
        out["pi" + name] = arr[:, pos].sum(axis=1)
        out["nu" + name] = arr[:, ~pos].sum(axis=1)
    return out


# ---------------------------------------------------------------- maximum depth


def _vertex_candidates(A, b, d):
    """Arrangement vertices of the boundaries together with the cube facets."""
    cubeA = np.vstack([np.eye(d), -np.eye(d)])
    cubeb = np.r_[np.zeros(d), -np.ones(d)]
    H = np.vstack([A, cubeA])
    h = np.r_[b, cubeb]
    pts = []
    idx = np.array(list(itertools.combinations(range(len(H)), d)), dtype=np.int64)
    for s in range(0, len(idx), 50000):
        chunk = idx[s:s + 50000]
        M = H[chunk]
        rhs = h[chunk]
        det = np.linalg.det(M)
        good = np.abs(det) > 1e-12
        if not np.any(good):
            continue
        x = np.linalg.solve(M[good], rhs[good][..., None])[..., 0]
        inside = np.all((x >= -1e-9) & (x <= 1 + 1e-9), axis=1)
        pts.append(np.clip(x[inside], 0.0, 1.0))
    return np.vstack(pts) if pts else np.zeros((0, d))


def exact_max_depth(scene, resolution=64):
    """Maximum exact depth over arrangement vertices (perturbed) and a grid.

    Returns ``(point, depth)``.  Halfplane and halfspace scenes only; refuses
    more than 500 objects.
    """
    if scene.family not in ("halfplanes", "halfspaces"):
        raise ParameterError("exact maximum depth is implemented for halfspace scenes")
    n = len(scene)
    if n > MAX_EXACT_N:
        raise ParameterError(f"exact maximum depth refuses n > {MAX_EXACT_N} (got {n})")
    d = scene.dimension
    A, b = scene.halfspaces()
    verts = _vertex_candidates(A, b, d)
    shifts = np.array(list(itertools.product((-PERTURB, 0.0, PERTURB), repeat=d)))
    cand = np.clip((verts[:, None, :] + shifts[None]).reshape(-1, d), 0.0, 1.0)
    g = (np.arange(resolution) + 0.5) / resolution
    grid = np.stack(np.meshgrid(*([g] * d), indexing="ij"), axis=-1).reshape(-1, d)
    cand = np.vstack([grid, cand])
    best, best_q = -1, None
    for s in range(0, len(cand), 20000):
        c = cand[s:s + 20000]
        dep = (c @ A.T - b >= -ON_TOL).sum(axis=1) if n else np.zeros(len(c), np.int64)
        i = int(np.argmax(dep))
        if dep[i] > best:
            best, best_q = int(dep[i]), c[i]
    return best_q, best
