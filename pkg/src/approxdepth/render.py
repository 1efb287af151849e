"""Depth maps of planar scenes as binary PPM images."""

from __future__ import annotations

import numpy as np

from .geometry import ParameterError, ValidationError
from .naive import build_naive

NAIVE_MARK = (255, 255, 255)
PD_MARK = (255, 105, 180)


def pixel_centers(resolution):
    """Query points at pixel centers, row-major with the top row at y close to 1."""
    r = int(resolution)
    g = (np.arange(r) + 0.5) / r
    X, Y = np.meshgrid(g, g[::-1])
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def depth_image(values, resolution):
    """Blue-scale RGB image with intensity proportional to the depth value."""
    r = int(resolution)
    v = np.asarray(values, dtype=np.int64).reshape(r, r)
    top = int(v.max(initial=0))
    level = (v * 255 // top) if top > 0 else np.zeros_like(v)
    img = np.zeros((r, r, 3), np.uint8)
    img[..., 0] = level // 4
    img[..., 1] = level // 2
    img[..., 2] = level
    return img


def mark(img, q, color, arm=2):
    """Draw a small cross at point ``q`` of the unit square."""
    r = img.shape[0]
    c = min(r - 1, int(q[0] * r))
    row = min(r - 1, int((1.0 - q[1]) * r))
    for dc in range(-arm, arm + 1):
        if 0 <= c + dc < r:
            img[row, c + dc] = color
    for dr in range(-arm, arm + 1):
        if 0 <= row + dr < r:
            img[row + dr, c] = color
    return img


def ppm_bytes(img):
    h, w, _ = img.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def render_depth_map(scene, eps, resolution, out=None, structure=None, markers=True):
    """Render d-minus at pixel centers; mark the naive (white) and structure (pink) maxima.

    Markers are drawn only when some object exists.  Returns the PPM bytes and
    writes them to ``out`` when given.
    """
    from .bench import DEFAULT_STRUCTURE, build_structure
    from .maxdepth import approx_max_depth, grid_size

    if scene.dimension != 2:
        raise ValidationError("depth maps are rendered for planar scenes only")
    r = int(resolution)
    if r < 1:
        raise ParameterError("resolution must be >= 1")
    kind = structure or DEFAULT_STRUCTURE[scene.family]
    st = build_structure(scene, kind, eps, max(r * r, grid_size(eps, 2) ** 2))
    lo, _ = st.query_many(pixel_centers(r))
    img = depth_image(lo, r)
    if markers and len(scene) > 0:
        if scene.family == "halfplanes":
            nq = build_naive(scene, eps).max_depth().q_minus
            img = mark(img, nq, NAIVE_MARK)
        res = approx_max_depth(st, eps, 2)
        img = mark(img, res.q_minus, PD_MARK)
    data = ppm_bytes(img)
    if out is not None:
        with open(out, "wb") as f:
            f.write(data)
    return data


def read_ppm(data):
    """Parse P6 bytes written by ``ppm_bytes`` into an (h, w, 3) array."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValidationError("not a binary PPM")
    w, h = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], np.uint8).reshape(h, w, 3)
