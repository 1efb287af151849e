"""Scenes: generation, validation and file I/O."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import (Halfplane, HyperplaneD, ParameterError, ValidationError, as_simplices,
                       as_triangles, halfspace_arrays, normalize_halfspaces)

FAMILIES = ("halfplanes", "halfspaces", "triangles", "simplices")
PROFILES = ("peak-noise", "uniform")


@dataclass
class Scene:
    dimension: int
    family: str
    objects: object
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.objects)

    def halfspaces(self):
        if self.family not in ("halfplanes", "halfspaces"):
            raise ValidationError(f"{self.family} scene has no halfspace form")
        if len(self.objects) == 0:
            return np.zeros((0, self.dimension)), np.zeros(0)
        return halfspace_arrays(self.objects)


def halfspaces_of(S):
    """Normal-form arrays for a Scene, a list of halfplanes/hyperplanes or an (A, b) pair."""
    if isinstance(S, Scene):
        return S.halfspaces()
    if isinstance(S, tuple) and len(S) == 2 and not isinstance(S[0], (Halfplane, HyperplaneD)):
        A = np.asarray(S[0], dtype=float)
        if A.size == 0:
            return A.reshape(0, A.shape[-1] if A.ndim == 2 else 2), np.zeros(0)
        return normalize_halfspaces(S[0], S[1])
    S = list(S)
    if not S:
        return np.zeros((0, 2)), np.zeros(0)
    return halfspace_arrays(S)


# ---------------------------------------------------------------- generators


def _halfplanes(n, rng, profile):
    objs = []
    if profile == "peak-noise":
        n_peak = (2 * n) // 3
        for _ in range(n_peak):
            c = rng.uniform(-1.0, 1.0)
            shift = rng.uniform(-0.04, 0.04)
            side = "upper" if rng.random() < 0.5 else "lower"
            objs.append(Halfplane(c, 0.5 + shift - 0.5 * c, side))
        for _ in range(n - n_peak):
            c = rng.uniform(-1.0, 1.0)
            y0 = rng.uniform(0.0, 1.0)
            side = "upper" if rng.random() < 0.5 else "lower"
            objs.append(Halfplane(c, y0, side))
    else:
        for _ in range(n):
            p = rng.uniform(0.0, 1.0, 2)
            theta = rng.uniform(0.0, np.pi)
            side = "upper" if rng.random() < 0.5 else "lower"
            c = float(np.tan(theta - np.pi / 2)) if abs(np.cos(theta)) > 1e-9 else 1e9
            c = float(np.clip(c, -1e6, 1e6))
            objs.append(Halfplane(c, float(p[1] - c * p[0]), side))
    return objs


def _halfspaces(n, d, rng, profile):
    objs = []
    n_peak = (2 * n) // 3 if profile == "peak-noise" else 0
    for i in range(n):
        a = rng.normal(size=d)
        while abs(a[-1]) < 1e-3:
            a = rng.normal(size=d)
        a /= np.linalg.norm(a)
        if i < n_peak:
            p = np.full(d, 0.5) + rng.uniform(-0.04, 0.04, d)
        else:
            p = rng.uniform(0.0, 1.0, d)
        b = float(a @ p)
        eta = np.r_[-a[:-1] / a[-1], -b / a[-1]]
        objs.append(HyperplaneD(tuple(float(v) for v in eta), "above" if a[-1] > 0 else "below"))
    return objs


def _polytopes(n, d, rng, profile):
    nv = d + 1
    out = np.empty((n, nv, d))
    for i in range(n):
        while True:
            if profile == "peak-noise" and i < (2 * n) // 3:
                anchor = 0.5 + rng.uniform(-0.04, 0.04, d)
            else:
                anchor = rng.uniform(0.0, 1.0, d)
            scale = rng.uniform(0.05, 0.5)
            V = anchor + scale * rng.uniform(-1.0, 1.0, (nv, d))
            V[0] = anchor
            vol = abs(np.linalg.det(V[1:] - V[0]))
            if vol > 1e-6:
                break
        out[i] = V
    return as_triangles(out) if d == 2 else as_simplices(out)


def generate_scene(kind, n, seed=0, profile="uniform", dim=None):
    """Seeded random scene of ``n`` objects of the given family."""
    if kind not in FAMILIES:
        raise ParameterError(f"unknown family {kind!r}; expected one of {FAMILIES}")
    if profile not in PROFILES:
        raise ParameterError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    if n < 0:
        raise ParameterError("n must be >= 0")
    rng = np.random.default_rng(seed)
    meta = {"seed": int(seed), "profile": profile}
    if kind == "halfplanes":
        return Scene(2, kind, _halfplanes(n, rng, profile), meta)
    if kind == "halfspaces":
        d = int(dim or 3)
        if d < 2:
            raise ParameterError("halfspace dimension must be >= 2")
        return Scene(d, kind, _halfspaces(n, d, rng, profile), meta)
    if kind == "triangles":
        return Scene(2, kind, _polytopes(n, 2, rng, profile) if n else np.zeros((0, 3, 2)), meta)
    return Scene(3, kind, _polytopes(n, 3, rng, profile) if n else np.zeros((0, 4, 3)), meta)


# ---------------------------------------------------------------- JSON


def scene_to_dict(scene):
    objs = []
    if scene.family == "halfplanes":
        for h in scene.objects:
            objs.append({"slope": h.slope, "intercept": h.intercept, "side": h.side})
    elif scene.family == "halfspaces":
        for h in scene.objects:
            objs.append({"eta": list(h.eta), "side": h.side})
    else:
        objs = np.asarray(scene.objects, dtype=float).tolist()
    out = {"dimension": scene.dimension, "family": scene.family, "objects": objs}
    if scene.meta:
        out["meta"] = scene.meta
    return out


def scene_from_dict(data):
    if not isinstance(data, dict):
        raise ValidationError("scene must be a JSON object")
    for key in ("dimension", "family", "objects"):
        if key not in data:
            raise ValidationError(f"scene is missing the {key!r} field")
    fam = data["family"]
    if fam not in FAMILIES:
        raise ValidationError(f"unknown family {fam!r}")
    dim = data["dimension"]
    if not isinstance(dim, int) or dim < 2:
        raise ValidationError(f"bad dimension {dim!r}")
    objs = data["objects"]
    if not isinstance(objs, list):
        raise ValidationError("objects must be a list")
    meta = data.get("meta", {})
    try:
        if fam == "halfplanes":
            if dim != 2:
                raise ValidationError("halfplane scenes are 2-dimensional")
            out = []
            for i, o in enumerate(objs):
                try:
                    slope = o["slope"]
                    h = Halfplane(None if slope is None else float(slope), float(o["intercept"]),
                                  o.get("side", "upper"))
                    h.normal_form()
                except (KeyError, TypeError, ValueError) as exc:
                    raise ValidationError(f"object {i}: {exc}") from None
                out.append(h)
            return Scene(2, fam, out, meta)
        if fam == "halfspaces":
            out = []
            for i, o in enumerate(objs):
                try:
                    h = HyperplaneD(tuple(float(v) for v in o["eta"]), o.get("side", "above"))
                    if len(h.eta) != dim:
                        raise ValidationError(f"eta has length {len(h.eta)}, expected {dim}")
                    h.normal_form()
                except (KeyError, TypeError, ValueError) as exc:
                    raise ValidationError(f"object {i}: {exc}") from None
                out.append(h)
            return Scene(dim, fam, out, meta)
        want = 2 if fam == "triangles" else 3
        if dim != want:
            raise ValidationError(f"{fam} scenes are {want}-dimensional")
        nv = want + 1
        if not objs:
            return Scene(dim, fam, np.zeros((0, nv, want)), meta)
        try:
            V = np.asarray(objs, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad vertex array: {exc}") from None
        if V.shape[1:] != (nv, want):
            raise ValidationError(f"vertex array has shape {V.shape}, expected (n, {nv}, {want})")
        V = as_triangles(V) if fam == "triangles" else as_simplices(V)
        return Scene(dim, fam, V, meta)
    except ValidationError:
        raise


def dumps_scene(scene):
    return json.dumps(scene_to_dict(scene), indent=1, sort_keys=True) + "\n"


def loads_scene(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scene JSON parse error at line {exc.lineno}: {exc.msg}") from None
    return scene_from_dict(data)


def write_scene(scene, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_scene(scene))


def read_scene(path):
    with open(path, encoding="utf-8") as f:
        return loads_scene(f.read())


# ---------------------------------------------------------------- CSV


def coord_names(d):
    return ["x", "y"] if d == 2 else (["x", "y", "z"] if d == 3 else [f"x{i}" for i in range(d)])


def read_queries(path, d):
    """Read a query CSV with a header row; return an (m, d) array."""
    rows = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            return np.zeros((0, d))
        if len(header) != d:
            raise ValidationError(f"line 1: expected {d} columns in header, got {len(header)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != d:
                raise ValidationError(f"line {line}: expected {d} values, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValidationError(f"line {line}: non-numeric value") from None
    return np.asarray(rows, dtype=float).reshape(-1, d)


def write_queries(Q, path):
    Q = np.atleast_2d(Q)
    d = Q.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(coord_names(d))
        for q in Q:
            w.writerow([repr(float(v)) for v in q])


def results_csv(Q, lo, hi, d, oracle=None):
    """Render query results; ``oracle`` is an optional (inner, exact, outer) triple."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["id"] + coord_names(d) + ["d_minus", "d_plus"]
    if oracle is not None:
        head += ["inner_eps", "exact", "outer_eps", "ok"]
    w.writerow(head)
    for i in range(len(lo)):
        row = [i] + [repr(float(v)) for v in Q[i]] + [int(lo[i]), int(hi[i])]
        if oracle is not None:
            a, e, o = oracle[0][i], oracle[1][i], oracle[2][i]
            ok = a <= lo[i] <= e <= hi[i] <= o
            row += [int(a), int(e), int(o), int(ok)]
        w.writerow(row)
    return buf.getvalue()
