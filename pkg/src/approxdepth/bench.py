"""Building structures by name, batch queries, verification and benchmark sweeps."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import oracle
from .geometry import ParameterError, ValidationError
from .halfplane import build_pd
from .halfspace import build_halfspace_structure
from .maxdepth import approx_max_depth, grid_size
from .naive import build_naive
from .scenes import generate_scene
from .simplices import build_simplex3_structure
from .triangles import build_triangle_structure

STRUCTURES = ("naive", "pd", "triangle", "halfspace", "simplex3")
FAMILY_OF = {"naive": ("halfplanes", "halfspaces"), "pd": ("halfplanes",),
             "triangle": ("triangles",), "halfspace": ("halfspaces",),
             "simplex3": ("simplices",)}
DEFAULT_STRUCTURE = {"halfplanes": "pd", "halfspaces": "halfspace", "triangles": "triangle",
                     "simplices": "simplex3"}


def build_structure(scene, kind, eps, m, tune_factor=1.0):
    if kind not in STRUCTURES:
        raise ParameterError(f"unknown structure {kind!r}; expected one of {STRUCTURES}")
    if scene.family not in FAMILY_OF[kind]:
        raise ValidationError(f"structure {kind!r} does not handle {scene.family} scenes")
    m = max(1, int(m))
    if kind == "naive":
        return build_naive(scene, eps)
    if kind == "pd":
        return build_pd(scene, eps=eps, m=m, tune_factor=tune_factor)
    if kind == "halfspace":
        return build_halfspace_structure(scene, eps, m, d=scene.dimension, tune_factor=tune_factor)
    if kind == "triangle":
        return build_triangle_structure(scene, eps, m, tune_factor=tune_factor)
    return build_simplex3_structure(scene, eps, m, tune_factor=tune_factor)


def structure_params(st):
    p = getattr(st, "params", None)
    if p is not None:
        return p.delta1, p.delta2
    return st.eps, 1.0


def node_counts(st):
    if hasattr(st, "n_primal_nodes"):
        return int(st.n_primal_nodes), int(st.n_dual_nodes)
    return int(st.n_nodes), 0


@dataclass
class Verification:
    violations: int = 0
    strong_violations: int = 0
    checked: int = 0
    messages: list = field(default_factory=list)

    @property
    def ok(self):
        return self.violations == 0 and self.strong_violations == 0


def oracle_bounds(scene, Q, eps):
    """(inner, exact, outer) per query; simplices use the prism-level bounds."""
    ex = oracle.exact_depth(scene, Q)
    if scene.family == "simplices":
        r = oracle.prism_depths(scene, Q, eps)
        return r["pi_inner"] - r["nu_outer"], ex, r["pi_outer"] - r["nu_inner"]
    return oracle.inner_eps_depth(scene, Q, eps), ex, oracle.outer_eps_depth(scene, Q, eps)


def verify_answers(scene, st, Q, lo, hi, eps, bounds=None):
    """Check the sandwich for every query and, where available, the per-object conditions."""
    v = Verification()
    inner, exact, outer = bounds if bounds is not None else oracle_bounds(scene, Q, eps)
    bad = (inner > lo) | (lo > exact) | (exact > hi) | (hi > outer)
    v.checked = len(Q)
    v.violations = int(bad.sum())
    for i in np.flatnonzero(bad)[:10]:
        v.messages.append(f"query {i}: {inner[i]} <= {lo[i]} <= {exact[i]} <= {hi[i]} <= "
                          f"{outer[i]} fails")
    if hasattr(st, "explain") and scene.family in ("halfplanes", "halfspaces"):
        for i, q in enumerate(Q):
            s = st.explain(q)
            c = oracle.classify(scene, q, eps)
            wrong = int(((c == oracle.DEEP_INSIDE) & (s < 2)).sum()
                        + ((s >= 1) & (c == oracle.FAR_OUTSIDE)).sum()
                        + ((s == 2) & (c > oracle.BAND_INSIDE)).sum())
            if (s == 2).sum() != lo[i] or (s >= 1).sum() != hi[i]:
                wrong += 1
                v.messages.append(f"query {i}: per-object decisions disagree with the counts")
            if wrong:
                v.messages.append(f"query {i}: {wrong} per-object violations")
            v.strong_violations += wrong
    return v


def run_queries(scene, kind, eps, Q, verify=False, tune_factor=1.0, m=None):
    """Build, answer ``Q`` and optionally verify; returns (lo, hi, bounds or None, Verification)."""
    st = build_structure(scene, kind, eps, m or len(Q), tune_factor)
    lo, hi = st.query_many(Q) if len(Q) else (np.zeros(0, np.int64), np.zeros(0, np.int64))
    if not verify:
        return lo, hi, None, None
    bounds = oracle_bounds(scene, Q, eps)
    return lo, hi, bounds, verify_answers(scene, st, Q, lo, hi, eps, bounds)


@dataclass
class BenchRecord:
    structure: str
    n: int
    m: int
    epsilon: float
    delta1: float
    delta2: float
    build_time: float
    query_time: float
    primal_nodes: int
    dual_nodes: int
    d_minus: int = -1
    d_plus: int = -1
    q_minus: str = ""
    q_plus: str = ""


def _fmt_point(q):
    return " ".join(repr(float(v)) for v in q) if q is not None else ""


def run_maxdepth(scene, kind, eps, tune_factor=1.0):
    """Grid maximum-depth search; returns (BenchRecord, MaxDepthResult)."""
    m = grid_size(eps, scene.dimension) ** scene.dimension
    t0 = time.perf_counter()
    st = build_structure(scene, kind, eps, m, tune_factor)
    t1 = time.perf_counter()
    res = approx_max_depth(st, eps, scene.dimension)
    t2 = time.perf_counter()
    d1, d2 = structure_params(st)
    pn, dn = node_counts(st)
    rec = BenchRecord(kind, len(scene), m, eps, d1, d2, t1 - t0, t2 - t1, pn, dn,
                      res.d_minus, res.d_plus, _fmt_point(res.q_minus), _fmt_point(res.q_plus))
    return rec, res


def _median_record(recs):
    out = recs[-1]
    out.build_time = float(np.median([r.build_time for r in recs]))
    out.query_time = float(np.median([r.query_time for r in recs]))
    return out


def run_bench(family="halfplanes", structure=None, vary="n", values=(), n=1000, m=1000,
              eps=0.01, repeat=3, seed=0, profile="peak-noise", mode="queries", dim=None,
              tune_factor=1.0):
    """Sweep one of n, m, eps with the others fixed; median timings of ``repeat`` runs.

    ``mode`` "queries" answers m random queries; "maxdepth" runs the grid
    search (m is then 1/eps^2-like and ignored).  A warm-up run is discarded.
    """
    if vary not in ("n", "m", "eps"):
        raise ParameterError("vary must be one of n, m, eps")
    if mode not in ("queries", "maxdepth"):
        raise ParameterError("mode must be queries or maxdepth")
    if repeat < 1:
        raise ParameterError("repeat must be >= 1")
    structure = structure or DEFAULT_STRUCTURE[family]
    records = []
    warmed = False
    for v in values:
        nn, mm, ee = int(n), int(m), float(eps)
        if vary == "n":
            nn = int(v)
        elif vary == "m":
            mm = int(v)
        else:
            ee = float(v)
        scene = generate_scene(family, nn, seed=seed, profile=profile, dim=dim)
        rng = np.random.default_rng(seed + 1)
        Q = rng.uniform(0.0, 1.0, (mm, scene.dimension))

        def once():
            if mode == "maxdepth":
                return run_maxdepth(scene, structure, ee, tune_factor)[0]
            t0 = time.perf_counter()
            st = build_structure(scene, structure, ee, mm, tune_factor)
            t1 = time.perf_counter()
            st.query_many(Q)
            t2 = time.perf_counter()
            d1, d2 = structure_params(st)
            pn, dn = node_counts(st)
            return BenchRecord(structure, nn, mm, ee, d1, d2, t1 - t0, t2 - t1, pn, dn)

        if not warmed:
            once()
            warmed = True
        records.append(_median_record([once() for _ in range(repeat)]))
    return records


def records_csv(records):
    buf = io.StringIO()
    names = list(BenchRecord.__dataclass_fields__)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in records:
        row = asdict(r)
        w.writerow([repr(row[k]) if isinstance(row[k], float) else row[k] for k in names])
    return buf.getvalue()

