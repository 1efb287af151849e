"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from approxdepth import build_pd, generate_scene, oracle
from approxdepth import bench, cli
from approxdepth.decompose import decompose_triangle, trapezoid_sum
from approxdepth.directions import DirectionSet, good_directions
from approxdepth.params import choose_parameters, choose_parameters_d, choose_parameters_simplex3
from approxdepth.scenes import Scene
from approxdepth.simplices import default_frames, prism_arrays, prism_margins, prism_sum

EPS_CYCLE = (0.1, 0.02, 0.004)
SANDWICH_SCENES = 500
SANDWICH_BUDGET = 300.0
FAMILIES = (  # family, structure, dim, max n
    ("halfplanes", "pd", 2, 500),
    ("triangles", "triangle", 2, 200),
    ("halfspaces", "halfspace", 3, 200),
    ("halfspaces", "halfspace", 4, 200),
    ("simplices", "simplex3", 3, 50),
)


@pytest.fixture
def say(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}")
    return emit


def scene_for(family, dim, nmax, seed):
    rng = np.random.default_rng((seed, 1))
    n = int(rng.integers(0, nmax + 1))
    prof = "peak-noise" if family == "halfplanes" and seed % 2 else "uniform"
    return generate_scene(family, n, seed=seed, profile=prof, dim=dim), rng


def test_1_sandwich(say):
    t0 = time.perf_counter()
    bad, checked, lines = 0, 0, []
    for family, kind, dim, nmax in FAMILIES:
        tf = time.perf_counter()
        fb = 0
        for seed in range(SANDWICH_SCENES):
            sc, rng = scene_for(family, dim, nmax, seed)
            # each scene takes one tolerance; every tolerance covers a third of the scenes
            eps = EPS_CYCLE[seed % 3]
            Q = rng.uniform(0, 1, (100, sc.dimension))
            st = bench.build_structure(sc, kind, eps, len(Q))
            lo, hi = st.query_many(Q)
            inner, exact, outer = bench.oracle_bounds(sc, Q, eps)
            wrong = (inner > lo) | (lo > exact) | (exact > hi) | (hi > outer)
            wrong |= (lo.astype(np.int64) != lo) | (hi.astype(np.int64) != hi)
            fb += int(wrong.sum())
            checked += len(Q)
        bad += fb
        lines.append(f"{family}/d{dim}: {fb} violations in {time.perf_counter() - tf:.0f}s")
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < SANDWICH_BUDGET
    say(1, ok, f"{checked} queries, {bad} violations, {elapsed:.0f}s "
               f"(budget {SANDWICH_BUDGET:.0f}s); " + "; ".join(lines))
    assert bad == 0
    assert elapsed < SANDWICH_BUDGET


def test_2_strong_form(say):
    bad, objs = 0, 0
    specs = (("halfplanes", 2, "pd"), ("halfplanes", 2, "naive"), ("halfspaces", 3, "halfspace"),
             ("halfspaces", 4, "halfspace"), ("halfspaces", 3, "naive"))
    for family, dim, kind in specs:
        for seed in range(100):
            sc, rng = scene_for(family, dim, 60, seed)
            eps = EPS_CYCLE[seed % 3]
            st = bench.build_structure(sc, kind, eps, 20)
            Q = rng.uniform(0, 1, (20, dim))
            lo, hi = st.query_many(Q)
            for i, q in enumerate(Q):
                s = st.explain(q)
                c = oracle.classify(sc, q, eps)
                objs += len(s)
                # deep objects certified, certified objects contain q, counted ones are within eps
                bad += int(((c == oracle.DEEP_INSIDE) & (s != 2)).sum())
                bad += int(((s == 2) & (c > oracle.BAND_INSIDE)).sum())
                bad += int(((s >= 1) & (c == oracle.FAR_OUTSIDE)).sum())
                bad += int((s == 2).sum() != lo[i]) + int((s >= 1).sum() != hi[i])
    say(2, bad == 0, f"{objs} per-object decisions over 100 scenes x {len(specs)} structures, "
                     f"{bad} violations")
    assert bad == 0


def maxdepth_check(sc, kind, eps):
    qmax, _ = oracle.exact_max_depth(sc)
    rec, r = bench.run_maxdepth(sc, kind, eps)
    return (int(r.d_minus < oracle.inner_eps_depth(sc, qmax[None], eps)[0])
            + int(r.d_plus < oracle.inner_eps_depth(sc, qmax[None], eps / 2)[0]))


def test_3_maxdepth(say):
    bad, runs = 0, 0
    for seed in range(100):
        sc, _ = scene_for("halfplanes", 2, 200, seed)
        eps = (0.05, 0.01)[seed % 2]
        for kind in ("pd", "naive"):
            bad += maxdepth_check(sc, kind, eps)
            runs += 1
    # 3D grids hold (2 sqrt 3 / eps)^3 centers: 42M at eps = 0.01, so that tolerance gets a few scenes
    for seed in range(105):
        sc, _ = scene_for("halfspaces", 3, 100, seed)
        eps = (0.05, 0.02)[seed % 2] if seed < 100 else 0.01
        bad += maxdepth_check(sc, "halfspace", eps)
        runs += 1
    say(3, bad == 0, f"{runs} maximum-depth searches (2D pd/naive, 3D halfspace), {bad} violations")
    assert bad == 0


def far_mask(sc, Q, eps):
    """Queries at distance > eps from every object boundary."""
    if len(sc) == 0:
        return np.ones(len(Q), bool)
    if sc.family == "triangles":
        return (oracle.segment_boundary_distance(sc.objects, Q) > eps).all(axis=1)
    f = oracle._margins(sc, Q)
    fmin = f.min(axis=2)
    if sc.family in ("halfplanes", "halfspaces"):
        return (np.abs(fmin) > eps).all(axis=1)
    # simplices: clear of the facets, and of both slanted planes of every prism over the query
    ok = ((fmin > eps) | (f < -eps).any(axis=2)).all(axis=1)
    inx, mA, mB = prism_margins(prism_arrays(sc.objects), Q)
    return ok & np.where(inx, np.minimum(np.abs(mA), np.abs(mB)) > eps, True).all(axis=1)


def test_4_exact_off_band(say):
    target = 10 ** 4
    specs = (("halfplanes", "pd", 2), ("halfplanes", "naive", 2), ("triangles", "triangle", 2),
             ("halfspaces", "halfspace", 3), ("halfspaces", "halfspace", 4),
             ("halfspaces", "naive", 3), ("simplices", "simplex3", 3))
    bad, lines = 0, []
    for family, kind, dim in specs:
        got, fb, seed = 0, 0, 0
        while got < target:
            sc, rng = scene_for(family, dim, 20, seed)
            eps = EPS_CYCLE[seed % 3]
            Q = rng.uniform(0, 1, (400, dim))
            Q = Q[far_mask(sc, Q, eps)][:target - got]
            st = bench.build_structure(sc, kind, eps, len(Q))
            lo, hi = st.query_many(Q)
            ex = oracle.exact_depth(sc, Q)
            fb += int(((lo != ex) | (hi != ex)).sum())
            got += len(Q)
            seed += 1
        bad += fb
        lines.append(f"{kind}/d{dim}: {fb}")
    say(4, bad == 0, f"{target} far (scene, query) pairs per structure, violations "
                     + ", ".join(lines))
    assert bad == 0


def test_5_signed_decompositions(say):
    rng = np.random.default_rng(5)
    tris = generate_scene("triangles", 1000, seed=5).objects
    dirs = good_directions(tris)
    bad_t = 0
    for V, u in zip(tris, dirs):
        P = np.vstack([V.mean(axis=0) + rng.normal(0, 0.1, (5, 2)), rng.uniform(0, 1, (5, 2))])
        one = Scene(2, "triangles", V[None])
        bad_t += int((trapezoid_sum(V, P, int(u)) != oracle.exact_depth(one, P)).sum())
    spx = generate_scene("simplices", 1000, seed=5).objects
    fam = default_frames()
    bad_s = 0
    for V in spx:
        P = np.vstack([V.mean(axis=0) + rng.normal(0, 0.1, (5, 3)), rng.uniform(0, 1, (5, 3))])
        one = Scene(3, "simplices", V[None])
        bad_s += int((prism_sum(V, P, fam=fam) != oracle.exact_depth(one, P)).sum())
    say(5, bad_t == bad_s == 0, f"10000 triangle pairs: {bad_t} mismatches; "
                                f"10000 simplex pairs: {bad_s} mismatches")
    assert bad_t == 0 and bad_s == 0


def test_6_pi_nu_identity(say):
    bad, total = 0, 0
    for seed in range(20):
        sc = generate_scene("triangles", 25, seed=seed, profile="peak-noise" if seed % 2 else
                            "uniform")
        Q = np.random.default_rng((seed, 1)).uniform(0, 1, (50, 2))
        pi = np.zeros(len(Q), np.int64)
        nu = np.zeros(len(Q), np.int64)
        for V, u in zip(sc.objects, good_directions(sc.objects)):
            R = DirectionSet().rotation(int(u))
            P = (Q - 0.5) @ R.T + 0.5
            for t in decompose_triangle(V, int(u)):
                (pi if t.sign > 0 else nu)[:] += t.contains(P)
        bad += int((pi - nu != oracle.exact_depth(sc, Q)).sum())
        total += len(Q)
    say(6, bad == 0, f"{total} triangle queries, {bad} mismatches between pi - nu and depth")
    assert bad == 0


def test_7_parameters(say):
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(50):
        n = int(10 ** rng.uniform(1, 6))
        m = int(10 ** rng.uniform(0, 7))
        eps = float(10 ** rng.uniform(-3, -0.3))
        cases = [(choose_parameters(n, m, eps), math.sqrt(n * eps / m), n * eps, n / eps)]
        for d in (3, 4):
            cases.append((choose_parameters_d(n, m, eps, d),
                          (n / m) ** (1 / (2 * (d - 1))) * math.sqrt(eps),
                          n * eps ** (d - 1), n / eps ** (d - 1)))
        cases.append((choose_parameters_simplex3(n, m, eps), eps / (m * eps ** 2 / n) ** 0.2,
                      n * eps ** 3, n / eps ** 2))
        for p, raw, lo_thr, hi_thr in cases:
            bad += int(p.delta1 * p.delta2 != eps)
            if m <= lo_thr:
                bad += int(p.delta1 != 1.0)
            elif m >= hi_thr:
                bad += int(p.delta2 != 1.0)
            else:
                floor1 = 2.0 ** math.ceil(math.log2(eps) - 1e-12)
                want = min(1.0, max(floor1, 2.0 ** round(math.log2(raw))))
                bad += int(p.delta1 != want)
    say(7, bad == 0, f"50 (n, m, eps) triples x 4 variants, {bad} mismatches")
    assert bad == 0


def test_8_performance_trend(say):
    sc = generate_scene("halfplanes", 200_000, seed=8, profile="peak-noise")
    eps = 0.002
    bench.run_maxdepth(generate_scene("halfplanes", 50, seed=8), "pd", 0.1)
    bench.run_maxdepth(generate_scene("halfplanes", 50, seed=8), "naive", 0.1)
    totals = {}
    for kind in ("pd", "naive"):
        t = []
        for _ in range(3):
            rec, _ = bench.run_maxdepth(sc, kind, eps)
            t.append(rec.build_time + rec.query_time)
        totals[kind] = float(np.median(t))
    ratio = totals["pd"] / totals["naive"]
    say(8, ratio < 1.0, f"n = 200000, eps = 0.002: pd {totals['pd']:.1f}s, naive "
                        f"{totals['naive']:.1f}s, ratio {ratio:.2f} (median of 3)")
    assert ratio < 1.0


BIG_BUILD = """
import time
import numpy as np
from approxdepth import build_pd, generate_scene
sc = generate_scene("halfplanes", 100000, seed=9, profile="peak-noise")
build_pd(generate_scene("halfplanes", 100, seed=9), eps=0.01, m=100)
t = time.perf_counter()
st = build_pd(sc, eps=1e-3, m=10000)
dt = time.perf_counter() - t
st.query_many(np.random.default_rng(9).uniform(0, 1, (10000, 2)))
# VmHWM restarts at exec, unlike ru_maxrss which may carry the parent's peak
hwm = [l for l in open("/proc/self/status") if l.startswith("VmHWM")][0].split()[1]
print(dt, hwm)
"""


def test_9_smoke_complexity(say):
    bad, cases = 0, 0
    for n in (100, 1000, 10000):
        sc = generate_scene("halfplanes", n, seed=n, profile="peak-noise")
        for m in (100, 10 ** 4, 10 ** 6):
            for eps in (0.1, 0.01, 0.001):
                st = build_pd(sc, eps=eps, m=m)
                d1, d2 = bench.structure_params(st)
                pn, dn = bench.node_counts(st)
                bad += int(pn > 64 * n / d1) + int(dn > 64 * (n / d1) * math.log2(1 / d2))
                cases += 1
    out = subprocess.run([sys.executable, "-c", BIG_BUILD], capture_output=True, text=True,
                         check=True).stdout.split()
    secs, rss_kib = float(out[0]), int(out[1])
    gib = rss_kib / 2 ** 20
    ok = bad == 0 and secs < 10 and gib < 1
    say(9, ok, f"{cases} builds within node bounds ({bad} over); n = 1e5 build {secs:.1f}s, "
               f"peak RSS {gib:.2f} GiB including the interpreter, after 1e4 queries")
    assert bad == 0 and secs < 10 and gib < 1


def test_10_cli_determinism(say, tmp_path, monkeypatch):
    files = []
    for tag in "ab":
        s, p = tmp_path / f"{tag}.json", tmp_path / f"{tag}.ppm"
        assert cli.main(["gen", "--family", "halfplanes", "--n", "60", "--seed", "10",
                         "--profile", "peak-noise", "-o", str(s)]) == 0
        assert cli.main(["render", "-i", str(s), "--epsilon", "0.05", "--resolution", "64",
                         "-o", str(p)]) == 0
        files.append((s.read_bytes(), p.read_bytes()))
    same = files[0] == files[1]
    clean = cli.main(["verify", "-i", str(tmp_path / "a.json"), "--epsilon", "0.05"])
    real = bench.build_structure

    class Corrupt:
        def __init__(self, st):
            self.st = st

        def query_many(self, Q):
            lo, hi = self.st.query_many(Q)
            return lo, np.maximum(hi - 1, 0)

    monkeypatch.setattr(bench, "build_structure", lambda *a, **k: Corrupt(real(*a, **k)))
    broken = cli.main(["verify", "-i", str(tmp_path / "a.json"), "--epsilon", "0.05"])
    ok = same and clean == 0 and broken == 3
    say(10, ok, f"gen/render byte-identical: {same}; verify exit {clean} clean, "
                f"{broken} on a corrupted structure")
    assert ok
