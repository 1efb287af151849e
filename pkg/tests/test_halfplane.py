import numpy as np
import pytest

from approxdepth import Halfplane, build_pd, generate_scene, oracle, query_pd
from approxdepth.geometry import DomainError, slope_classes
from approxdepth.params import BALANCED, DUAL_ONLY, PRIMAL_ONLY, Params, choose_parameters
from approxdepth.scenes import Scene

from conftest import sandwich_violations
from test_naive import crossed_cells


def balanced(eps, d1):
    return Params(d1, eps / d1, BALANCED, eps, 1)


def test_empty():
    st = build_pd([], eps=0.1, m=100)
    e = query_pd(st, [0.5, 0.5])
    assert (e.d_minus, e.d_plus) == (0, 0)


def test_no_crossing_means_no_dual_trees():
    S = [Halfplane(0.0, -0.5, "upper"), Halfplane(0.0, 2.0, "upper")]
    st = build_pd(S, balanced(2.0 ** -8, 2.0 ** -3))
    assert st.n_dual_nodes == 0 and st.n_primal_nodes == 1
    lo, hi = st.query_many(np.random.default_rng(1).uniform(0, 1, (40, 2)))
    assert (lo == 1).all() and (hi == 1).all()


def test_single_line_dual_chain():
    eps, d1 = 2.0 ** -8, 2.0 ** -3
    h = Halfplane(0.5, 0.2, "upper")
    st = build_pd([h], balanced(eps, d1))
    a, b = h.normal_form()
    cells = crossed_cells(a, b, 3)
    eng = st.engine
    assert eng.n_dual_points == cells
    f = eng.forest
    # one chain per crossed leaf, one point per node, all positive
    assert f.n_trees == cells
    assert f.n_nodes == cells * (f.K + 1)
    assert (f.cpos == 1).all() and (f.cneg == 0).all()


def test_sign_follows_side():
    eps, d1 = 2.0 ** -8, 2.0 ** -2
    # slopes in [0, 1] keep the identity class frame
    S = [Halfplane(0.3, 0.4, "upper"), Halfplane(0.6, 0.1, "lower"), Halfplane(0.9, -0.2, "lower")]
    st = build_pd(S, balanced(eps, d1))
    f = st.engine.forest
    roots = slice(0, f.n_trees)
    A, b = Scene(2, "halfplanes", S).halfspaces()
    assert (slope_classes(A) == 0).all()
    n_up = crossed_cells(A[0], b[0], 2)
    n_low = crossed_cells(A[1], b[1], 2) + crossed_cells(A[2], b[2], 2)
    assert f.cpos[roots].sum() == n_up and f.cneg[roots].sum() == n_low


def test_dual_points_match_crossings():
    sc = generate_scene("halfplanes", 60, seed=3)
    st = build_pd(sc, balanced(2.0 ** -9, 2.0 ** -4))
    A, b = sc.halfspaces()
    assert st.engine.n_dual_points == sum(crossed_cells(A[i], b[i], 4) for i in range(len(A)))


def test_slope_classes_partition():
    sc = generate_scene("halfplanes", 300, seed=4)
    A, _ = sc.halfspaces()
    cls = slope_classes(A)
    assert set(np.unique(cls)) <= {0, 1, 2, 3}


def test_domain_error():
    st = build_pd([Halfplane(0.1, 0.2)], eps=0.1, m=10)
    with pytest.raises(DomainError):
        st.query([0.5, -0.01])


@pytest.mark.parametrize("m", [10, 3000, 10 ** 6])
def test_all_regimes_sandwich(m):
    regimes = set()
    bad = 0
    for seed in range(150):
        rng = np.random.default_rng((seed, 1))
        sc = generate_scene("halfplanes", int(rng.integers(0, 80)), seed=seed,
                            profile="peak-noise" if seed % 2 else "uniform")
        eps = float(rng.choice([0.1, 0.02, 0.005]))
        st = build_pd(sc, eps=eps, m=m)
        regimes.add(st.params.regime)
        Q = rng.uniform(0, 1, (40, 2))
        lo, hi = st.query_many(Q)
        bad += sandwich_violations(sc, Q, eps, lo, hi)
    assert bad == 0
    assert regimes


def test_regimes_reached():
    n, eps = 100, 0.01
    assert choose_parameters(n, 1, eps).regime == DUAL_ONLY
    assert choose_parameters(n, 10 ** 6, eps).regime == PRIMAL_ONLY


def test_strong_form_500_scenes():
    for seed in range(500):
        rng = np.random.default_rng(10 ** 4 + seed)
        sc = generate_scene("halfplanes", int(rng.integers(1, 40)), seed=seed, profile="peak-noise")
        eps = float(rng.choice([0.1, 0.03, 0.01]))
        st = build_pd(sc, eps=eps, m=int(rng.choice([10, 1000, 10 ** 5])))
        q = rng.uniform(0, 1, 2)
        s = st.explain(q)
        c = oracle.classify(sc, q, eps)
        e = st.query(q)
        assert e.d_minus == (s == 2).sum() and e.d_plus == (s >= 1).sum()
        # counted in d_minus => contains q; contains q => counted in d_plus
        assert (c[s == 2] <= oracle.BAND_INSIDE).all()
        assert (s[c <= oracle.BAND_INSIDE] >= 1).all()
        # deep inside => counted in d_minus; counted in d_plus => within eps
        assert (s[c == oracle.DEEP_INSIDE] == 2).all()
        assert (c[s >= 1] <= oracle.BAND_OUTSIDE).all()


def test_near_boundary_adversarial(rng):
    """Queries placed at vertical distance just above and below eps from a line."""
    eps = 2.0 ** -7
    for seed in range(40):
        r = np.random.default_rng(seed)
        c = float(r.uniform(-1, 1))
        y0 = float(r.uniform(0.2, 0.8))
        S = [Halfplane(c, y0, "upper"), Halfplane(c, y0, "lower")]
        sc = Scene(2, "halfplanes", S)
        st = build_pd(sc, balanced(eps, 2.0 ** -3))
        x = r.uniform(0, 1, 50)
        norm = np.hypot(c, 1.0)
        off = np.concatenate([np.full(25, 1.0 + 1e-6), np.full(25, 0.75 - 1e-6)])
        sgn = np.where(r.random(50) < 0.5, 1.0, -1.0)
        y = c * x + y0 + sgn * off * eps * norm
        keep = (y >= 0) & (y <= 1)
        Q = np.stack([x[keep], y[keep]], axis=1)
        lo, hi = st.query_many(Q)
        assert sandwich_violations(sc, Q, eps, lo, hi) == 0
        # vertical gap at least eps: the containing halfplane is certified
        far = np.abs(off[keep]) > 1.0
        assert (lo[far] == 1).all()


def test_gap_bounded_by_close_boundaries(rng):
    """hi - lo never exceeds the number of lines within vertical distance 3eps/4 + one cell fuzz."""
    for seed in range(30):
        sc = generate_scene("halfplanes", 40, seed=seed, profile="peak-noise")
        eps = 0.02
        st = build_pd(sc, eps=eps, m=2000)
        Q = rng.uniform(0, 1, (100, 2))
        lo, hi = st.query_many(Q)
        A, b = sc.halfspaces()
        vert = np.abs(Q @ A.T - b) / np.abs(A[:, 1])
        assert ((hi - lo) <= (vert <= eps).sum(axis=1)).all()


def test_node_bounds_smoke():
    for n, eps, m in ((500, 2.0 ** -8, 5000), (2000, 2.0 ** -10, 20000)):
        sc = generate_scene("halfplanes", n, seed=n)
        st = build_pd(sc, eps=eps, m=m)
        d1, d2 = st.params.delta1, st.params.delta2
        assert st.n_primal_nodes <= 64 * n / d1
        assert st.n_dual_nodes <= 64 * (n / d1) * max(1, np.log2(1 / d2) + 4)
