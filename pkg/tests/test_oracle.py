import numpy as np
import pytest

from approxdepth import Halfplane, generate_scene, oracle
from approxdepth.geometry import ParameterError
from approxdepth.scenes import Scene

TRI = np.array([[[0.2, 0.2], [0.8, 0.2], [0.5, 0.8]]])


def tri_scene(V):
    return Scene(2, "triangles", np.asarray(V, float))


def test_empty_scene():
    sc = Scene(2, "halfplanes", [])
    assert oracle.exact_depth(sc, [[0.5, 0.5]])[0] == 0
    assert oracle.exact_depth(tri_scene(np.zeros((0, 3, 2))), [[0.5, 0.5]])[0] == 0


def test_closed_objects():
    sc = tri_scene(TRI)
    assert oracle.exact_depth(sc, TRI[0]).tolist() == [1, 1, 1]
    h = Scene(2, "halfplanes", [Halfplane(0.0, 0.5, "upper")])
    assert oracle.exact_depth(h, [[0.3, 0.5]])[0] == 1


def test_inner_depth_examples():
    sc = tri_scene(TRI)
    assert oracle.inner_eps_depth(sc, [[0.5, 0.4]], 1e-6)[0] == 1
    # inside, within eps of the bottom edge
    assert oracle.inner_eps_depth(sc, [[0.5, 0.21]], 0.05)[0] == 0
    assert oracle.exact_depth(sc, [[0.5, 0.21]])[0] == 1


def test_inner_matches_segment_distance(rng):
    sc = generate_scene("triangles", 30, seed=3)
    Q = rng.uniform(0, 1, (400, 2))
    inside = oracle._margins(sc, Q).min(axis=2) >= 0
    dist = oracle.segment_boundary_distance(sc.objects, Q)
    for eps in (0.01, 0.05):
        assert (oracle.inner_eps_depth(sc, Q, eps) == (inside & (dist >= eps)).sum(axis=1)).all()


def test_inner_monotone(rng):
    sc = generate_scene("halfspaces", 30, seed=4, dim=3)
    Q = rng.uniform(0, 1, (100, 3))
    a, b = oracle.inner_eps_depth(sc, Q, 0.01), oracle.inner_eps_depth(sc, Q, 0.1)
    assert (b <= a).all()


def test_outer_examples():
    sc = tri_scene(TRI)
    assert (oracle.outer_eps_depth(sc, TRI[0], 0.0) == oracle.exact_depth(sc, TRI[0])).all()
    assert oracle.outer_eps_depth(sc, [[0.5, 0.2 - 0.025]], 0.05)[0] == 1
    # a sliver: the offset corner sticks out far beyond eps
    S = tri_scene([[[0.1, 0.5], [0.9, 0.5], [0.1, 0.52]]])
    eps = 0.005
    q = np.array([[0.9 + 10 * eps, 0.5 - 0.5 * eps]])
    assert oracle.segment_boundary_distance(S.objects, q)[0, 0] >= 9.9 * eps
    assert oracle.outer_eps_depth(S, q, eps)[0] == 1


def test_outer_unknown_family():
    with pytest.raises(ParameterError):
        oracle.outer_eps_depth(tri_scene(TRI), [[0.5, 0.5]], 0.1, family="disks")


@pytest.mark.parametrize("fam,dim", [("halfplanes", 2), ("halfspaces", 3), ("triangles", 2),
                                     ("simplices", 3)])
def test_sandwich_of_oracle(fam, dim, rng):
    sc = generate_scene(fam, 40, seed=5, dim=dim)
    Q = rng.uniform(0, 1, (300, dim))
    for eps in (0.004, 0.05):
        a = oracle.inner_eps_depth(sc, Q, eps)
        e = oracle.exact_depth(sc, Q)
        o = oracle.outer_eps_depth(sc, Q, eps)
        assert (a <= e).all() and (e <= o).all()
    if fam == "simplices":
        x = oracle.outer_eps_depth(sc, Q, 0.05, variant="offset-xspan")
        assert (e <= x).all() and (x <= o).all()


def test_report_partition(rng):
    sc = generate_scene("halfplanes", 50, seed=6)
    q = rng.uniform(0, 1, 2)
    r = oracle.report(sc, q, 0.05)
    assert len(r.classes) == 50
    assert r.inner_eps <= r.exact <= r.outer_eps
    assert r.exact == oracle.exact_depth(sc, q[None])[0]


def test_prism_identity(rng):
    sc = generate_scene("simplices", 30, seed=7)
    Q = rng.uniform(0, 1, (300, 3))
    p = oracle.prism_depths(sc, Q, 0.02)
    assert (p["pi"] - p["nu"] == oracle.exact_depth(sc, Q)).all()


def test_exact_max_depth():
    k = [Halfplane(0.0, -1.0, "upper")] * 4
    assert oracle.exact_max_depth(Scene(2, "halfplanes", k))[1] == 4
    tri = [Halfplane(0.0, 0.3, "upper"), Halfplane(1.0, 0.0, "lower"), Halfplane(-1.0, 1.0, "lower")]
    q, dmax = oracle.exact_max_depth(Scene(2, "halfplanes", tri))
    assert dmax == 3 and oracle.exact_depth(Scene(2, "halfplanes", tri), q[None])[0] == 3


def test_exact_max_agrees_with_dense_grid():
    for seed in range(10):
        sc = generate_scene("halfplanes", 20, seed=seed, profile="peak-noise")
        _, best = oracle.exact_max_depth(sc)
        g = (np.arange(300) + 0.5) / 300
        G = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
        dense = oracle.exact_depth(sc, G).max()
        assert dense <= best <= dense + 2


def test_exact_max_refuses_large():
    with pytest.raises(ParameterError):
        oracle.exact_max_depth(generate_scene("halfplanes", 501, seed=0))
