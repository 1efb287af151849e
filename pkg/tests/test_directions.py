import itertools
import math

import numpy as np
import pytest

from approxdepth.directions import (CapFamily, DirectionSet, cap_angle, cap_assign, edge_angles,
                                    face_grid_axes, face_grid_radius, good_direction,
                                    good_directions, line_angle_gap, minimal_cap_grid)
from approxdepth.geometry import HyperplaneD, ParameterError, simplex_facets
from approxdepth.simplices import FrameFamily, default_frames, frame_assign

EQUILATERAL = np.array([[0.2, 0.2], [0.8, 0.2], [0.5, 0.2 + 0.6 * math.sqrt(3) / 2]])


def test_cap_angle_d3():
    assert math.isclose(math.tan(cap_angle(3)), 1 / math.sqrt(2))
    assert math.isclose(cap_angle(3), 0.6155, abs_tol=1e-4)


def test_minimal_cap_grids():
    assert [minimal_cap_grid(d) for d in (2, 3, 4)] == [1, 3, 3]
    with pytest.raises(ParameterError):
        CapFamily(4, g=1)


def test_cap_identity_for_vertical_normal():
    cap, h = cap_assign(HyperplaneD((0.0, 0.0, -0.5), "above"), 3)
    fam = CapFamily(3)
    assert np.allclose(fam.rotations[cap] @ [0, 0, 1.0], [0, 0, 1.0])
    assert np.allclose(h.eta[:-1], 0.0)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_caps_contain_assigned_normals(d, rng):
    fam = CapFamily(d)
    A = rng.normal(size=(1000, d))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    cap = fam.assign(A)
    ang = np.arccos(np.clip(np.sum(A * fam.centers[cap], axis=1), -1, 1))
    assert ang.max() <= fam.phi + 1e-9


def test_cap_rotation_bounds_slopes(rng):
    fam = CapFamily(3)
    A = rng.normal(size=(500, 3))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    cap = fam.assign(A)
    A2 = np.einsum("nij,nj->ni", fam.rotations[cap], A)
    slopes = np.abs(A2[:, :2] / A2[:, 2:])
    assert slopes.max() <= fam.tan_phi + 1e-9


def test_good_direction_equilateral():
    D = DirectionSet()
    ang = edge_angles(EQUILATERAL)[0]
    ok = [u for u in range(D.count) if line_angle_gap(D.angles[u], ang).min() >= D.beta - 1e-12]
    assert ok
    assert good_direction(EQUILATERAL) == ok[0]


def test_good_direction_avoids_horizontal_edge():
    tri = np.array([[0.1, 0.1], [0.9, 0.1], [0.3, 0.2]])
    D = DirectionSet()
    u = good_direction(tri)
    assert line_angle_gap(D.angles[u], 0.0) >= D.beta - 1e-12


def test_good_direction_permutation_invariant(rng):
    for _ in range(50):
        tri = rng.uniform(0, 1, (3, 2))
        u = good_direction(tri)
        for perm in itertools.permutations(range(3)):
            assert good_direction(tri[list(perm)]) == u


def test_every_triangle_has_good_direction(rng):
    V = rng.uniform(0, 1, (2000, 3, 2))
    u = good_directions(V)
    D = DirectionSet()
    gap = line_angle_gap(D.angles[u][:, None], edge_angles(V)).min(axis=1)
    assert gap.min() >= D.beta - 1e-12


def test_face_grid_covering_radius(rng):
    g = 8
    axes = face_grid_axes(g)
    rho = face_grid_radius(3, g)
    assert len(axes) == 3 * g * g
    v = rng.normal(size=(5000, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    best = np.arccos(np.clip(np.abs(v @ axes.T).max(axis=1), -1, 1))
    assert best.max() <= rho + 1e-9


def regular_simplex():
    V = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    return 0.5 + 0.3 * V / math.sqrt(3)


def test_regular_simplex_has_valid_frame():
    fam = default_frames()
    valid = [f for f in range(len(fam)) if fam.is_valid(regular_simplex(), f)]
    assert valid
    f, R = frame_assign(regular_simplex()[None])
    assert fam.is_valid(regular_simplex(), int(f[0]))


def test_frame_guarantees_random(rng):
    fam = default_frames()
    V = 0.5 + 0.4 * rng.uniform(-1, 1, (300, 4, 3))
    f, R = frame_assign(V)
    nrm, _ = simplex_facets(V)
    nz = np.abs(np.einsum("nft,nt->nf", nrm, R[:, 2, :]))
    assert nz.min() >= math.sin(fam.beta3) - 1e-12
    assert all(fam.is_valid(V[i], f[i]) for i in range(len(V)))


def test_axis_frame_for_steep_facets():
    fam = default_frames()
    # every facet normal has a large vertical component
    V = np.array([[0.2, 0.2, 0.5], [0.8, 0.3, 0.52], [0.4, 0.8, 0.48], [0.5, 0.45, 0.56]])
    f, R = frame_assign(V[None])
    assert fam.is_valid(V, int(f[0]))
    assert abs(R[0, 2, 2]) > 0.99


def test_frame_symmetry(rng):
    fam = default_frames()
    # swapping x and y permutes the axis family, so a valid frame still exists
    for _ in range(30):
        V = 0.5 + 0.4 * rng.uniform(-1, 1, (4, 3))
        W = V[:, [1, 0, 2]]
        fv, _ = frame_assign(V[None])
        fw, _ = frame_assign(W[None])
        assert fam.is_valid(V, int(fv[0])) and fam.is_valid(W, int(fw[0]))


def test_frame_family_parameters():
    fam = FrameFamily()
    assert fam.beta3 > 0
    assert math.isclose(fam.distance_multiple(), 1 / (math.sin(fam.beta2) * math.sin(fam.beta3)))
    with pytest.raises(ParameterError):
        FrameFamily(grid=4)
