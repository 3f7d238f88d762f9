import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pair
from dualorlicz.exceptions import ConstructionError, DimensionError, DomainError
from dualorlicz.geometry import (
    LinearMap,
    ball_support,
    direction,
    ellipsoid,
    ellipsoid_support,
    grid_body,
    linear_image,
    load_grid,
    make_ball,
    make_fourier_star,
    make_ridge_star,
    polar_star_body,
    polytope_support,
    pth_radial_combination,
    radial_metric,
    random_star,
    restrict_to_coordinate_subspace,
    sample_grid,
    save_grid,
    scale,
)
from dualorlicz.integrate import build_rule


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=6).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_direction_is_unit(coords):
    assert abs(np.linalg.norm(direction(coords)) - 1) <= 1e-14


def test_direction_rejects_zero_and_scalars():
    with pytest.raises(DomainError):
        direction([0.0, 0.0])
    with pytest.raises(DimensionError):
        direction([1.0])


def test_ball_constant_radial(nodes2):
    B = make_ball(2, 2.5)
    assert np.all(B.values(nodes2) == 2.5)
    assert B.positive and B.upper == 2.5


def test_zero_ball_is_origin(nodes2):
    O = make_ball(3, 0.0)
    assert not O.positive
    assert np.all(O.values(build_rule(3, 8)) == 0.0)


def test_ball_rejects_bad_input():
    with pytest.raises(DimensionError):
        make_ball(1, 1.0)
    with pytest.raises(ConstructionError):
        make_ball(2, -1.0)


def test_fourier_star_values():
    P = make_fourier_star(1.0, [(3, 0.5)])
    assert P(np.array([1.0, 0.0])) == pytest.approx(1.5)
    assert P(direction([math.cos(math.pi / 3), math.sin(math.pi / 3)])) == pytest.approx(0.5)
    assert P.lower == 0.5 and P.upper == 1.5


def test_fourier_star_must_be_positive():
    with pytest.raises(ConstructionError):
        make_fourier_star(1.0, [(2, 0.6), (3, 0.4)])


def test_evaluation_is_pure(nodes2):
    K, _ = pair(2, 3)
    a, b = K.values(nodes2), K.values(nodes2)
    assert np.array_equal(a, b)


def test_random_bodies_respect_bounds(nodes2):
    for seed in range(20):
        for n in (2, 3, 4):
            K = random_star(n, np.random.default_rng(seed))
            v = K.values(build_rule(n, 16, seed=1) if n > 3 else build_rule(n, 16))
            assert np.all(v <= K.upper + 1e-12) and np.all(v >= K.lower - 1e-12)
            assert K.lower > 0


def test_linear_map_rejects_singular():
    with pytest.raises(ConstructionError):
        LinearMap.from_matrix([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(DimensionError):
        LinearMap.from_matrix([[1.0, 2.0, 3.0]])


def test_linear_image_of_ball_is_ellipse():
    E = linear_image(make_ball(2), np.diag([2.0, 1.0]))
    assert E(np.array([1.0, 0.0])) == pytest.approx(2.0)
    assert E(np.array([0.0, 1.0])) == pytest.approx(1.0)
    u = direction([1.0, 1.0])
    # x = t u with (x1/2)^2 + x2^2 = 1
    assert E(u) == pytest.approx(1 / math.sqrt(0.5 / 4 + 0.5))


def test_linear_image_composes(nodes2):
    K, _ = pair(2, 1)
    A = np.array([[1.0, 0.3], [-0.2, 1.5]])
    B = np.array([[0.7, 0.0], [0.4, 1.1]])
    lhs = linear_image(linear_image(K, B), A)
    rhs = linear_image(K, A @ B)
    assert radial_metric(lhs, rhs, nodes2) <= 1e-12


def test_scalar_map_equals_dilatation(nodes2):
    K, _ = pair(2, 2)
    assert radial_metric(linear_image(K, LinearMap.scalar(3.0, 2)), scale(K, 3.0), nodes2) <= 1e-12


def test_pth_combination_of_balls():
    C = pth_radial_combination(1.0, make_ball(2, 3.0), 2.0, 1.0, make_ball(2, 4.0))
    assert C(np.array([0.0, 1.0])) == pytest.approx(5.0, abs=1e-14)
    H = pth_radial_combination(1.0, make_ball(2, 1.0), -1.0, 1.0, make_ball(2, 1.0))
    assert H(np.array([1.0, 0.0])) == pytest.approx(0.5)


def test_pth_combination_negative_p_zero_convention():
    C = pth_radial_combination(1.0, make_ball(2, 0.0), -1.0, 1.0, make_ball(2, 2.0))
    assert C(np.array([1.0, 0.0])) == 0.0
    assert not C.positive


def test_pth_combination_rejects_p_zero():
    with pytest.raises(DomainError):
        pth_radial_combination(1.0, make_ball(2), 0.0, 1.0, make_ball(2))


def test_radial_metric_of_balls(nodes2):
    assert radial_metric(make_ball(2, 1.0), make_ball(2, 1.25), nodes2) == pytest.approx(0.25)


def test_restriction_to_coordinate_plane():
    E = ellipsoid([3.0, 2.0, 1.0])
    S = restrict_to_coordinate_subspace(E, [0, 2])
    assert S.dimension == 2
    assert S(np.array([1.0, 0.0])) == pytest.approx(3.0)
    assert S(np.array([0.0, 1.0])) == pytest.approx(1.0)
    with pytest.raises(DimensionError):
        restrict_to_coordinate_subspace(E, [0, 3])


def test_polar_of_ellipsoid_support():
    h = ellipsoid_support(np.diag([2.0, 1.0]))
    P = polar_star_body(h)
    # polar of diag(2,1) B is diag(1/2, 1) B
    assert P(np.array([1.0, 0.0])) == pytest.approx(0.5)
    assert P(np.array([0.0, 1.0])) == pytest.approx(1.0)
    E = ellipsoid([0.5, 1.0])
    assert radial_metric(P, E, build_rule(2, 64)) <= 1e-12


def test_polar_of_ball_support():
    P = polar_star_body(ball_support(3, 4.0))
    assert P(np.array([0.0, 0.0, 1.0])) == pytest.approx(0.25)


def test_polytope_support_square():
    sq = polytope_support([[1, 1], [1, -1], [-1, 1], [-1, -1]])
    assert sq(direction([1.0, 1.0])) == pytest.approx(math.sqrt(2))
    assert sq.lower == pytest.approx(1.0)
    with pytest.raises(ConstructionError):
        polytope_support([[1, 1], [2, 1], [1, 2]])


def test_grid_roundtrip_two_dim(tmp_path):
    P = make_fourier_star(1.0, [(3, 0.5)])
    rec = sample_grid(P, [512])
    path = tmp_path / "p.json"
    save_grid(rec, path)
    G = load_grid(path)
    nodes = build_rule(2, 512).nodes
    assert np.allclose(G.values(nodes), P.values(nodes), rtol=0, atol=1e-12)
    off = build_rule(2, 97).nodes
    # linear interpolation error is O(h^2 * curvature)
    assert radial_metric(G, P, off) <= 5e-4


def test_grid_roundtrip_three_dim():
    E = ellipsoid([1.5, 1.0, 0.8])
    G = grid_body(sample_grid(E, [24, 48]))
    assert G.dimension == 3
    probe = build_rule(3, 11).nodes
    assert radial_metric(G, E, probe) <= 2e-2


def test_grid_rejects_bad_records():
    with pytest.raises(ConstructionError):
        grid_body({"dimension": 2, "grid_shape": [4], "values": [1, 1, 1]})
    with pytest.raises(ConstructionError):
        grid_body({"dimension": 2, "grid_shape": [3], "values": [1, -1, 1]})


def test_ridge_star_positive():
    R = make_ridge_star(4, 1.0, [([1, 0, 0, 0], 2.0, 0.3, 0.0)])
    assert R(np.array([1.0, 0, 0, 0])) == pytest.approx(1.0 + 0.3 * math.cos(2.0))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), p=st.sampled_from([-2.0, -1.0, 0.5, 1.0, 3.0]))
def test_pth_combination_homogeneous(seed, p):
    K, L = pair(2, seed)
    nodes = build_rule(2, 32).nodes
    C = pth_radial_combination(0.3, K, p, 0.7, L)
    C2 = pth_radial_combination(0.3, scale(K, 2.0), p, 0.7, scale(L, 2.0))
    assert np.allclose(C2.values(nodes), 2.0 * C.values(nodes), rtol=1e-13, atol=0)
