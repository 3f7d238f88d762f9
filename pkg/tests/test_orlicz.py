import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from conftest import pair
from dualorlicz.exceptions import ConstructionError, DimensionError, DomainError
from dualorlicz.geometry import linear_image, make_ball, pth_radial_combination, radial_metric, scale
from dualorlicz.integrate import build_rule
from dualorlicz.orlicz import (
    PHI,
    PSI,
    DiscreteStarMeasure,
    LogT,
    OrliczFunction,
    check_associativity,
    curvature_violations,
    find_associativity_witness,
    level_bracket,
    log_combination,
    orlicz_combination_measure,
    orlicz_linear_combination,
    orlicz_sum,
    parse_phi,
    poly_function,
    power_function,
    psi_power_function,
    separable,
    solve_level,
    sum_powers,
)

GOLDEN = (1 + math.sqrt(5)) / 2


def test_solve_level_pythagoras():
    assert solve_level(power_function(2), [3.0, 4.0]) == pytest.approx(5.0, rel=1e-15)


@given(a=st.floats(0, 50), b=st.floats(0, 50))
def test_solve_level_linear_is_addition(a, b):
    lam = solve_level(power_function(1), [a, b])
    assert lam == pytest.approx(a + b, rel=1e-14, abs=0)


def test_solve_level_normalized_identity():
    phi = poly_function(1, 1, arity=1)
    assert solve_level(phi, [2.0], weights=None) == 2.0
    # weight and target pair on a one-atom measure
    assert solve_level(phi, [[2.0]], weights=[1.0]) == pytest.approx(2.0, rel=1e-15)


def test_solve_level_zero_vector_and_psi_zero():
    assert solve_level(power_function(2), [0.0, 0.0]) == 0.0
    with pytest.raises(DomainError):
        solve_level(psi_power_function(-1), [0.0, 1.0])


def test_solve_level_rejects_bad_input():
    with pytest.raises(DimensionError):
        solve_level(power_function(2), [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        solve_level(power_function(2), [-1.0, 2.0])
    with pytest.raises(DomainError):
        solve_level(power_function(2), [1.0, 2.0], target=0.0)


@settings(max_examples=200)
@given(
    r=st.lists(st.floats(1e-6, 1e6), min_size=2, max_size=2),
    desc=st.sampled_from(["lp:0.5", "lp:2", "lp:7", "poly:1,1", "sum-powers:1,3", "psi-lp:-1", "psi-lp:-3"]),
    target=st.floats(0.1, 10),
)
def test_solve_level_residual(r, desc, target):
    phi = parse_phi(desc)
    lam = solve_level(phi, r, target=target)
    level = phi.scalar(*(np.array(r) / lam))
    assert abs(level - target) <= 1e-12 * target * 4


def test_solve_level_vectorized_matches_scalar():
    phi = poly_function(1, 2)
    r = np.random.default_rng(0).uniform(0, 3, size=(50, 2))
    vec = solve_level(phi, r)
    assert np.array_equal(vec, [solve_level(phi, x) for x in r])


def test_bracket_contains_root():
    phi = sum_powers(1, 3)
    br = level_bracket(phi, [0.4, 2.0])
    lam = solve_level(phi, [0.4, 2.0])
    assert br.lo <= lam <= br.hi
    assert phi.scalar(br.tau, br.tau) == pytest.approx(1.0)


def test_class_validation():
    with pytest.raises(ConstructionError):
        OrliczFunction(2, PHI, lambda x: np.prod(x, axis=-1), label="product")
    with pytest.raises(ConstructionError):
        OrliczFunction(1, PHI, lambda x: x[..., 0] + 1.0, label="offset")
    with pytest.raises(ConstructionError):
        OrliczFunction(1, PSI, lambda x: x[..., 0], label="increasing")
    with pytest.raises(ConstructionError):
        power_function(-1.0)


def test_normalized_flag():
    assert power_function(3).normalized
    assert poly_function(2, 5).normalized
    raw = OrliczFunction(1, PHI, lambda x: 2 * x[..., 0])
    assert not raw.normalized


def test_derivative_estimated_when_missing():
    f = OrliczFunction(1, PHI, lambda x: x[..., 0] ** 1.5, label="t^1.5")
    assert f.deriv_estimated
    assert f.derivative_at_1() == pytest.approx(1.5, rel=1e-8)
    g = OrliczFunction(1, PSI, lambda x: 1 / x[..., 0] ** 2, label="t^-2")
    assert g.derivative_at_1() == pytest.approx(-2.0, rel=1e-8)


def test_orlicz_sum_balls_lp(nodes2):
    for p in (0.5, 1.0, 2.0, 5.0):
        S = orlicz_sum(power_function(p), [make_ball(2, 1.5), make_ball(2, 2.0)])
        assert np.allclose(S.values(nodes2), (1.5**p + 2.0**p) ** (1 / p), rtol=1e-14)


def test_orlicz_sum_poly_golden_ratio(nodes2):
    S = orlicz_sum(poly_function(1, 1), [make_ball(2), make_ball(2)])
    assert np.allclose(S.values(nodes2), GOLDEN, rtol=1e-15)
    # brute-force scan of the level function as an independent check
    lam = np.linspace(1.0, 2.0, 1_000_001)
    level = (1 / lam + 1 / lam**2)
    assert abs(lam[np.argmin(np.abs(level - 1))] - GOLDEN) < 2e-6


def test_orlicz_sum_identity_property(nodes2):
    K, _ = pair(2, 4)
    O = make_ball(2, 0.0)
    for desc in ("lp:0.5", "poly:1,3", "sum-powers:2,3"):
        phi = parse_phi(desc)
        assert np.array_equal(orlicz_sum(phi, [K, O]).values(nodes2), K.values(nodes2))
        assert np.array_equal(orlicz_sum(phi, [O, K]).values(nodes2), K.values(nodes2))


def test_orlicz_sum_zero_propagation(nodes2):
    S = orlicz_sum(power_function(2), [make_ball(2, 0.0), make_ball(2, 0.0)])
    assert np.all(S.values(nodes2) == 0.0)
    assert not S.positive


def test_orlicz_sum_flags_and_errors():
    K, L = pair(2, 0)
    S = orlicz_sum(power_function(2), [K, L])
    assert S.positive and S.continuous
    with pytest.raises(DimensionError):
        orlicz_sum(power_function(2), [K])
    with pytest.raises(DomainError):
        orlicz_sum(psi_power_function(-1), [K, make_ball(2, 0.0)])
    with pytest.raises(DimensionError):
        orlicz_sum(power_function(2), [K, make_ball(3)])


def test_orlicz_sum_bounds_hold(nodes2):
    for seed in range(10):
        K, L = pair(2, seed)
        for desc in ("lp:2", "psi-lp:-1", "poly:1,1"):
            S = orlicz_sum(parse_phi(desc), [K, L])
            v = S.values(nodes2)
            assert np.all(v <= S.upper * (1 + 1e-12)) and np.all(v >= S.lower * (1 - 1e-12))


def test_psi_sum_harmonic(nodes2):
    S = orlicz_sum(psi_power_function(-1), [make_ball(2, 1.0), make_ball(2, 1.0)])
    # 2 (1/lambda)^-1 = 1 means lambda = 1/2
    assert np.allclose(S.values(nodes2), 0.5, rtol=1e-15)
    K, L = pair(2, 9)
    H = pth_radial_combination(1, K, -1.0, 1, L)
    assert radial_metric(orlicz_sum(psi_power_function(-1), [K, L]), H, nodes2) <= 1e-14


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 5000), desc=st.sampled_from(["lp:0.5", "lp:2", "poly:1,1", "sum-powers:1,3", "psi-lp:-2"]))
def test_gl_covariance(seed, desc):
    rng = np.random.default_rng(seed)
    K, L = pair(2, seed)
    A = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    phi = parse_phi(desc)
    nodes = build_rule(2, 32).nodes
    lhs = linear_image(orlicz_sum(phi, [K, L]), A)
    rhs = orlicz_sum(phi, [linear_image(K, A), linear_image(L, A)])
    assert radial_metric(lhs, rhs, nodes) <= 1e-10 * max(1.0, lhs.upper)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 5000), r=st.floats(0.05, 20))
def test_homogeneity(seed, r):
    K, L = pair(2, seed)
    phi = poly_function(1, 2)
    nodes = build_rule(2, 32).nodes
    lhs = orlicz_sum(phi, [scale(K, r), scale(L, r)])
    assert radial_metric(lhs, scale(orlicz_sum(phi, [K, L]), r), nodes) <= 1e-12 * r * 10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 5000), grow=st.floats(1.0, 2.0))
def test_monotonicity(seed, grow):
    K, L = pair(2, seed)
    nodes = build_rule(2, 32).nodes
    for desc in ("lp:3", "psi-lp:-1"):
        phi = parse_phi(desc)
        small = orlicz_sum(phi, [K, L]).values(nodes)
        big = orlicz_sum(phi, [scale(K, grow), L]).values(nodes)
        assert np.all(big >= small - 1e-13)


def test_pointwise_continuity(nodes2):
    K, L = pair(2, 11)
    phi = poly_function(1, 1)
    S = orlicz_sum(phi, [K, L]).values(nodes2)
    gaps = []
    for k in (1, 10, 100, 1000, 10000):
        Kk = scale(K, 1 + 1 / k)
        gaps.append(np.max(np.abs(orlicz_sum(phi, [Kk, L]).values(nodes2) - S)))
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_measure_unit_dirac_is_bit_identical(nodes2):
    K, L = pair(2, 5)
    for desc in ("lp:2", "poly:1,1", "psi-lp:-1"):
        phi = parse_phi(desc)
        a = orlicz_combination_measure(phi, DiscreteStarMeasure.dirac([K, L])).values(nodes2)
        b = orlicz_sum(phi, [K, L]).values(nodes2)
        assert np.array_equal(a, b)


def test_measure_two_identical_atoms(nodes2):
    B = make_ball(2)
    mu = DiscreteStarMeasure([(0.5, [B, B]), (0.5, [B, B])])
    assert np.allclose(orlicz_combination_measure(power_function(1), mu).values(nodes2), 2.0, rtol=1e-15)


def test_measure_weighted_atoms(nodes2):
    B, B2 = make_ball(2), make_ball(2, 2.0)
    mu = DiscreteStarMeasure([(1.0, [B, B]), (2.0, [B2, B2])])
    v = orlicz_combination_measure(power_function(2), mu).values(nodes2)
    assert np.allclose(v, math.sqrt(18), rtol=1e-15)
    lam = v[0]
    assert abs(2 / lam**2 + 2 * 2 * (2 / lam) ** 2 - 1) <= 1e-12


def test_measure_validation():
    with pytest.raises(ConstructionError):
        DiscreteStarMeasure([])
    with pytest.raises(ConstructionError):
        DiscreteStarMeasure([(0.0, [make_ball(2)])])
    with pytest.raises(ConstructionError):
        DiscreteStarMeasure([(1.0, [make_ball(2)]), (1.0, [make_ball(2), make_ball(2)])])
    with pytest.raises(DomainError):
        orlicz_combination_measure(psi_power_function(-1, arity=1), DiscreteStarMeasure([(1.0, [make_ball(2, 0.0)])]))


def test_linear_combination_balls(nodes2):
    a, b, eps = 1.5, 0.5, 0.3
    t = power_function(1, 1)
    S = orlicz_linear_combination(t, t, make_ball(2, a), eps, make_ball(2, b))
    assert np.allclose(S.values(nodes2), a + eps * b, rtol=1e-15)
    f = power_function(3, 1)
    S = orlicz_linear_combination(f, f, make_ball(2, a), eps, make_ball(2, b))
    assert np.allclose(S.values(nodes2), (a**3 + eps * b**3) ** (1 / 3), rtol=1e-15)
    with pytest.raises(DomainError):
        orlicz_linear_combination(t, t, make_ball(2), 0.0, make_ball(2))


def test_linear_combination_converges(nodes2):
    K, L = pair(2, 6)
    f = poly_function(1, 1, arity=1)
    gaps = [radial_metric(orlicz_linear_combination(f, f, K, eps, L), K, nodes2) for eps in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-5


def test_log_combination_matches_product_solve():
    K, L = pair(2, 8)
    t, n = 0.3, 2
    nodes = build_rule(2, 16).nodes
    C = log_combination(K, L, t).values(nodes)
    for u, c in zip(nodes, C):
        a, b = K(u), L(u)
        lam = brentq(lambda x: (a / x) ** (n * (1 - t)) * (b / x) ** (n * t) - 1, 1e-3, 1e3, xtol=1e-15)
        assert c == pytest.approx(lam, rel=1e-10)


def test_log_combination_examples(nodes2):
    G = log_combination(make_ball(2, 1.0), make_ball(2, 4.0), 0.5)
    assert np.allclose(G.values(nodes2), 2.0, rtol=1e-15)
    K, _ = pair(2, 1)
    assert radial_metric(log_combination(K, K, 0.37), K, nodes2) <= 1e-14
    with pytest.raises(DomainError):
        log_combination(K, K, 1.0)
    with pytest.raises(DomainError):
        log_combination(K, make_ball(2, 0.0), 0.5)


def test_associativity_lp(nodes2):
    K, L = pair(2, 1)
    M, _ = pair(2, 2)
    for p in (1.0, 2.0):
        assert check_associativity(power_function(p), K, L, M, nodes2).max_gap <= 1e-10


def test_associativity_poly_witness():
    rep = find_associativity_witness(poly_function(1, 1), n=2, seed=0)
    assert rep.max_gap >= 1e-2
    # equal balls give no witness: both nestings coincide by symmetry
    B = make_ball(2)
    assert check_associativity(poly_function(1, 1), B, B, B, np.eye(2)).max_gap < 1e-12


def test_parse_phi_registry():
    assert parse_phi("lp:2").power == 2.0
    assert parse_phi("psi-lp:-1").kind == PSI
    assert parse_phi("sum-powers:1,2").arity == 2
    assert parse_phi("poly:1,1", arity=3).arity == 3
    assert isinstance(parse_phi("log-t:0.5"), LogT)
    for bad in ("lp", "lp:x", "cheb:2", "lp:-1", "log-t:2", "psi-lp:1"):
        with pytest.raises(DomainError):
            parse_phi(bad)


def test_curvature_tags():
    assert power_function(1, dimension=2).phi0_curvature == "strictly_concave"
    assert power_function(2, dimension=2).phi0_curvature == "concave"
    assert power_function(3, dimension=2).phi0_curvature == "strictly_convex"
    assert psi_power_function(-1).phi0_curvature == "strictly_convex"
    assert poly_function(1, 1, dimension=2).phi0_curvature == "strictly_concave"
    assert sum_powers(1, 3, dimension=2).phi0_curvature == "none"


def test_curvature_spot_check_warns_on_wrong_tag():
    f = power_function(3, 1, 2)
    assert curvature_violations(f, "strictly_convex", 2) == 0
    with pytest.warns(RuntimeWarning):
        assert curvature_violations(f, "concave", 2) > 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for desc in ("lp:0.5", "lp:1", "poly:1,1", "psi-lp:-1"):
            phi = parse_phi(desc, arity=1, dimension=2)
            assert curvature_violations(phi, phi.phi0_curvature, 2) == 0


def test_separable_matches_sum_powers(nodes2):
    K, L = pair(2, 3)
    sep = separable([power_function(1, 1), power_function(3, 1)])
    direct = sum_powers(1, 3)
    assert radial_metric(orlicz_sum(sep, [K, L]), orlicz_sum(direct, [K, L]), nodes2) <= 1e-14
    with pytest.raises(ConstructionError):
        separable([power_function(1, 1), psi_power_function(-1, 1)])
