"""Seeded verification sweeps.

Each function runs one family of checks at fixed sizes and returns a
JSON-ready dict of measured quantities plus a ``passed`` flag computed with
the tolerances listed next to it.  The CLI exposes them as the ``suite``
scenario task; the test suite re-asserts the same quantities independently.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import (
    ball_support,
    ellipsoid,
    ellipsoid_support,
    linear_image,
    make_ball,
    pth_radial_combination,
    random_star,
    restrict_to_coordinate_subspace,
    scale,
)
from .inequalities import (
    TOL,
    check_dual_log_bm,
    check_dual_log_minkowski,
    check_dual_orlicz_bm,
    check_dual_orlicz_minkowski,
    check_polar_log,
    dilatate_test,
    first_variation_volume,
)
from .integrate import build_rule, intersection_body_radial, volume, volume_standard_error
from .madd import check_sublinearity_counterexample, lp_curve_mset, m_set_from_phi, radial_m_sum
from .orlicz import (
    check_associativity,
    find_associativity_witness,
    orlicz_sum,
    parse_phi,
    poly_function,
    power_function,
    psi_power_function,
)

__all__ = ["SUITES", "run_suite", "random_pair", "random_linear_map", "mc_abs_power_integral"]


def random_pair(n: int, seed: int):
    rng = np.random.default_rng(seed)
    return random_star(n, rng), random_star(n, rng)


def random_linear_map(n: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded well-conditioned matrix: random orthogonal times diagonal in [0.5, 2], random sign."""
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return q @ np.diag(rng.uniform(0.5, 2.0, size=n) * rng.choice([-1.0, 1.0], size=n))


def _gap(A, B, nodes) -> float:
    return float(np.max(np.abs(A.values(nodes) - B.values(nodes))))


def quadrature_sanity() -> dict:
    e2 = abs(volume(make_ball(2), build_rule(2, 256)) - math.pi)
    e3 = abs(volume(make_ball(3), build_rule(3, 64)) - 4 * math.pi / 3)
    r4 = build_rule(4, 100000, seed=7)
    B4 = make_ball(4)
    e4 = abs(volume(B4, r4) - math.pi**2 / 2)
    se4 = volume_standard_error(B4, r4)
    # a constant integrand has zero standard error; allow summation rounding
    passed = e2 <= 1e-12 and e3 <= 1e-9 and e4 <= 4 * se4 + 1e-12
    return {"disk_error": e2, "ball3_error": e3, "ball4_error": e4, "ball4_standard_error": se4, "passed": passed}


def lp_reduction(pairs: int = 20) -> dict:
    nodes = build_rule(2, 256).nodes
    gaps = {}
    for p in (0.5, 1.0, 2.0, 5.0):
        phi = power_function(p, 2, 2)
        worst = 0.0
        for seed in range(pairs):
            K, L = random_pair(2, seed)
            worst = max(worst, _gap(orlicz_sum(phi, [K, L]), pth_radial_combination(1, K, p, 1, L), nodes))
        gaps[repr(p)] = worst
    return {"max_gap": gaps, "passed": max(gaps.values()) <= 1e-10}


PROPERTY_FUNCTIONS = ("lp:2", "lp:0.5", "poly:1,1", "sum-powers:1,3", "psi-lp:-1")


def property_suite(cases: int = 50) -> dict:
    """Covariance, homogeneity, monotonicity, identity and section checks of the Orlicz sum."""
    worst = {"gl2": 0.0, "gl3": 0.0, "homogeneity": 0.0, "monotonicity": 0.0, "identity": 0.0, "section": 0.0}
    nodes2 = build_rule(2, 128).nodes
    nodes3 = build_rule(3, 12).nodes
    for seed in range(cases):
        rng = np.random.default_rng(1000 + seed)
        desc = PROPERTY_FUNCTIONS[seed % len(PROPERTY_FUNCTIONS)]
        for n, nodes in ((2, nodes2), (3, nodes3)):
            phi = parse_phi(desc, 2, n)
            K, L = random_star(n, rng), random_star(n, rng)
            S = orlicz_sum(phi, [K, L])
            A = random_linear_map(n, rng)
            g = _gap(linear_image(S, A), orlicz_sum(phi, [linear_image(K, A), linear_image(L, A)]), nodes)
            key = f"gl{n}"
            worst[key] = max(worst[key], g / max(1.0, S.upper))
            r = float(rng.uniform(0.2, 5.0))
            g = _gap(orlicz_sum(phi, [scale(K, r), scale(L, r)]), scale(S, r), nodes)
            worst["homogeneity"] = max(worst["homogeneity"], g / max(1.0, r * S.upper))
            bigger = orlicz_sum(phi, [scale(K, 1.0 + rng.uniform(0, 0.5)), L])
            drop = float(np.max(S.values(nodes) - bigger.values(nodes)))
            worst["monotonicity"] = max(worst["monotonicity"], drop)
            if phi.kind == "Phi" and phi.normalized:
                worst["identity"] = max(worst["identity"], _gap(orlicz_sum(phi, [K, make_ball(n, 0.0)]), K, nodes))
            if n == 3:
                axes = (0, 2)
                sec = orlicz_sum(phi, [restrict_to_coordinate_subspace(K, axes), restrict_to_coordinate_subspace(L, axes)])
                worst["section"] = max(worst["section"], _gap(restrict_to_coordinate_subspace(S, axes), sec, nodes2))
    return {"max_gap": worst, "passed": max(worst.values()) <= 1e-10}


def associativity(pairs: int = 10) -> dict:
    nodes = build_rule(2, 128).nodes
    worst = 0.0
    for p in (0.5, 1.0, 2.0, 3.0):
        phi = power_function(p, 2, 2)
        for seed in range(pairs):
            rng = np.random.default_rng(2000 + seed)
            K, L, M = (random_star(2, rng) for _ in range(3))
            worst = max(worst, check_associativity(phi, K, L, M, nodes).max_gap)
    witness = find_associativity_witness(poly_function(1, 1, 2, 2), n=2, seed=0)
    return {
        "lp_max_gap": worst,
        "witness_gap": witness.max_gap,
        "witness_radii": list(witness.radii),
        "passed": worst <= 1e-10 and witness.max_gap >= 1e-2,
    }


CONCAVE_BM = ("lp:0.5", "lp:1", "lp:1.5", "poly:1,1")
CONVEX_BM = ("lp:3", "lp:5", "psi-lp:-1")


def dual_bm_sweep(pairs: int = 100) -> dict:
    rule = build_rule(2, 256)
    min_slack = math.inf
    mismatches = 0
    for desc in CONCAVE_BM + CONVEX_BM:
        phi = parse_phi(desc, 2, 2)
        for seed in range(pairs):
            K, L = random_pair(2, seed)
            rep = check_dual_orlicz_bm(phi, [K, L], rule)
            min_slack = min(min_slack, rep.slack)
            mismatches += rep.equality != dilatate_test(K, L, rule).is_dilatate
        for c in (0.5, 2.0, 3.0):
            K, _ = random_pair(2, 500 + int(c * 10))
            rep = check_dual_orlicz_bm(phi, [K, scale(K, c)], rule)
            mismatches += not rep.equality
            min_slack = min(min_slack, rep.slack)
    linear = max(abs(check_dual_orlicz_bm(power_function(2, 2, 2), list(random_pair(2, s)), rule).slack) for s in range(pairs))
    reversal = {}
    for phi in (psi_power_function(-1, 2, 2), power_function(3, 2, 2)):
        reps = [check_dual_orlicz_bm(phi, list(random_pair(2, s)), rule) for s in range(pairs)]
        reversal[phi.label] = {"direction": reps[0].direction, "min_slack": min(r.slack for r in reps)}
    passed = min_slack >= -TOL and mismatches == 0 and linear <= 1e-9 and all(
        v["direction"] == "<=" and v["min_slack"] >= -TOL for v in reversal.values()
    )
    return {"min_slack": min_slack, "equality_mismatches": mismatches, "linear_case_max_slack": linear, "reversed": reversal, "passed": passed}


def log_bm_sweep(pairs: int = 100) -> dict:
    rule = build_rule(2, 256)
    min_slack = math.inf
    mismatches = 0
    for seed in range(pairs):
        K, L = random_pair(2, seed)
        t = float(np.random.default_rng(seed).uniform(0.1, 0.9))
        rep = check_dual_log_bm(K, L, t, rule)
        min_slack = min(min_slack, rep.slack)
        mismatches += rep.equality != dilatate_test(K, L, rule).is_dilatate
    dil_slack = 0.0
    for seed in range(10):
        K, _ = random_pair(2, seed)
        rep = check_dual_log_bm(K, scale(K, 0.5 + seed / 4), 0.3 + seed / 20, rule)
        dil_slack = max(dil_slack, abs(rep.slack))
        mismatches += not rep.equality
    passed = min_slack >= -TOL and mismatches == 0 and dil_slack <= 1e-9
    return {"min_slack": min_slack, "dilatate_max_abs_slack": dil_slack, "equality_mismatches": mismatches, "passed": passed}


def first_variation_suite(pairs: int = 10) -> dict:
    rule = build_rule(2, 256)
    errs = {}
    # balls a, b: V(eps) = pi (a^p + eps b^p)^(2/p), slope (2/p) pi a^(2-p) b^p
    a, b = 1.3, 0.7
    for p in (1.0, 2.0, 0.5):
        f = power_function(p, 1, 2)
        rep = first_variation_volume(f, f, make_ball(2, a), make_ball(2, b), rule)
        exact = 2 / p * math.pi * a ** (2 - p) * b**p
        errs[f"balls:{p!r}"] = max(abs(rep.numeric_derivative - exact), abs(rep.analytic_value - exact)) / exact
    for p in (2.0, 0.5):
        f = power_function(p, 1, 2)
        worst = 0.0
        for seed in range(pairs):
            K, L = random_pair(2, 3000 + seed)
            worst = max(worst, first_variation_volume(f, f, K, L, rule).relative_error)
        errs[f"stars:{p!r}"] = worst
    return {"relative_error": errs, "passed": max(errs.values()) < 1e-3}


def minkowski_sweep(pairs: int = 100) -> dict:
    rule = build_rule(2, 256)
    out = {}
    mismatches = 0
    for p in (0.5, 1.0, 2.0, -1.0, 3.0):
        phi = power_function(p, 1, 2) if p > 0 else psi_power_function(p, 1, 2)
        slacks = []
        for seed in range(pairs):
            K, L = random_pair(2, seed)
            rep = check_dual_orlicz_minkowski(phi, K, L, rule)
            slacks.append(rep.slack)
            if phi.phi0_curvature.startswith("strictly"):
                mismatches += rep.equality != dilatate_test(K, L, rule).is_dilatate
            if seed < 5:
                mismatches += not check_dual_orlicz_minkowski(phi, K, scale(K, 1.7), rule).equality
        out[repr(p)] = {"direction": rep.direction, "min_slack": min(slacks)}
    expected = {"0.5": "<=", "1.0": "<=", "2.0": "<=", "-1.0": ">=", "3.0": ">="}
    passed = mismatches == 0 and all(out[k]["direction"] == d and out[k]["min_slack"] >= -TOL for k, d in expected.items())
    return {"cases": out, "equality_mismatches": mismatches, "passed": passed}


def random_spd(n: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return q @ np.diag(rng.uniform(0.5, 2.0, size=n)) @ q.T


def log_minkowski_sweep(pairs: int = 100) -> dict:
    rule = build_rule(2, 256)
    star_min, polar_min = math.inf, math.inf
    mismatches = 0
    for seed in range(pairs):
        K, L = random_pair(2, seed)
        rep = check_dual_log_minkowski(K, L, rule)
        star_min = min(star_min, rep.slack)
        mismatches += rep.equality != dilatate_test(K, L, rule).is_dilatate
        rng = np.random.default_rng(4000 + seed)
        Ks, Ls = ellipsoid_support(random_spd(2, rng)), ellipsoid_support(random_spd(2, rng))
        rep = check_polar_log(Ks, Ls, rule)
        polar_min = min(polar_min, rep.slack)
        mismatches += rep.equality != rep.hypothesis_flags["dilatates"]
    dil = 0.0
    for c in (0.5, 2.0, 3.0):
        K, _ = random_pair(2, 7)
        r1 = check_dual_log_minkowski(K, scale(K, c), rule)
        r2 = check_polar_log(ball_support(2, 1.0), ball_support(2, c), rule)
        A = random_spd(2, np.random.default_rng(int(c * 10)))
        r3 = check_polar_log(ellipsoid_support(A), ellipsoid_support(c * A), rule)
        dil = max(dil, abs(r1.slack), abs(r2.slack), abs(r3.slack))
        mismatches += not (r1.equality and r2.equality and r3.equality)
    passed = star_min >= -TOL and polar_min >= -TOL and mismatches == 0 and dil <= 1e-9
    return {"star_min_slack": star_min, "polar_min_slack": polar_min, "dilatate_max_abs_slack": dil, "equality_mismatches": mismatches, "passed": passed}


def m_addition(pairs: int = 5) -> dict:
    nodes = build_rule(2, 256).nodes
    pairs_ = [random_pair(2, s) for s in range(pairs)]
    M = lp_curve_mset(2.0, 1024)
    lp_gap = max(_gap(radial_m_sum(M, [K, L]), pth_radial_combination(1, K, 2.0, 1, L), nodes) for K, L in pairs_)
    balls = abs(float(radial_m_sum(M, [make_ball(2, 3), make_ball(2, 4)]).values(nodes).max()) - 5.0)
    phi = power_function(3.0, 2, 2)
    sums = [orlicz_sum(phi, [K, L]) for K, L in pairs_]
    gaps = []
    for res in (1024, 2048, 4096):
        Ms = m_set_from_phi(phi, res)
        gaps.append(max(_gap(radial_m_sum(Ms, [K, L]), S, nodes) for (K, L), S in zip(pairs_, sums)))
    sub = check_sublinearity_counterexample(parse_phi("lp:0.5"))
    passed = (
        max(lp_gap, balls) <= 1e-5
        and gaps[0] <= 1e-4
        and all(x > y for x, y in zip(gaps, gaps[1:]))
        and sub.witness is not None
        and sub.unit_gap >= 1.999
    )
    return {"lp_curve_gap": lp_gap, "lp_curve_balls_gap": balls, "phi_gaps": gaps, "counterexample_unit_gap": sub.unit_gap, "passed": passed}


MC_SEED = 20240611
MC_SAMPLES = 10_000_000


def mc_abs_power_integral(p: float, samples: int = MC_SAMPLES, seed: int = MC_SEED, chunk: int = 1_000_000) -> tuple[float, float]:
    """Rejection-sampling estimate of ``int_{unit disk} |x_1|^(-p) dx`` and its standard error."""
    rng = np.random.default_rng(seed)
    total = total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        x = rng.uniform(-1.0, 1.0, size=(m, 2))
        inside = np.einsum("ij,ij->i", x, x) <= 1.0
        f = np.where(inside, np.abs(x[:, 0]) ** -p, 0.0) * 4.0
        total += float(f.sum())
        total_sq += float((f * f).sum())
        done += m
    mean = total / samples
    se = math.sqrt(max(total_sq / samples - mean * mean, 0.0) / samples)
    return mean, se


def intersection_body_check(resolution: int = 2**20, eta: float = 1e-6, samples: int = MC_SAMPLES) -> dict:
    p = 0.5
    rule = build_rule(2, resolution)
    D = make_ball(2)
    ref = intersection_body_radial(p, D, np.array([1.0, 0.0]), rule, eta)
    mc, se = mc_abs_power_integral(p, samples)
    oracle = mc ** (1 / p)
    rel = abs(ref.value - oracle) / oracle
    rng = np.random.default_rng(5)
    vals = [ref.value]
    for _ in range(7):
        u = rng.normal(size=2)
        vals.append(intersection_body_radial(p, D, u / np.linalg.norm(u), rule, eta).value)
    spread = (max(vals) - min(vals)) / min(vals)
    E = ellipsoid([2.0, 1.0])
    vals_e = [intersection_body_radial(p, E, u, build_rule(2, 4096)).value for u in ([1.0, 0.0], [0.0, 1.0])]
    return {
        "value": ref.value,
        "oracle": oracle,
        "oracle_standard_error": 2 * mc * se,
        "oracle_seed": MC_SEED,
        "oracle_samples": samples,
        "relative_error": rel,
        "rotation_spread": spread,
        "excluded_weight": ref.excluded_weight,
        "ellipse_values": vals_e,
        "passed": rel <= 0.01 and spread <= 1e-6,
    }


SUITES = {
    "quadrature": quadrature_sanity,
    "lp-reduction": lp_reduction,
    "orlicz-properties": property_suite,
    "associativity": associativity,
    "dual-orlicz-bm": dual_bm_sweep,
    "dual-log-bm": log_bm_sweep,
    "first-variation": first_variation_suite,
    "dual-orlicz-minkowski": minkowski_sweep,
    "dual-log-minkowski": log_minkowski_sweep,
    "m-addition": m_addition,
    "intersection-body": intersection_body_check,
}


def run_suite(name: str, **kwargs) -> dict:
    return {"suite": name, **SUITES[name](**kwargs)}
