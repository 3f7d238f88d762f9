"""Acceptance criteria 1-12, one printed PASS/FAIL line each.

Tolerances are pinned here and checked against the raw numbers each suite
reports, not against the suites' own ``passed`` flags.
"""

import filecmp
import io
import math
from pathlib import Path

import pytest
from scipy.special import gamma

from dualorlicz.cli import bundled_scenario, run_scenario
from dualorlicz.inequalities import TOL
from dualorlicz.suite import run_suite

# 10^7-sample rejection estimate of int_{unit disk} |x_1|^(-1/2) dx, squared (seed 20240611)
MC_ORACLE = 48.823292888095466
MC_ORACLE_SEED = 20240611
# closed form: ((4/3) sqrt(pi) Gamma(1/4) / (2 Gamma(3/4)))^2
CLOSED_FORM = (4 / 1.5 * math.sqrt(math.pi) * gamma(0.25) / (2 * gamma(0.75))) ** 2


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def test_criterion_01_quadrature(report):
    r = run_suite("quadrature")
    ok = r["disk_error"] <= 1e-12 and r["ball3_error"] <= 1e-9 and r["ball4_error"] <= 4 * r["ball4_standard_error"] + 1e-12
    report(1, ok, f"disk {r['disk_error']:.1e}, ball3 {r['ball3_error']:.1e}, ball4 {r['ball4_error']:.1e} (se {r['ball4_standard_error']:.1e})")


def test_criterion_02_lp_reduction(report):
    r = run_suite("lp-reduction", pairs=20)
    worst = max(r["max_gap"].values())
    report(2, set(r["max_gap"]) == {"0.5", "1.0", "2.0", "5.0"} and worst <= 1e-10, f"max node gap {worst:.1e}")


def test_criterion_03_property_suite(report):
    r = run_suite("orlicz-properties", cases=50)
    keys = {"gl2", "gl3", "homogeneity", "monotonicity", "identity", "section"}
    worst = max(r["max_gap"].values())
    report(3, set(r["max_gap"]) == keys and worst <= 1e-10, f"max gap {worst:.1e} over {sorted(keys)}")


def test_criterion_04_associativity(report):
    r = run_suite("associativity")
    ok = r["lp_max_gap"] <= 1e-10 and r["witness_gap"] >= 1e-2
    report(4, ok, f"lp gap {r['lp_max_gap']:.1e}, witness gap {r['witness_gap']:.4f} at radii {r['witness_radii']}")


def test_criterion_05_dual_orlicz_bm(report):
    r = run_suite("dual-orlicz-bm", pairs=100)
    rev = r["reversed"]
    ok = (
        r["min_slack"] >= -TOL
        and r["equality_mismatches"] == 0
        and set(rev) == {"psi-lp:-1.0", "lp:3.0"}
        and all(v["direction"] == "<=" and v["min_slack"] >= -TOL for v in rev.values())
    )
    report(5, ok, f"min slack {r['min_slack']:.1e}, equality mismatches {r['equality_mismatches']}, reversed {rev}")


def test_criterion_06_dual_log_bm(report):
    r = run_suite("dual-log-bm", pairs=100)
    ok = r["min_slack"] >= -TOL and r["equality_mismatches"] == 0 and r["dilatate_max_abs_slack"] <= 1e-9
    report(6, ok, f"min slack {r['min_slack']:.1e}, dilatate |slack| {r['dilatate_max_abs_slack']:.1e}")


def test_criterion_07_first_variation(report):
    r = run_suite("first-variation", pairs=10)
    errs = r["relative_error"]
    ok = {"balls:1.0", "stars:2.0", "stars:0.5"} <= set(errs) and max(errs.values()) < 1e-3
    report(7, ok, f"max relative error {max(errs.values()):.1e}")


def test_criterion_08_dual_orlicz_minkowski(report):
    r = run_suite("dual-orlicz-minkowski", pairs=100)
    expected = {"0.5": "<=", "1.0": "<=", "2.0": "<=", "-1.0": ">=", "3.0": ">="}
    cases = r["cases"]
    ok = r["equality_mismatches"] == 0 and all(
        cases[k]["direction"] == d and cases[k]["min_slack"] >= -TOL for k, d in expected.items()
    )
    worst = min(c["min_slack"] for c in cases.values())
    dirs = {k: v["direction"] for k, v in cases.items()}
    report(8, ok, f"min slack {worst:.1e}, directions {dirs}")


def test_criterion_09_log_minkowski_and_polar(report):
    r = run_suite("dual-log-minkowski", pairs=100)
    ok = (
        r["star_min_slack"] >= -TOL
        and r["polar_min_slack"] >= -TOL
        and r["equality_mismatches"] == 0
        and r["dilatate_max_abs_slack"] <= 1e-9
    )
    report(9, ok, f"star min slack {r['star_min_slack']:.1e}, polar min slack {r['polar_min_slack']:.1e}")


def test_criterion_10_m_addition(report):
    r = run_suite("m-addition")
    g = r["phi_gaps"]
    ok = (
        max(r["lp_curve_gap"], r["lp_curve_balls_gap"]) <= 1e-5
        and g[0] <= 1e-4
        and g[0] > g[1] > g[2]
        and r["counterexample_unit_gap"] >= 1.999
    )
    report(10, ok, f"lp-curve gap {r['lp_curve_gap']:.1e}, phi gaps {[f'{x:.1e}' for x in g]}, unit gap {r['counterexample_unit_gap']:.6f}")


def test_criterion_11_intersection_body(report):
    r = run_suite("intersection-body")
    rel = abs(r["value"] - MC_ORACLE) / MC_ORACLE
    ok = (
        r["oracle_seed"] == MC_ORACLE_SEED
        and r["oracle"] == pytest.approx(MC_ORACLE, rel=1e-12)
        and rel <= 0.01
        and abs(r["value"] - CLOSED_FORM) / CLOSED_FORM <= 0.01
        and r["rotation_spread"] <= 1e-6
    )
    report(11, ok, f"value {r['value']:.6f} vs MC oracle {MC_ORACLE:.6f} (rel {rel:.1e}), spread {r['rotation_spread']:.1e}")


def test_criterion_12_reproducibility(report, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    sink = io.StringIO()
    codes = [run_scenario(bundled_scenario(), out, stream=sink) for out in (a, b)]
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    other = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    same = files == other and all(filecmp.cmp(a / f, b / f, shallow=False) for f in files)
    json_count = sum(Path(f).suffix == ".json" for f in files)
    report(12, codes == [0, 0] and same and json_count > 0, f"{len(files)} artifacts ({json_count} JSON), identical: {same}, exit codes {codes}")
