"""Command-line front end.

Every subcommand parses descriptor strings, calls one library operation and
writes its report.  Exit codes: 0 success, 1 runtime failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .descriptors import parse_body, parse_support, parse_unary
from .exceptions import DualOrliczError
from .geometry import direction, sample_grid, save_grid
from .inequalities import (
    check_dual_log_bm,
    check_dual_log_minkowski,
    check_dual_orlicz_bm,
    check_dual_orlicz_minkowski,
    check_polar_log,
    first_variation_volume,
)
from .integrate import dual_orlicz_mixed_volume, intersection_body_radial, parse_rule, volume, volume_standard_error
from .madd import m_set_from_phi, parse_mset, radial_m_sum
from .orlicz import LogT, log_combination, orlicz_sum, parse_phi
from .suite import SUITES, run_suite

CHECKS = ("dual-orlicz-bm", "dual-log-bm", "dual-orlicz-minkowski", "dual-log-minkowski", "polar-log")


class InputError(Exception):
    """Bad descriptor, argument or scenario: exit code 2."""


def _parse(fn, desc, *args):
    try:
        return fn(desc, *args)
    except (DualOrliczError, ValueError, OSError) as exc:
        raise InputError(f"{desc!r}: {exc}") from None


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _grid_shape(rule) -> list[int]:
    if rule.kind == "trapezoid2d":
        return [rule.resolution]
    if rule.kind == "product3d":
        return [rule.resolution, 2 * rule.resolution]
    raise InputError("grid files need a trapezoid2d or product3d probe rule")


# --- operations (shared by subcommands and scenario tasks) ------------------------


def op_volume(body, rule) -> dict:
    return {
        "value": volume(body, rule),
        "rule": rule.descriptor,
        "diagnostics": {"standard_error": volume_standard_error(body, rule), "body": body.label},
    }


def op_sum(phi_desc, bodies, probe) -> dict:
    n = bodies[0].dimension
    shape = _grid_shape(probe)
    phi = _parse(parse_phi, phi_desc, len(bodies), n)
    if isinstance(phi, LogT):
        if len(bodies) != 2:
            raise InputError("log-t combines exactly two bodies")
        S = log_combination(bodies[0], bodies[1], phi.t)
    else:
        S = orlicz_sum(phi, bodies)
    return sample_grid(S, shape)


def op_mixed_volume(phi_desc, K, L, rule) -> dict:
    phi = _parse(parse_unary, phi_desc, rule.dimension)
    return dual_orlicz_mixed_volume(phi, K, L, rule).to_json()


def op_check(name, rule, body=None, body2=None, phi_desc=None, t=None, support=None, support2=None) -> dict:
    n = rule.dimension
    if name == "dual-orlicz-bm":
        rep = check_dual_orlicz_bm(_parse(parse_phi, phi_desc, 2, n), [body, body2], rule)
    elif name == "dual-log-bm":
        rep = check_dual_log_bm(body, body2, 0.5 if t is None else float(t), rule)
    elif name == "dual-orlicz-minkowski":
        rep = check_dual_orlicz_minkowski(_parse(parse_unary, phi_desc, n), body, body2, rule)
    elif name == "dual-log-minkowski":
        rep = check_dual_log_minkowski(body, body2, rule)
    elif name == "polar-log":
        rep = check_polar_log(support, support2, rule)
    else:
        raise InputError(f"unknown check {name!r}")
    return rep.to_json()


def op_first_variation(phi1_desc, phi2_desc, K, L, rule, eps=None) -> dict:
    n = rule.dimension
    f1 = _parse(parse_phi, phi1_desc, 1, n)
    f2 = _parse(parse_phi, phi2_desc or phi1_desc, 1, n)
    return first_variation_volume(f1, f2, K, L, rule, eps).to_json()


def op_m_add(bodies, probe, mset_desc=None, phi_desc=None, resolution=1024) -> dict:
    if (mset_desc is None) == (phi_desc is None):
        raise InputError("give exactly one of --mset and --phi")
    if mset_desc is not None:
        M = _parse(parse_mset, mset_desc)
    else:
        M = m_set_from_phi(_parse(parse_phi, phi_desc, 2, bodies[0].dimension), int(resolution))
    return sample_grid(radial_m_sum(M, bodies), _grid_shape(probe))


def op_intersection_body(phi_desc, K, rule, directions, eta=1e-3) -> dict:
    try:
        phi = float(phi_desc)
    except ValueError:
        phi = _parse(parse_phi, phi_desc, 1, K.dimension)
        if isinstance(phi, LogT):
            raise InputError("log-t is not a unary function") from None
    out = []
    for u in directions:
        rep = intersection_body_radial(phi, K, direction(u), rule, float(eta))
        out.append({"direction": [float(x) for x in u], **rep.to_json()})
    return {"values": out}


def _grid_summary(record: dict) -> dict:
    v = np.asarray(record["values"])
    return {"min_radial": float(v.min()), "max_radial": float(v.max()), "nodes": int(v.size)}


# --- scenario runner --------------------------------------------------------------


TASK_OPS = ("volume", "sum", "mixed-volume", "check", "first-variation", "m-add", "intersection-body", "suite")


def _load_scenario(path: Path) -> dict:
    try:
        sc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read scenario {path}: {exc}") from None
    if not isinstance(sc, dict) or not isinstance(sc.get("tasks"), list):
        raise InputError("a scenario needs a 'tasks' list")
    for key in ("bodies", "supports", "functions", "rules"):
        if not isinstance(sc.get(key, {}), dict):
            raise InputError(f"'{key}' must map names to descriptors")
    return sc


REF_KEYS = {
    "body": "bodies",
    "body2": "bodies",
    "support": "supports",
    "support2": "supports",
    "phi": "functions",
    "phi2": "functions",
    "rule": "rules",
    "probe": "rules",
}


REQUIRED = {
    "volume": ("body", "rule"),
    "sum": ("phi", "probe"),
    "mixed-volume": ("phi", "body", "body2", "rule"),
    "check": ("name", "rule"),
    "first-variation": ("phi", "body", "body2", "rule"),
    "m-add": ("body", "body2", "probe"),
    "intersection-body": ("phi", "body", "rule"),
    "suite": ("name",),
}


def _validate(sc: dict) -> None:
    for i, task in enumerate(sc["tasks"]):
        if not isinstance(task, dict) or task.get("op") not in TASK_OPS:
            raise InputError(f"task {i}: unknown op {task.get('op') if isinstance(task, dict) else task!r}")
        args = task.get("args", {})
        if not isinstance(args, dict):
            raise InputError(f"task {i}: 'args' must be an object")
        missing = [k for k in REQUIRED[task["op"]] if k not in args]
        if missing:
            raise InputError(f"task {i}: {task['op']} needs {', '.join(missing)}")
        if task["op"] == "sum" and not (args.get("bodies") or ("body" in args and "body2" in args)):
            raise InputError(f"task {i}: sum needs 'bodies' or 'body' and 'body2'")
        for key, table in REF_KEYS.items():
            if key in args and args[key] not in sc.get(table, {}):
                raise InputError(f"task {i}: undeclared {table[:-1] if table != 'bodies' else 'body'} {args[key]!r}")
        for name in args.get("bodies", []):
            if name not in sc.get("bodies", {}):
                raise InputError(f"task {i}: undeclared body {name!r}")
        if task["op"] == "suite" and args.get("name") not in SUITES:
            raise InputError(f"task {i}: unknown suite {args.get('name')!r}")
        if "out" in task and not isinstance(task["out"], str):
            raise InputError(f"task {i}: 'out' must be a path")


def _check_function(desc: str) -> str:
    try:
        float(desc)
        return desc
    except (TypeError, ValueError):
        pass
    errors = []
    for parse in (lambda d: parse_phi(d, 2, 2), lambda d: parse_unary(d, 2)):
        try:
            parse(desc)
            return desc
        except (DualOrliczError, ValueError) as exc:
            errors.append(str(exc))
    raise InputError(f"function {desc!r}: {errors[0]}")


def _resolve(sc: dict):
    for desc in sc.get("functions", {}).values():
        _check_function(desc)
    bodies = {k: _parse(parse_body, v) for k, v in sc.get("bodies", {}).items()}
    supports = {k: _parse(parse_support, v) for k, v in sc.get("supports", {}).items()}
    rules = {k: _parse(parse_rule, v) for k, v in sc.get("rules", {}).items()}
    return bodies, supports, dict(sc.get("functions", {})), rules


def _run_task(task, bodies, supports, functions, rules):
    a = task.get("args", {})
    op = task["op"]
    body = bodies.get(a.get("body"))
    body2 = bodies.get(a.get("body2"))
    rule = rules.get(a.get("rule"))
    if op == "volume":
        return op_volume(body, rule)
    if op == "sum":
        group = [bodies[b] for b in a.get("bodies", [])] or [body, body2]
        return op_sum(functions[a["phi"]], group, rules[a["probe"]])
    if op == "mixed-volume":
        return op_mixed_volume(functions[a["phi"]], body, body2, rule)
    if op == "check":
        return op_check(
            a["name"], rule, body, body2, functions.get(a.get("phi")), a.get("t"), supports.get(a.get("support")), supports.get(a.get("support2"))
        )
    if op == "first-variation":
        return op_first_variation(functions[a["phi"]], functions.get(a.get("phi2")), body, body2, rule, a.get("eps"))
    if op == "m-add":
        return op_m_add([body, body2], rules[a["probe"]], a.get("mset"), functions.get(a.get("phi")), a.get("resolution", 1024))
    if op == "intersection-body":
        return op_intersection_body(functions[a["phi"]], body, rule, a.get("directions", [[1.0] + [0.0] * (body.dimension - 1)]), a.get("eta", 1e-3))
    return run_suite(a["name"], **a.get("params", {}))


def _write_artifact(path: Path, task: dict, result: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".csv":
        flat = {k: v for k, v in result.items() if not isinstance(v, (dict, list))}
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["task"] + sorted(flat))
            w.writerow([task["op"]] + [repr(flat[k]) if isinstance(flat[k], float) else flat[k] for k in sorted(flat)])
    else:
        path.write_text(dumps(result))


def run_scenario(path, outdir=None, stream=sys.stdout) -> int:
    """Run a scenario file; returns the exit code."""
    path = Path(path)
    try:
        sc = _load_scenario(path)
        _validate(sc)
        resolved = _resolve(sc)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    base = Path(outdir) if outdir is not None else path.parent
    summary = {"scenario": sc.get("name", path.stem), "tasks": []}
    code = 0
    for i, task in enumerate(sc["tasks"]):
        entry = {"index": i, "op": task["op"], "out": task.get("out")}
        try:
            result = _run_task(task, *resolved)
        except (DualOrliczError, InputError, ValueError, ArithmeticError) as exc:
            entry.update(status="error", message=str(exc))
            code = 1
        else:
            entry["status"] = "ok"
            if "satisfied" in result:
                entry["satisfied"] = result["satisfied"]
            if "passed" in result:
                entry["passed"] = result["passed"]
            if task.get("out"):
                _write_artifact(base / task["out"], task, result)
        summary["tasks"].append(entry)
    flagged = [t["index"] for t in summary["tasks"] if t.get("satisfied") is False or t.get("passed") is False]
    summary["violations"] = flagged
    out = sc.get("summary", "summary.json")
    (base / out).parent.mkdir(parents=True, exist_ok=True)
    (base / out).write_text(dumps(summary))
    print(dumps(summary), end="", file=stream)
    return code


def bundled_scenario(name: str = "paper_suite") -> Path:
    return Path(str(resources.files("dualorlicz") / "scenarios" / f"{name}.json"))


# --- argument parsing ---------------------------------------------------------------


def _directions(values):
    try:
        return [[float(x) for x in v.split(",")] for v in values]
    except ValueError:
        raise InputError(f"bad direction in {values!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dualorlicz",
        description="Radial Orlicz sums, dual mixed volumes and inequality checks for star bodies.",
        epilog="Bodies: ball:n:r | fourier:base:k:a[:k:a...] | ellipsoid:d1,...,dn | random:n:seed | grid:path. "
        "Functions: lp:p | psi-lp:p | sum-powers:p1,p2 | poly:c1,c2 | log-t:t (plus log and p:<exponent> for mixed volumes). "
        "Rules: n:kind:resolution[:seed] with kind trapezoid2d | product3d | montecarlo.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, rule=True, out=True):
        if rule:
            sp.add_argument("--rule", required=True, help="quadrature rule descriptor")
        if out:
            sp.add_argument("--out", help="output file (.json or .csv); stdout when omitted")

    sp = sub.add_parser("volume", help="volume of a star body")
    sp.add_argument("--body", required=True)
    common(sp)

    sp = sub.add_parser("sum", help="radial Orlicz sum, written as a grid file")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--body", required=True)
    sp.add_argument("--body2", required=True)
    sp.add_argument("--body3", action="append", default=[], help="further summands")
    sp.add_argument("--probe", required=True, help="rule fixing the grid (trapezoid2d or product3d)")
    common(sp, rule=False)

    sp = sub.add_parser("mixed-volume", help="dual Orlicz mixed volume V_phi(K, L)")
    sp.add_argument("--phi", required=True, help="unary function: registry descriptor, log or p:<exponent>")
    sp.add_argument("--body", required=True)
    sp.add_argument("--body2", required=True)
    common(sp)

    sp = sub.add_parser("check", help="inequality check with slack and equality flag")
    sp.add_argument("--name", required=True, choices=CHECKS)
    sp.add_argument("--body")
    sp.add_argument("--body2")
    sp.add_argument("--support", help="support descriptor (polar-log)")
    sp.add_argument("--support2", help="support descriptor (polar-log)")
    sp.add_argument("--phi")
    sp.add_argument("--t", type=float)
    common(sp)

    sp = sub.add_parser("first-variation", help="first variation of volume along an Orlicz linear combination")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--phi2")
    sp.add_argument("--body", required=True)
    sp.add_argument("--body2", required=True)
    sp.add_argument("--eps", type=float, nargs="+")
    common(sp)

    sp = sub.add_parser("m-add", help="radial M-sum, written as a grid file")
    sp.add_argument("--mset", help="mset:file.json or lp-curve:p:resolution")
    sp.add_argument("--phi", help="convex binary function; builds the coefficient set")
    sp.add_argument("--resolution", type=int, default=1024)
    sp.add_argument("--body", required=True)
    sp.add_argument("--body2", required=True)
    sp.add_argument("--probe", default=None, help="grid rule (default: n:trapezoid2d:256 or 3:product3d:32)")
    common(sp, rule=False)

    sp = sub.add_parser("intersection-body", help="radial values of the Orlicz intersection body")
    sp.add_argument("--phi", required=True, help="exponent p in (0, 1) or a unary registry descriptor")
    sp.add_argument("--body", required=True)
    sp.add_argument("--direction", action="append", required=True, help="comma-separated direction, repeatable")
    sp.add_argument("--eta", type=float, default=1e-3)
    common(sp)

    sp = sub.add_parser("run", help="run a scenario file")
    sp.add_argument("scenario", nargs="?", help="scenario JSON (default: the bundled paper-suite scenario)")
    sp.add_argument("--outdir", help="directory for artifacts (default: next to the scenario)")
    return p


def _dispatch(args) -> tuple[dict, str]:
    """Returns (result, kind) with kind 'grid' for body outputs."""
    cmd = args.command
    rule = _parse(parse_rule, args.rule) if getattr(args, "rule", None) else None
    body = _parse(parse_body, args.body) if getattr(args, "body", None) else None
    body2 = _parse(parse_body, args.body2) if getattr(args, "body2", None) else None
    if cmd == "volume":
        return op_volume(body, rule), "report"
    if cmd == "sum":
        extra = [_parse(parse_body, b) for b in args.body3]
        return op_sum(args.phi, [body, body2, *extra], _parse(parse_rule, args.probe)), "grid"
    if cmd == "mixed-volume":
        return op_mixed_volume(args.phi, body, body2, rule), "report"
    if cmd == "check":
        sup = _parse(parse_support, args.support) if args.support else None
        sup2 = _parse(parse_support, args.support2) if args.support2 else None
        if args.name == "polar-log" and (sup is None or sup2 is None):
            raise InputError("polar-log needs --support and --support2")
        if args.name != "polar-log" and (body is None or body2 is None):
            raise InputError(f"{args.name} needs --body and --body2")
        if args.name in ("dual-orlicz-bm", "dual-orlicz-minkowski") and not args.phi:
            raise InputError(f"{args.name} needs --phi")
        return op_check(args.name, rule, body, body2, args.phi, args.t, sup, sup2), "report"
    if cmd == "first-variation":
        return op_first_variation(args.phi, args.phi2, body, body2, rule, args.eps), "report"
    if cmd == "m-add":
        probe_desc = args.probe or ("2:trapezoid2d:256" if body.dimension == 2 else "3:product3d:32")
        return op_m_add([body, body2], _parse(parse_rule, probe_desc), args.mset, args.phi, args.resolution), "grid"
    if cmd == "intersection-body":
        return op_intersection_body(args.phi, body, rule, _directions(args.direction), args.eta), "report"
    raise InputError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_scenario(args.scenario or bundled_scenario(), args.outdir)
    try:
        result, kind = _dispatch(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DualOrliczError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        out = Path(args.out)
        if kind == "grid":
            save_grid(result, out)
        else:
            _write_artifact(out, {"op": args.command}, result)
        shown = _grid_summary(result) if kind == "grid" else result
        print(dumps({"out": str(out), **shown}), end="")
    else:
        print(dumps(_grid_summary(result) if kind == "grid" else result), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
