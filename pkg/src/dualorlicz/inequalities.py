"""Checkers for the dual Brunn-Minkowski and Minkowski inequality family and the first variation of volume.

Each checker returns an :class:`IneqReport` carrying both sides, the
direction, a signed slack (nonnegative when the inequality holds) and an
equality flag.  For Monte Carlo rules the slack tolerance is four batch
standard errors of the slack itself.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .exceptions import DimensionError, DomainError, HypothesisError
from .geometry import ConvexBodySupport, StarBody, polar_star_body
from .integrate import (
    SphericalRule,
    batch_standard_error,
    dual_cone_integral,
    dual_orlicz_mixed_volume,
    volume,
)
from .orlicz import PHI, OrliczFunction, curvature_violations, log_combination, orlicz_linear_combination, orlicz_sum

__all__ = [
    "IneqReport",
    "VariationReport",
    "DilatateResult",
    "TOL",
    "EQ_TOL",
    "check_dual_orlicz_bm",
    "check_dual_log_bm",
    "check_dual_orlicz_minkowski",
    "check_dual_log_minkowski",
    "check_polar_log",
    "first_variation_volume",
    "dilatate_test",
    "summarize",
    "write_sweep",
]

TOL = 1e-9
EQ_TOL = 1e-8
DILATATE_TOL = 1e-8
MC_BATCHES = 16
DEFAULT_EPS = tuple(np.geomspace(1e-2, 1e-6, 14))

LE, GE = "<=", ">="
CONCAVE = ("concave", "strictly_concave")
CONVEX = ("convex", "strictly_convex")


@dataclass(frozen=True)
class IneqReport:
    name: str
    lhs: float
    rhs: float
    direction: str
    slack: float
    satisfied: bool
    equality: bool
    tol: float
    eq_tol: float
    rule: str
    hypothesis_flags: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)

    def csv_row(self, seed=None) -> list:
        return [self.name, "" if seed is None else seed, repr(self.lhs), repr(self.rhs), repr(self.slack), self.satisfied, self.equality]


class DilatateResult(NamedTuple):
    is_dilatate: bool
    ratio: float
    detail: str


def _slack(lhs: float, rhs: float, direction: str) -> float:
    return rhs - lhs if direction == LE else lhs - rhs


def _report(name: str, sides: Callable[[SphericalRule], tuple[float, float]], rule: SphericalRule, direction: str, flags: dict) -> IneqReport:
    lhs, rhs = sides(rule)
    slack = _slack(lhs, rhs, direction)
    tol = TOL
    if rule.stochastic:
        se = batch_standard_error(lambda r: _slack(*sides(r), direction), rule, MC_BATCHES)
        tol = max(TOL, 4.0 * se)
        flags = {**flags, "slack_standard_error": se}
    return IneqReport(
        name=name,
        lhs=float(lhs),
        rhs=float(rhs),
        direction=direction,
        slack=float(slack),
        satisfied=bool(slack >= -tol),
        equality=bool(abs(slack) <= EQ_TOL),
        tol=float(tol),
        eq_tol=EQ_TOL,
        rule=rule.descriptor,
        hypothesis_flags=flags,
    )


def _direction_for(curvature: str | None) -> str:
    if curvature in CONCAVE:
        return GE
    if curvature in CONVEX:
        return LE
    raise HypothesisError(f"phi0 curvature {curvature!r} does not orient the inequality")


def dilatate_test(K: StarBody, L: StarBody, probe) -> DilatateResult:
    """Whether ``rho_L / rho_K`` is constant (relative spread at most 1e-8) on the probe nodes."""
    nodes = getattr(probe, "nodes", probe)
    rk, rl = K.values(nodes), L.values(nodes)
    zero = ~((rk > 0) & (rl > 0))
    if np.any(zero):
        i = int(np.argmax(zero))
        return DilatateResult(False, float("nan"), f"zero radial at probe node {i}")
    ratio = rl / rk
    lo, hi = float(ratio.min()), float(ratio.max())
    spread = hi / lo - 1.0
    return DilatateResult(bool(spread <= DILATATE_TOL), float(np.mean(ratio)), f"ratio spread {spread:.3e}")


def _equality_flags(flags: dict, curvature, K: StarBody, L: StarBody, rule: SphericalRule) -> dict:
    if curvature in ("strictly_concave", "strictly_convex"):
        d = dilatate_test(K, L, rule)
        flags = {**flags, "dilatates": d.is_dilatate}
    return flags


def _finish(rep: IneqReport) -> IneqReport:
    if "dilatates" in rep.hypothesis_flags:
        rep.hypothesis_flags["equality_consistent"] = rep.equality == rep.hypothesis_flags["dilatates"]
    return rep


def _positive_volume(K: StarBody, rule: SphericalRule) -> float:
    v = volume(K, rule)
    if not v > 0:
        raise DomainError(f"{K.label!r} has zero volume on rule {rule.descriptor}")
    return v


def _require_positive_nodes(K: StarBody, rule: SphericalRule):
    r = K.values(rule)
    if not np.all(r > 0):
        i = int(np.argmax(~(r > 0)))
        raise DomainError(f"{K.label!r} has zero radial at node {i}")


def check_dual_orlicz_bm(phi: OrliczFunction, bodies: Sequence[StarBody], rule: SphericalRule) -> IneqReport:
    """``phi((V(K_1)/V(S))^(1/n), ...)`` against 1, with ``S`` the radial Orlicz sum."""
    if len(bodies) != phi.arity:
        raise DimensionError(f"{phi.label} takes {phi.arity} bodies, got {len(bodies)}")
    n = rule.dimension
    curv = phi.phi0_curvature
    if phi.dimension is not None and phi.dimension != n:
        raise HypothesisError(f"{phi.label}: curvature declared for n={phi.dimension}, rule has n={n}")
    direction = _direction_for(curv)
    if phi.kind == PHI:
        if not any(volume(K, rule) > 0 for K in bodies):
            raise DomainError("at least one body needs positive volume")
    else:
        for K in bodies:
            _require_positive_nodes(K, rule)
    S = orlicz_sum(phi, bodies)

    def sides(r):
        vs = volume(S, r)
        x = np.array([(volume(K, r) / vs) ** (1.0 / n) for K in bodies])
        return phi.scalar(*x), 1.0

    flags = {"phi": phi.label, "phi0_curvature": curv}
    if curv in ("strictly_concave", "strictly_convex"):
        dil = all(dilatate_test(bodies[0], K, rule).is_dilatate for K in bodies[1:])
        flags["dilatates"] = dil
    return _finish(_report("dual-orlicz-bm", sides, rule, direction, flags))


def check_dual_log_bm(K: StarBody, L: StarBody, t: float, rule: SphericalRule) -> IneqReport:
    """``V((1-t) K +_0 t L) <= V(K)^(1-t) V(L)^t``."""
    if not 0 < t < 1:
        raise DomainError(f"t must lie in (0, 1), got {t}")
    _require_positive_nodes(K, rule)
    _require_positive_nodes(L, rule)
    C = log_combination(K, L, t)

    def sides(r):
        return volume(C, r), volume(K, r) ** (1 - t) * volume(L, r) ** t

    flags = _equality_flags({"t": t}, "strictly_concave", K, L, rule)
    return _finish(_report("dual-log-bm", sides, rule, LE, flags))


def check_dual_orlicz_minkowski(phi, K: StarBody, L: StarBody, rule: SphericalRule, curvature: str | None = None) -> IneqReport:
    """``V_phi(K, L)`` against ``V(K) phi((V(L)/V(K))^(1/n))``.

    ``phi`` is a unary :class:`OrliczFunction` (its declared curvature is
    used unless ``curvature`` is given) or a plain callable with ``curvature``.
    """
    n = rule.dimension
    if isinstance(phi, OrliczFunction):
        if phi.arity != 1:
            raise DimensionError("the Minkowski inequality takes a unary function")
        if curvature is None:
            if phi.dimension is not None and phi.dimension != n:
                raise HypothesisError(f"{phi.label}: curvature declared for n={phi.dimension}, rule has n={n}")
            curvature = phi.phi0_curvature
        g = phi.unary
        label = phi.label
    else:
        g = phi
        label = getattr(phi, "__name__", "phi")
    # opposite orientation to the Brunn-Minkowski form: concave phi0 bounds from above
    direction = LE if _direction_for(curvature) == GE else GE
    _require_positive_nodes(K, rule)
    _require_positive_nodes(L, rule)

    def sides(r):
        vk, vl = volume(K, r), volume(L, r)
        lhs = dual_orlicz_mixed_volume(phi, K, L, r).value
        return lhs, vk * float(g(np.array((vl / vk) ** (1.0 / n))))

    flags = _equality_flags({"phi": label, "phi0_curvature": curvature}, curvature, K, L, rule)
    return _finish(_report("dual-orlicz-minkowski", sides, rule, direction, flags))


def check_dual_log_minkowski(K: StarBody, L: StarBody, rule: SphericalRule) -> IneqReport:
    """``int log(rho_L/rho_K) dV_K <= (1/n) log(V(L)/V(K))``."""
    n = rule.dimension
    _require_positive_nodes(K, rule)
    _require_positive_nodes(L, rule)

    def sides(r):
        f = np.log(L.values(r) / K.values(r))
        return dual_cone_integral(K, f, r), math.log(volume(L, r) / volume(K, r)) / n

    flags = _equality_flags({}, "strictly_concave", K, L, rule)
    return _finish(_report("dual-log-minkowski", sides, rule, LE, flags))


def check_polar_log(Ksupp: ConvexBodySupport, Lsupp: ConvexBodySupport, rule: SphericalRule) -> IneqReport:
    """``int log(h_L/h_K) dV_{K polar} >= (1/n) log(V(K polar)/V(L polar))``."""
    n = rule.dimension
    Kp, Lp = polar_star_body(Ksupp), polar_star_body(Lsupp)
    hk, hl = Ksupp.values(rule.nodes), Lsupp.values(rule.nodes)
    if not (np.all(hk > 0) and np.all(hl > 0)):
        raise DomainError("support functions must be positive on the rule nodes")

    def sides(r):
        f = np.log(Lsupp.values(r.nodes) / Ksupp.values(r.nodes))
        return dual_cone_integral(Kp, f, r), math.log(volume(Kp, r) / volume(Lp, r)) / n

    flags = _equality_flags({}, "strictly_concave", Kp, Lp, rule)
    return _finish(_report("polar-log", sides, rule, GE, flags))


# --- first variation ------------------------------------------------------------


@dataclass(frozen=True)
class VariationReport:
    numeric_derivative: float
    analytic_value: float
    relative_error: float
    eps_schedule: list
    extrapolated: bool
    raw_slope: float
    richardson_consistent: bool
    derivative_at_1: float
    deriv_estimated: bool
    rule: str

    def to_json(self) -> dict:
        return asdict(self)


def _richardson(e1: float, d1: float, e2: float, d2: float) -> float:
    # d(e) = d* + c e + ...: eliminate the linear term
    return (e2 * d1 - e1 * d2) / (e2 - e1)


def first_variation_volume(
    phi1: OrliczFunction,
    phi2: OrliczFunction,
    K: StarBody,
    L: StarBody,
    rule: SphericalRule,
    eps_list: Sequence[float] | None = None,
) -> VariationReport:
    """Right derivative at 0 of ``V(K +_{phi, eps} L)`` against ``n V_{phi2}(K, L) / phi1'(1)``.

    The one-sided derivative of ``phi1`` at 1 is the left one for the
    increasing class and the right one for the decreasing class; it must be
    nonzero.
    """
    if phi1.arity != 1 or phi2.arity != 1:
        raise DimensionError("first variation takes unary functions")
    if phi1.kind != phi2.kind:
        raise HypothesisError("phi1 and phi2 must belong to the same class")
    if abs(phi1.scalar(1.0) - 1.0) > 1e-12:
        raise HypothesisError(f"{phi1.label} is not normalized: phi1(1) = {phi1.scalar(1.0)}")
    d = phi1.derivative_at_1()
    if d is None or not math.isfinite(d) or d == 0 or (phi1.kind == PHI and d < 0):
        raise HypothesisError(f"{phi1.label}: unusable one-sided derivative at 1 ({d})")
    _require_positive_nodes(K, rule)
    if phi1.kind != PHI:
        _require_positive_nodes(L, rule)
    eps = sorted(float(e) for e in (DEFAULT_EPS if eps_list is None else eps_list))
    if len(eps) < 2 or eps[0] <= 0:
        raise DomainError("eps_list needs at least two positive values")

    n = rule.dimension
    v0 = volume(K, rule)
    slopes = [(volume(orlicz_linear_combination(phi1, phi2, K, e, L), rule) - v0) / e for e in eps]
    raw = slopes[0]
    num = _richardson(eps[0], slopes[0], eps[1], slopes[1])
    if len(eps) >= 3:
        alt = _richardson(eps[1], slopes[1], eps[2], slopes[2])
        consistent = abs(num - alt) <= abs(num - raw) + 1e-6 * abs(num)
    else:
        consistent = True
    analytic = n * dual_orlicz_mixed_volume(phi2, K, L, rule).value / d
    rel = abs(num - analytic) / max(abs(analytic), np.finfo(float).eps)
    return VariationReport(
        numeric_derivative=float(num),
        analytic_value=float(analytic),
        relative_error=float(rel),
        eps_schedule=eps,
        extrapolated=True,
        raw_slope=float(raw),
        richardson_consistent=bool(consistent),
        derivative_at_1=float(d),
        deriv_estimated=bool(phi1.deriv_estimated),
        rule=rule.descriptor,
    )


# --- sweeps ----------------------------------------------------------------------


def summarize(rows: Sequence[tuple[object, IneqReport]]) -> dict:
    reports = [r for _, r in rows]
    return {
        "count": len(reports),
        "min_slack": min((r.slack for r in reports), default=None),
        "violations": sum(not r.satisfied for r in reports),
        "equality_cases": sum(r.equality for r in reports),
    }


def write_sweep(rows: Sequence[tuple[object, IneqReport]], csv_path, json_path=None) -> dict:
    """Write sweep rows ``(seed, report)`` as CSV and the summary as JSON."""
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "seed", "lhs", "rhs", "slack", "satisfied", "equality"])
        for seed, rep in rows:
            w.writerow(rep.csv_row(seed))
    summary = summarize(rows)
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
    return summary


def spot_check_curvature(phi: OrliczFunction) -> int:
    """Midpoint spot check of the declared curvature (warns on violations)."""
    n = phi.dimension or 2
    return curvature_violations(phi, phi.phi0_curvature, n, phi.arity)
