"""Spherical quadrature, volumes, dual cone measures, dual mixed volumes and Orlicz intersection bodies.

Every integral over the sphere is a weighted node sum on a :class:`SphericalRule`.
Three rule families exist, one per dimension regime: the periodic trapezoid
rule on the circle, a Gauss-Legendre (polar cosine) times uniform azimuth
product rule on S^2, and seeded Monte Carlo with equal weights for n >= 4.
Monte Carlo rules can be split into batches to estimate standard errors.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma

from .exceptions import DimensionError, DivergenceError, DomainError
from .geometry import StarBody, as_directions
from .orlicz import PHI, OrliczFunction

__all__ = [
    "SphericalRule",
    "MixedVolumeReport",
    "IntersectionBodyReport",
    "sphere_area",
    "ball_volume",
    "build_rule",
    "parse_rule",
    "volume",
    "volume_standard_error",
    "batch_standard_error",
    "dual_cone_integral",
    "dual_orlicz_mixed_volume",
    "dual_p_mixed_volume",
    "intersection_body_radial",
]

KINDS = ("trapezoid2d", "product3d", "montecarlo")


def sphere_area(n: int) -> float:
    """Surface area of S^{n-1}."""
    return float(2 * math.pi ** (n / 2) / gamma(n / 2))


def ball_volume(n: int) -> float:
    return sphere_area(n) / n


@dataclass(frozen=True)
class SphericalRule:
    dimension: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    kind: str
    resolution: int
    seed: int | None = None

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def descriptor(self) -> str:
        d = f"{self.dimension}:{self.kind}:{self.resolution}"
        return d if self.seed is None else f"{d}:{self.seed}"

    @property
    def stochastic(self) -> bool:
        return self.kind == "montecarlo"

    def integrate(self, values) -> float:
        """Weighted node sum (numpy pairwise summation, fixed order)."""
        return float(np.sum(self.weights * values))

    def transformed(self, Q: np.ndarray) -> "SphericalRule":
        """The same rule with every node mapped by the orthogonal matrix ``Q``."""
        nodes = self.nodes @ np.asarray(Q, dtype=float).T
        return SphericalRule(self.dimension, _ro(nodes), self.weights, self.kind, self.resolution, self.seed)

    def batches(self, count: int) -> list["SphericalRule"]:
        """Split a Monte Carlo rule into ``count`` independent equal-weight rules."""
        if not self.stochastic:
            raise DomainError("only Monte Carlo rules can be split into batches")
        area = sphere_area(self.dimension)
        out = []
        for chunk in np.array_split(np.arange(self.size), count):
            w = np.full(chunk.size, area / chunk.size)
            out.append(SphericalRule(self.dimension, _ro(self.nodes[chunk]), _ro(w), self.kind, chunk.size, self.seed))
        return out


def _ro(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def build_rule(n: int, resolution: int, seed: int | None = None, kind: str | None = None) -> SphericalRule:
    """Quadrature rule on S^{n-1}.

    n = 2: trapezoid on ``resolution`` uniform angles.  n = 3: ``resolution``
    Gauss-Legendre nodes in the polar cosine times ``2 * resolution`` uniform
    azimuths.  n >= 4 (or ``kind="montecarlo"``): ``resolution`` seeded uniform
    directions, each with weight area / resolution.
    """
    if n < 2:
        raise DimensionError(f"rules need n >= 2, got {n}")
    if resolution < 4:
        raise DomainError(f"resolution must be at least 4, got {resolution}")
    kind = kind or {2: "trapezoid2d", 3: "product3d"}.get(n, "montecarlo")
    if kind not in KINDS:
        raise DomainError(f"unknown rule kind {kind!r}")
    if kind == "trapezoid2d":
        if n != 2:
            raise DimensionError("trapezoid2d rules live on S^1")
        th = 2 * np.pi * np.arange(resolution) / resolution
        nodes = np.column_stack([np.cos(th), np.sin(th)])
        w = np.full(resolution, 2 * np.pi / resolution)
        return SphericalRule(2, _ro(nodes), _ro(w), kind, resolution, None)
    if kind == "product3d":
        if n != 3:
            raise DimensionError("product3d rules live on S^2")
        z, wz = np.polynomial.legendre.leggauss(resolution)
        na = 2 * resolution
        ph = 2 * np.pi * np.arange(na) / na
        s = np.sqrt(1 - z**2)
        nodes = np.column_stack(
            [np.outer(s, np.cos(ph)).ravel(), np.outer(s, np.sin(ph)).ravel(), np.repeat(z, na)]
        )
        w = np.repeat(wz, na) * (2 * np.pi / na)
        return SphericalRule(3, _ro(nodes), _ro(w), kind, resolution, None)
    if seed is None:
        raise DomainError("Monte Carlo rules need a seed")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((resolution, n))
    nodes = g / np.linalg.norm(g, axis=1)[:, None]
    w = np.full(resolution, sphere_area(n) / resolution)
    return SphericalRule(n, _ro(nodes), _ro(w), kind, resolution, int(seed))


def parse_rule(desc: str) -> SphericalRule:
    """Rule from a descriptor ``"n:kind:resolution[:seed]"``."""
    parts = desc.split(":")
    if len(parts) not in (3, 4):
        raise DomainError(f"bad rule descriptor {desc!r}")
    try:
        n, res = int(parts[0]), int(parts[2])
        seed = int(parts[3]) if len(parts) == 4 else None
    except ValueError:
        raise DomainError(f"bad rule descriptor {desc!r}") from None
    if parts[1] not in KINDS:
        raise DomainError(f"unknown rule kind in {desc!r}")
    return build_rule(n, res, seed, kind=parts[1])


def _check_dims(rule: SphericalRule, *bodies: StarBody):
    for b in bodies:
        if b.dimension != rule.dimension:
            raise DimensionError(f"body {b.label!r} lives in R^{b.dimension}, rule on S^{rule.dimension - 1}")


def volume(K: StarBody, rule: SphericalRule) -> float:
    """``(1/n) sum_i w_i rho_K(u_i)^n``."""
    _check_dims(rule, K)
    n = rule.dimension
    return rule.integrate(K.values(rule) ** n) / n


def batch_standard_error(statistic: Callable[[SphericalRule], float], rule: SphericalRule, batches: int = 16) -> float:
    """Standard error of a Monte Carlo statistic from batch means (0 for deterministic rules)."""
    if not rule.stochastic:
        return 0.0
    vals = np.array([statistic(r) for r in rule.batches(batches)])
    return float(np.std(vals, ddof=1) / math.sqrt(batches))


def volume_standard_error(K: StarBody, rule: SphericalRule) -> float:
    """Standard error of :func:`volume` (0 for deterministic rules)."""
    if not rule.stochastic:
        return 0.0
    n = rule.dimension
    f = K.values(rule) ** n
    return float(sphere_area(n) / n * np.std(f, ddof=1) / math.sqrt(rule.size))


def dual_cone_integral(K: StarBody, f, rule: SphericalRule) -> float:
    """Integral of ``f`` against the dual cone measure of ``K``.

    ``f`` is either a vectorized oracle on directions or an array of its
    values at the rule nodes.
    """
    _check_dims(rule, K)
    n = rule.dimension
    rho_n = K.values(rule) ** n
    vol = rule.integrate(rho_n) / n
    if not vol > 0:
        raise DomainError(f"{K.label!r} has zero volume on rule {rule.descriptor}")
    fv = np.asarray(f(rule.nodes) if callable(f) else f, dtype=float)
    return rule.integrate(fv * rho_n) / (n * vol)


@dataclass(frozen=True)
class MixedVolumeReport:
    value: float
    rule: str
    ratio_min: float
    ratio_max: float

    def to_json(self) -> dict:
        return {"value": self.value, "rule": self.rule, "diagnostics": {"ratio_min": self.ratio_min, "ratio_max": self.ratio_max}}


def _require_positive(values: np.ndarray, rule: SphericalRule, what: str):
    bad = ~(values > 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(f"{what} is {values[i]} at node {i} (direction {rule.nodes[i].tolist()})")


def dual_orlicz_mixed_volume(phi, K: StarBody, L: StarBody, rule: SphericalRule) -> MixedVolumeReport:
    """``(1/n) sum_i w_i phi(rho_L/rho_K) rho_K^n``.

    ``phi`` is a unary :class:`OrliczFunction` or any real vectorized callable
    on (0, inf), e.g. ``np.log``.  Ratios equal to 0 are allowed only for the
    increasing class.
    """
    _check_dims(rule, K, L)
    n = rule.dimension
    rk = K.values(rule)
    rl = L.values(rule)
    _require_positive(rk, rule, f"radial of {K.label!r}")
    if isinstance(phi, OrliczFunction):
        if phi.arity != 1:
            raise DimensionError("dual mixed volumes take a unary function")
        if phi.kind != PHI:
            _require_positive(rl, rule, f"radial of {L.label!r}")
        g = phi.unary
    else:
        _require_positive(rl, rule, f"radial of {L.label!r}")
        g = phi
    ratio = rl / rk
    vals = np.asarray(g(ratio), dtype=float)
    if not np.all(np.isfinite(vals)):
        i = int(np.argmax(~np.isfinite(vals)))
        raise DomainError(f"phi is not finite at ratio {ratio[i]} (node {i})")
    value = rule.integrate(vals * rk**n) / n
    return MixedVolumeReport(value, rule.descriptor, float(ratio.min()), float(ratio.max()))


def dual_p_mixed_volume(K: StarBody, L: StarBody, p: float, rule: SphericalRule) -> float:
    """``(1/n) sum_i w_i rho_K^(n-p) rho_L^p``."""
    _check_dims(rule, K, L)
    n = rule.dimension
    rk = K.values(rule)
    rl = L.values(rule)
    if p > n:
        _require_positive(rk, rule, f"radial of {K.label!r}")
    if p < 0:
        _require_positive(rl, rule, f"radial of {L.label!r}")
    return rule.integrate(rk ** (n - p) * rl**p) / n


# --- Orlicz intersection bodies ------------------------------------------------


@dataclass(frozen=True)
class IntersectionBodyReport:
    value: float
    mode: str  # "power" or "guarded"
    rule: str
    eta: float
    excluded_weight: float
    excluded_volume: float
    guarded: bool

    def to_json(self) -> dict:
        d = asdict(self)
        return {"value": d.pop("value"), "rule": d.pop("rule"), "diagnostics": d}


def _frame(rule: SphericalRule, u: np.ndarray) -> np.ndarray:
    """Householder map sending the rule's reference axis to ``u``."""
    n = rule.dimension
    ref = np.zeros(n)
    ref[2 if rule.kind == "product3d" else 0] = 1.0
    v = ref - u
    nv = v @ v
    if nv < 1e-30:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(v, v) / nv


GL32 = np.polynomial.legendre.leggauss(32)


def intersection_body_radial(phi, K: StarBody, u, rule: SphericalRule, eta: float = 1e-3) -> IntersectionBodyReport:
    """Radial value at ``u`` of the Orlicz intersection body of ``K``.

    The smallest ``lambda`` with ``int_K phi(1 / (lambda |u.x|)) dx <= 1``,
    in polar coordinates.  The rule is used in a frame whose reference axis is
    ``u`` so the discretization commutes with rotations.  Directions with
    ``|u.v| < eta`` are dropped and their surface weight and cone volume are
    reported.

    ``phi`` is a power ``p`` in (0, 1) (a float, or a unary function with
    ``power`` set), giving the closed-form radial integral; any other unary
    increasing function uses 32-point Gauss-Legendre in the radius and
    bisection in ``lambda`` and is flagged as guarded.
    """
    _check_dims(rule, K)
    n = rule.dimension
    u = as_directions(u, n)[0]
    u = u / np.linalg.norm(u)
    local = rule.transformed(_frame(rule, u))
    rho = K.values(local)
    c = np.abs(local.nodes @ u)
    keep = c >= eta
    w = local.weights
    excluded_weight = float(np.sum(w[~keep]))
    excluded_volume = float(np.sum(w[~keep] * rho[~keep] ** n) / n)

    if isinstance(phi, OrliczFunction):
        if phi.arity != 1 or phi.kind != PHI:
            raise DomainError("intersection bodies take a unary increasing function")
        p = phi.power
    else:
        p = float(phi)
        phi = None
    if p is not None:
        if p >= 1:
            raise DivergenceError(f"|u.x|^-{p} is not integrable near the hyperplane u^perp")
        if p <= 0:
            raise DomainError(f"power mode needs 0 < p < 1, got {p}")
        integral = float(np.sum(w[keep] * c[keep] ** (-p) * rho[keep] ** (n - p)) / (n - p))
        value = integral ** (1.0 / p)
        return IntersectionBodyReport(value, "power", rule.descriptor, eta, excluded_weight, excluded_volume, False)

    x, gw = GL32
    wk, ck, rk = w[keep], c[keep], rho[keep]
    r = 0.5 * rk[:, None] * (x[None, :] + 1.0)  # (Nv, 32)
    jac = 0.5 * rk[:, None] * gw[None, :] * r ** (n - 1)

    def G(lam: float) -> float:
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            vals = phi.unary(1.0 / (lam * r * ck[:, None]))
            vals = np.where(r > 0, vals, 0.0)
        return float(np.sum(wk * np.sum(vals * jac, axis=1)))

    if G(1.0) == 0.0 and not np.any(rk > 0):
        return IntersectionBodyReport(0.0, "guarded", rule.descriptor, eta, excluded_weight, excluded_volume, True)
    lo = hi = 1.0
    for _ in range(200):
        g = G(hi)
        if not math.isfinite(g):
            raise DivergenceError(f"orlicz intersection integral diverges at lambda={hi} (eta={eta})")
        if g <= 1.0:
            break
        hi *= 2
    else:
        raise DivergenceError("no lambda with integral <= 1 within 200 doublings")
    lo = hi
    for _ in range(200):
        g = G(lo)
        if not math.isfinite(g) or g > 1.0:
            break
        lo /= 2
    else:
        raise DivergenceError("integral stays below 1 as lambda -> 0; phi grows too slowly")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        g = G(mid)
        if math.isfinite(g) and g <= 1.0:
            hi = mid
        else:
            lo = mid
    return IntersectionBodyReport(hi, "guarded", rule.descriptor, eta, excluded_weight, excluded_volume, True)


def report_json(report) -> str:
    """Stable JSON serialization of a report."""
    payload = report.to_json() if hasattr(report, "to_json") else report
    return json.dumps(payload, sort_keys=True)
