"""Radial M-addition of star bodies.

A finite coefficient set ``M`` acts on radial functions through the support
function of its convex hull: the radial of the M-sum at ``u`` is
``max_{x in M} x . (rho_1(u), ..., rho_m(u))``.  For convex binary Orlicz
functions the coefficient set is the polar of the body bounded by the level
curve ``{phi = 1}``; :func:`m_set_from_phi` samples it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import ConstructionError, DimensionError, DomainError
from .geometry import StarBody
from .orlicz import OrliczFunction, solve_level

__all__ = [
    "MSet",
    "SublinearityReport",
    "support_conv",
    "radial_m_sum",
    "lp_curve_mset",
    "m_set_from_phi",
    "check_sublinearity_counterexample",
    "load_mset",
    "save_mset",
    "parse_mset",
]

GOLDEN_TOL = 1e-10
INV_GOLD = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class MSet:
    arity: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0 or pts.shape[1] != self.arity:
            raise ConstructionError(f"need a nonempty list of {self.arity}-vectors")
        if np.any(pts < 0) or not np.all(np.isfinite(pts)):
            raise ConstructionError("coefficient vectors must be finite and nonnegative")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def to_json(self) -> dict:
        return {"arity": self.arity, "points": self.points.tolist()}


def support_conv(M: MSet, z) -> np.ndarray | float:
    """``h_{conv M}(z)``: the largest dot product of ``z`` with a point of ``M``.

    ``z`` has shape ``(m,)`` or ``(..., m)``.
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != M.arity:
        raise DimensionError(f"M has arity {M.arity}, z has length {z.shape[-1]}")
    out = np.max(z @ M.points.T, axis=-1)
    return float(out) if out.ndim == 0 else out


def radial_m_sum(M: MSet, bodies: Sequence[StarBody]) -> StarBody:
    """Radial M-sum of ``bodies``."""
    if len(bodies) != M.arity:
        raise DimensionError(f"M has arity {M.arity}, got {len(bodies)} bodies")
    n = bodies[0].dimension
    if any(b.dimension != n for b in bodies):
        raise DimensionError("bodies live in different dimensions")
    rads = [b.radial for b in bodies]

    def radial(u):
        return support_conv(M, np.stack([r(u) for r in rads], axis=-1))

    lower = support_conv(M, [b.lower for b in bodies])
    return StarBody(
        n,
        radial,
        positive=lower > 0,
        continuous=all(b.continuous for b in bodies),
        label=f"M-sum({', '.join(b.label for b in bodies)})",
        upper=support_conv(M, [b.upper for b in bodies]),
        lower=lower,
    )


def lp_curve_mset(p: float, resolution: int) -> MSet:
    """Points ``((1-t)^(1/q), t^(1/q))`` at ``resolution + 1`` uniform ``t`` in [0, 1], ``1/p + 1/q = 1``.

    Its radial M-sum is p-th radial addition.
    """
    if not p >= 1:
        raise DomainError(f"the lp curve needs p >= 1, got {p}")
    if resolution < 1:
        raise DomainError("resolution must be positive")
    if p == 1:
        return MSet(2, [[1.0, 1.0]])
    e = 1.0 - 1.0 / p  # 1/q
    t = np.arange(resolution + 1) / resolution
    return MSet(2, np.column_stack([(1 - t) ** e, t**e]))


def _level_point(phi: OrliczFunction, gamma: np.ndarray) -> np.ndarray:
    """Point of the level curve ``{phi = 1}`` on the ray at angle ``gamma``."""
    e = np.column_stack([np.cos(gamma), np.sin(gamma)])
    e[np.abs(e) < 1e-300] = 0.0
    lam = solve_level(phi, e)
    return e / lam[:, None]


def m_set_from_phi(phi: OrliczFunction, resolution: int) -> MSet:
    """Coefficient set realizing the radial Orlicz sum of a convex binary ``phi``.

    For ``resolution + 1`` uniform directions ``d`` in the closed positive
    quadrant, maximize ``x . d`` over the level curve (golden-section search in
    the polar angle of ``x``) and emit ``d / h(d)``.
    """
    if phi.arity != 2:
        raise DimensionError("point clouds are built for binary functions; use the Orlicz solver directly for m > 2")
    if not phi.convex:
        raise DomainError(f"{phi.label} is not flagged convex; see check_sublinearity_counterexample")
    if resolution < 2:
        raise DomainError("resolution must be at least 2")
    alpha = 0.5 * np.pi * np.arange(resolution + 1) / resolution
    d = np.column_stack([np.cos(alpha), np.sin(alpha)])
    d[np.abs(d) < 1e-15] = 0.0
    d[-1] = (0.0, 1.0)

    def score(g):
        return np.sum(_level_point(phi, g) * d, axis=1)

    a = np.zeros(alpha.size)
    b = np.full(alpha.size, 0.5 * np.pi)
    c = b - INV_GOLD * (b - a)
    e = a + INV_GOLD * (b - a)
    fc, fe = score(c), score(e)
    while np.max(b - a) > GOLDEN_TOL:
        left = fc > fe  # the maximum lies in [a, e]; otherwise in [c, b]
        a = np.where(left, a, c)
        b = np.where(left, e, b)
        probe = np.where(left, b - INV_GOLD * (b - a), a + INV_GOLD * (b - a))
        fp = score(probe)
        c, e, fc, fe = (
            np.where(left, probe, e),
            np.where(left, c, probe),
            np.where(left, fp, fe),
            np.where(left, fc, fp),
        )
    cands = np.stack([score(0.5 * (a + b)), score(np.zeros_like(a)), score(np.full_like(a, 0.5 * np.pi))])
    h = cands.max(axis=0)
    return MSet(2, d / h[:, None])


@dataclass(frozen=True)
class SublinearityReport:
    witness: tuple | None
    gap: float
    unit_gap: float

    def to_json(self) -> dict:
        w = None if self.witness is None else [list(map(float, z)) for z in self.witness]
        return {"witness": w, "gap": self.gap, "unit_gap": self.unit_gap}


def check_sublinearity_counterexample(phi: OrliczFunction, grid: int = 33, threshold: float = 1e-9) -> SublinearityReport:
    """Search for ``z1, z2 >= 0`` with ``g(z1 + z2) > g(z1) + g(z2) + threshold``.

    ``g(z)`` solves ``phi(z / g) = 1``.  Pairs range over ``grid`` directions
    in the closed positive quadrant (axes included) at scales 1/4 to 4.
    ``unit_gap`` is the gap at ``((1, 0), (0, 1))``.
    """
    if phi.arity != 2:
        raise DimensionError("the sublinearity check is for binary functions")
    ang = 0.5 * np.pi * np.arange(grid) / (grid - 1)
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    dirs[np.abs(dirs) < 1e-15] = 0.0
    dirs[-1] = (0.0, 1.0)
    scales = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
    z2 = (scales[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
    i, j = np.meshgrid(np.arange(grid), np.arange(z2.shape[0]), indexing="ij")
    a, b = dirs[i.ravel()], z2[j.ravel()]
    g = lambda z: np.asarray(solve_level(phi, z), dtype=float)  # noqa: E731
    gaps = g(a + b) - g(a) - g(b)
    k = int(np.argmax(gaps))
    unit = float(g(np.array([1.0, 1.0])) - g(np.array([1.0, 0.0])) - g(np.array([0.0, 1.0])))
    gap = float(gaps[k])
    if max(gap, unit) <= threshold:
        return SublinearityReport(None, gap, unit)
    if unit > threshold:
        return SublinearityReport(((1.0, 0.0), (0.0, 1.0)), unit, unit)
    return SublinearityReport((tuple(map(float, a[k])), tuple(map(float, b[k]))), gap, unit)


def save_mset(M: MSet, path) -> None:
    with open(path, "w") as fh:
        json.dump(M.to_json(), fh)


def load_mset(path) -> MSet:
    with open(path) as fh:
        rec = json.load(fh)
    try:
        return MSet(int(rec["arity"]), rec["points"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"bad MSet file {path}: {exc}") from None


def parse_mset(desc: str) -> MSet:
    """``"mset:file.json"``, ``"mset:lp-curve:p:resolution"`` (the prefix is optional)."""
    body = desc[5:] if desc.startswith("mset:") else desc
    if body.startswith("lp-curve:"):
        parts = body.split(":")
        if len(parts) != 3:
            raise DomainError(f"bad lp-curve descriptor {desc!r}")
        try:
            return lp_curve_mset(float(parts[1]), int(parts[2]))
        except ValueError:
            raise DomainError(f"bad lp-curve descriptor {desc!r}") from None
    if body.endswith(".json"):
        return load_mset(body)
    raise DomainError(f"unknown MSet descriptor {desc!r}")
