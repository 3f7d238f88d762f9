"""Orlicz function classes, the monotone level-equation solver and radial Orlicz additions.

The radial Orlicz sum of ``K_1, ..., K_m`` has, at each direction ``u``, the
radial value ``lambda`` solving ``phi(rho_1(u)/lambda, ..., rho_m(u)/lambda) = 1``.
For the increasing class the level function decreases in ``lambda``, for the
decreasing class it increases, so plain bisection on a geometric bracket is
enough.  The solver is vectorized over directions: one call handles every
node of a quadrature rule.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConstructionError, DimensionError, DivergenceError, DomainError
from .geometry import StarBody

__all__ = [
    "PHI",
    "PSI",
    "CURVATURES",
    "OrliczFunction",
    "DiscreteStarMeasure",
    "SolveBracket",
    "AssociativityReport",
    "LogT",
    "solve_level",
    "level_bracket",
    "orlicz_sum",
    "orlicz_combination_measure",
    "orlicz_linear_combination",
    "log_combination",
    "separable",
    "power_function",
    "psi_power_function",
    "sum_powers",
    "poly_function",
    "parse_phi",
    "check_associativity",
    "find_associativity_witness",
    "curvature_violations",
]

PHI = "Phi"
PSI = "Psi"
CURVATURES = ("concave", "convex", "strictly_concave", "strictly_convex", "none")

PROBE_EXPONENTS = np.arange(-20, 21)
MAX_DOUBLINGS = 200
RESIDUAL_TOL = 1e-12


def _richardson_one_sided(f: Callable[[float], float], side: str) -> float:
    hs = (1e-4, 1e-5, 1e-6)
    f1 = f(1.0)
    if side == "left":
        d = [(f1 - f(1.0 - h)) / h for h in hs]
    else:
        d = [(f(1.0 + h) - f1) / h for h in hs]
    # D(h) = D + c h + O(h^2); eliminate the linear term from the two larger steps
    return (hs[0] * d[1] - hs[1] * d[0]) / (hs[0] - hs[1])


@dataclass(frozen=True)
class OrliczFunction:
    """An m-ary function of the increasing class ``Phi`` or decreasing class ``Psi``.

    ``func`` is vectorized over the last axis: it maps an array of shape
    ``(..., arity)`` to shape ``(...)``.  Membership in the class is spot-checked
    on a fixed grid of powers of two at construction.

    ``phi0_curvature`` describes ``x -> func(x ** (1/n))`` for the dimension
    ``dimension``; it orients the inequality checkers.  ``power`` is set when
    the function is ``sum_j x_j ** power``.
    """

    arity: int
    kind: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    label: str = ""
    convex: bool | None = None
    phi0_curvature: str | None = None
    dimension: int | None = None
    left_deriv_at_1: float | None = None
    right_deriv_at_1: float | None = None
    power: float | None = None
    normalized: bool = field(init=False)
    deriv_estimated: bool = field(init=False, default=False)
    _cache: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        if self.arity < 1:
            raise ConstructionError("arity must be at least 1")
        if self.kind not in (PHI, PSI):
            raise ConstructionError(f"kind must be {PHI!r} or {PSI!r}, got {self.kind!r}")
        if self.phi0_curvature is not None and self.phi0_curvature not in CURVATURES:
            raise ConstructionError(f"unknown curvature tag {self.phi0_curvature!r}")
        self._validate_class()
        with np.errstate(divide="ignore", invalid="ignore"):
            norm = bool(np.all(np.abs(self(np.eye(self.arity)) - 1.0) <= 1e-12))
        object.__setattr__(self, "normalized", norm)
        if self.arity == 1:
            estimated = False
            if self.left_deriv_at_1 is None:
                object.__setattr__(self, "left_deriv_at_1", _richardson_one_sided(self.scalar, "left"))
                estimated = True
            if self.right_deriv_at_1 is None:
                object.__setattr__(self, "right_deriv_at_1", _richardson_one_sided(self.scalar, "right"))
                estimated = True
            object.__setattr__(self, "deriv_estimated", estimated)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.arity:
            raise DimensionError(f"{self.label or 'phi'} takes {self.arity} arguments, got {x.shape[-1]}")
        return np.asarray(self.func(x), dtype=float)

    def scalar(self, *args: float) -> float:
        return float(self(np.array(args, dtype=float)))

    def unary(self, t) -> np.ndarray:
        """Evaluate a unary function elementwise on an array ``t``."""
        if self.arity != 1:
            raise DimensionError("unary evaluation needs arity 1")
        return self(np.asarray(t, dtype=float)[..., None])

    def _validate_class(self):
        m = self.arity
        grid = 2.0**PROBE_EXPONENTS
        with np.errstate(all="ignore"):
            if self.kind == PHI:
                if abs(float(self(np.zeros(m)))) > 0:
                    raise ConstructionError(f"{self.label}: Phi-class functions vanish at the origin")
                fills = (0.0, 1.0)
            else:
                fills = (1.0,)
            for j in range(m):
                for fill in fills:
                    x = np.full((grid.size, m), fill)
                    x[:, j] = grid
                    v = self(x)
                    if not np.all(np.isfinite(v)) or np.any(v < 0):
                        raise ConstructionError(f"{self.label}: non-finite or negative values on the probe grid")
                    step = np.diff(v)
                    # strict growth can be invisible in floating point (1 + tiny**p == 1),
                    # so ask for monotone steps and a strict change end to end
                    sign = 1.0 if self.kind == PHI else -1.0
                    ok = np.all(sign * step >= 0) and sign * (v[-1] - v[0]) > 0
                    if not ok:
                        trend = "increasing" if self.kind == PHI else "decreasing"
                        raise ConstructionError(f"{self.label}: not strictly {trend} in component {j}")
            ones = np.ones(m)
            if self.kind == PHI:
                if not float(self(grid[-1] * ones)) > 1.0:
                    raise ConstructionError(f"{self.label}: does not grow past 1 along the diagonal")
            else:
                if not (float(self(grid[0] * ones)) > 1.0 > float(self(grid[-1] * ones))):
                    raise ConstructionError(f"{self.label}: wrong limits along the diagonal")

    def derivative_at_1(self, side: str | None = None) -> float:
        """One-sided derivative at 1: left for Phi, right for Psi by default."""
        if self.arity != 1:
            raise DimensionError("derivatives at 1 are defined for unary functions")
        side = side or ("left" if self.kind == PHI else "right")
        return float(self.left_deriv_at_1 if side == "left" else self.right_deriv_at_1)

    def tau(self, level: float = 1.0) -> float:
        """The unique ``t > 0`` with ``phi(t, ..., t) = level``."""
        key = ("tau", float(level))
        if key in self._cache:
            return self._cache[key]
        diag = lambda t: self.scalar(*([t] * self.arity))  # noqa: E731
        inc = self.kind == PHI
        lo, hi = 1.0, 1.0
        for _ in range(MAX_DOUBLINGS):
            v = diag(lo)
            if (v <= level) if inc else (v >= level):
                break
            lo /= 2
        else:
            raise DivergenceError(f"{self.label}: no diagonal bracket below level {level}")
        for _ in range(MAX_DOUBLINGS):
            v = diag(hi)
            if (v >= level) if inc else (v <= level):
                break
            hi *= 2
        else:
            raise DivergenceError(f"{self.label}: no diagonal bracket above level {level}")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            v = diag(mid)
            if (v < level) if inc else (v > level):
                lo = mid
            else:
                hi = mid
        t = 0.5 * (lo + hi)
        self._cache[key] = t
        return t


@dataclass(frozen=True)
class SolveBracket:
    """Initial bracket for the level solve at one direction."""

    tau: float
    lo: float
    hi: float


@dataclass(frozen=True)
class DiscreteStarMeasure:
    """A finite positive combination of Dirac masses on m-tuples of star bodies."""

    atoms: tuple

    def __init__(self, atoms: Sequence[tuple[float, Sequence[StarBody]]]):
        atoms = tuple((float(w), tuple(bs)) for w, bs in atoms)
        if not atoms:
            raise ConstructionError("a measure needs at least one atom")
        if any(not (w > 0 and math.isfinite(w)) for w, _ in atoms):
            raise ConstructionError("atom weights must be positive and finite")
        m = len(atoms[0][1])
        if m < 1 or any(len(bs) != m for _, bs in atoms):
            raise ConstructionError("all atoms must carry the same number of bodies")
        dims = {b.dimension for _, bs in atoms for b in bs}
        if len(dims) != 1:
            raise DimensionError("all bodies in a measure must share the dimension")
        object.__setattr__(self, "atoms", atoms)

    @property
    def arity(self) -> int:
        return len(self.atoms[0][1])

    @property
    def dimension(self) -> int:
        return self.atoms[0][1][0].dimension

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.atoms])

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def common_lower(self) -> float:
        """A radial lower bound shared by every body (the containment ball)."""
        return min(b.lower if b.positive else 0.0 for _, bs in self.atoms for b in bs)

    @classmethod
    def dirac(cls, bodies: Sequence[StarBody]) -> "DiscreteStarMeasure":
        return cls([(1.0, bodies)])


def _level_values(phi: OrliczFunction, r: np.ndarray, w: np.ndarray | None, lam: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if w is None:
            return phi(r / lam[:, None])
        return phi(r / lam[:, None, None]) @ w


def level_bracket(phi: OrliczFunction, r, weights=None, target: float = 1.0) -> SolveBracket:
    """Closed bracket for one direction, grown geometrically from the ``tau`` seed."""
    r = np.asarray(r, dtype=float)
    w = None if weights is None else np.asarray(weights, dtype=float)
    W = 1.0 if w is None else float(w.sum())
    tau = phi.tau(target / W)
    seed = float(np.max(r) if phi.kind == PHI else np.min(r)) / tau
    if not seed > 0:
        raise DomainError("no bracket for all-zero radii")
    level = lambda lam: float(_level_values(phi, r[None], w, np.array([lam]))[0])  # noqa: E731
    above = (lambda lam: level(lam) <= target) if phi.kind == PHI else (lambda lam: level(lam) >= target)
    lo = hi = seed
    for _ in range(MAX_DOUBLINGS):
        if above(hi):
            break
        hi *= 2
    else:
        raise DivergenceError("upper bracket did not close within 200 doublings")
    for _ in range(MAX_DOUBLINGS):
        if not above(lo):
            break
        lo /= 2
    else:
        raise DivergenceError("lower bracket did not close within 200 halvings")
    return SolveBracket(tau, lo, hi)


def solve_level(phi: OrliczFunction, r, weights=None, target: float = 1.0):
    """Solve ``sum_a w_a phi(r_a / lambda) = target`` for ``lambda``.

    ``r`` has shape ``(..., m)`` when ``weights`` is None and ``(..., A, m)``
    with ``weights`` of shape ``(A,)`` otherwise; the leading axes are
    independent directions.  For the increasing class an all-zero ``r`` gives
    0.  The bracket is seeded at ``max r / tau`` (increasing class) or
    ``min r / tau`` (decreasing class), where ``tau`` solves the diagonal
    equation, then grown by doubling (at most 200 times) and bisected to
    floating-point resolution.
    """
    r = np.asarray(r, dtype=float)
    if not target > 0:
        raise DomainError("target level must be positive")
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or np.any(~(w > 0)):
            raise DomainError("weights must be a positive vector")
        if r.ndim < 2 or r.shape[-2] != w.size:
            raise DimensionError(f"r must have shape (..., {w.size}, m), got {r.shape}")
        core = 2
    else:
        w = None
        core = 1
    if r.shape[-1] != phi.arity:
        raise DimensionError(f"{phi.label or 'phi'} has arity {phi.arity}, got {r.shape[-1]} radii")
    scalar = r.ndim == core
    lead = r.shape[: r.ndim - core]
    flat = r.reshape((-1,) + r.shape[r.ndim - core :])
    per_node = flat.reshape(flat.shape[0], -1)
    if np.any(per_node < 0) or not np.all(np.isfinite(per_node)):
        raise DomainError("radii must be finite and nonnegative")
    if phi.kind == PSI and np.any(per_node == 0):
        raise DomainError("Psi-class sums need strictly positive radii")

    out = np.zeros(flat.shape[0])
    active = np.any(per_node > 0, axis=1)

    if w is None and phi.normalized and phi.kind == PHI:
        # identity property: one nonzero radius r_j with phi(e_j) = 1 gives lambda = r_j
        single = active & (np.count_nonzero(per_node, axis=1) == 1)
        out[single] = per_node[single].max(axis=1)
        active &= ~single

    if np.any(active):
        out[active] = _bisect(phi, flat[active], w, target)
    out = out.reshape(lead)
    return float(out) if scalar else out


def _bisect(phi: OrliczFunction, r: np.ndarray, w: np.ndarray | None, target: float) -> np.ndarray:
    inc = phi.kind == PHI  # level decreasing in lambda
    W = 1.0 if w is None else float(w.sum())
    tau = phi.tau(target / W)
    per_node = r.reshape(r.shape[0], -1)
    N = r.shape[0]

    def over(lam, idx):
        # True where lambda lies above the root
        v = _level_values(phi, r[idx], w, lam)
        return v <= target if inc else v >= target

    if inc:
        hi = per_node.max(axis=1) / tau
        lo = hi.copy()
    else:
        lo = per_node.min(axis=1) / tau
        hi = lo.copy()
    # grow hi until it is above the root, then lo until it is below
    todo = np.arange(N)
    for _ in range(MAX_DOUBLINGS + 1):
        if todo.size == 0:
            break
        ok = over(hi[todo], todo)
        todo = todo[~ok]
        hi[todo] *= 2
    else:
        raise DivergenceError("upper bracket did not close within 200 doublings")
    todo = np.arange(N)
    for _ in range(MAX_DOUBLINGS + 1):
        if todo.size == 0:
            break
        ok = ~over(lo[todo], todo)
        todo = todo[~ok]
        lo[todo] /= 2
    else:
        raise DivergenceError("lower bracket did not close within 200 halvings")

    for _ in range(1100):
        mid = 0.5 * (lo + hi)
        live = (mid > lo) & (mid < hi)
        if not np.any(live):
            break
        idx = np.flatnonzero(live)
        above = over(mid[idx], idx)
        hi[idx[above]] = mid[idx[above]]
        lo[idx[~above]] = mid[idx[~above]]

    with np.errstate(all="ignore"):
        res_lo = np.abs(_level_values(phi, r, w, lo) - target)
        res_hi = np.abs(_level_values(phi, r, w, hi) - target)
    return np.where(res_lo < res_hi, lo, hi)


def _stack_radii(bodies: Sequence[StarBody], u: np.ndarray) -> np.ndarray:
    return np.stack([b.radial(u) for b in bodies], axis=-1)


def orlicz_sum(phi: OrliczFunction, bodies: Sequence[StarBody]) -> StarBody:
    """Radial Orlicz sum of ``bodies``."""
    bodies = tuple(bodies)
    if len(bodies) != phi.arity:
        raise DimensionError(f"{phi.label or 'phi'} has arity {phi.arity}, got {len(bodies)} bodies")
    n = bodies[0].dimension
    if any(b.dimension != n for b in bodies):
        raise DimensionError("bodies live in different dimensions")
    all_pos = all(b.positive for b in bodies)
    if phi.kind == PSI and not all_pos:
        raise DomainError("Psi-class sums need bodies with positive radial functions")

    def radial(u):
        return solve_level(phi, _stack_radii(bodies, u))

    tau = phi.tau(1.0)
    if phi.kind == PHI:
        upper = max(b.upper for b in bodies) / tau
        lower = min(b.lower for b in bodies) / tau if all_pos else 0.0
    else:
        upper = max(b.upper for b in bodies) / tau
        lower = min(b.lower for b in bodies) / tau
    return StarBody(
        n,
        radial,
        positive=all_pos,
        continuous=all(b.continuous for b in bodies),
        label=f"+[{phi.label}](" + ", ".join(b.label for b in bodies) + ")",
        upper=upper,
        lower=lower,
    )


def orlicz_combination_measure(phi: OrliczFunction, mu: DiscreteStarMeasure) -> StarBody:
    """Orlicz combination of the bodies charged by a finite measure.

    With a unit Dirac mass this reproduces :func:`orlicz_sum` bit for bit.
    """
    if mu.arity != phi.arity:
        raise DimensionError(f"measure has arity {mu.arity}, phi has {phi.arity}")
    bodies = [b for _, bs in mu.atoms for b in bs]
    all_pos = all(b.positive for b in bodies)
    if phi.kind == PSI and not (all_pos and mu.common_lower > 0):
        raise DomainError("Psi-class combinations need bodies containing a common positive ball")
    w = mu.weights
    atoms = [bs for _, bs in mu.atoms]

    def radial(u):
        r = np.stack([_stack_radii(bs, u) for bs in atoms], axis=-2)
        return solve_level(phi, r, w)

    tau = phi.tau(1.0 / mu.total)
    lower = min(b.lower for b in bodies) / tau if all_pos else 0.0
    return StarBody(
        mu.dimension,
        radial,
        positive=all_pos,
        continuous=all(b.continuous for b in bodies),
        label=f"S[{phi.label}](mu with {len(atoms)} atoms)",
        upper=max(b.upper for b in bodies) / tau,
        lower=lower,
    )


def separable(funcs: Sequence[OrliczFunction], weights: Sequence[float] | None = None, label: str | None = None) -> OrliczFunction:
    """``phi(x) = sum_j w_j phi_j(x_j)`` from unary functions of one class."""
    funcs = tuple(funcs)
    if any(f.arity != 1 for f in funcs):
        raise DimensionError("separable sums are built from unary functions")
    kinds = {f.kind for f in funcs}
    if len(kinds) != 1:
        raise ConstructionError("all summands must belong to the same class")
    w = np.ones(len(funcs)) if weights is None else np.asarray(weights, dtype=float)
    if w.size != len(funcs) or np.any(~(w > 0)):
        raise ConstructionError("weights must be positive, one per summand")
    w.setflags(write=False)

    def func(x):
        return sum(w[j] * f.func(x[..., j : j + 1]) for j, f in enumerate(funcs))

    powers = {f.power for f in funcs}
    power = powers.pop() if len(powers) == 1 and np.all(w == 1.0) else None
    curv = {f.phi0_curvature for f in funcs}
    dims = {f.dimension for f in funcs}
    return OrliczFunction(
        len(funcs),
        kinds.pop(),
        func,
        label=label or " + ".join(f"{wj!r}*{f.label}" for wj, f in zip(w, funcs)),
        convex=all(f.convex for f in funcs) if all(f.convex is not None for f in funcs) else None,
        phi0_curvature=curv.pop() if len(curv) == 1 else "none",
        dimension=dims.pop() if len(dims) == 1 else None,
        power=power,
    )


def orlicz_linear_combination(phi1: OrliczFunction, phi2: OrliczFunction, K: StarBody, eps: float, L: StarBody) -> StarBody:
    """``K +_{phi, eps} L``: radial solving ``phi1(rho_K/l) + eps phi2(rho_L/l) = 1``."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    phi = separable([phi1, phi2], [1.0, float(eps)], label=f"{phi1.label} + {eps!r}*{phi2.label}")
    return orlicz_sum(phi, [K, L])


def log_combination(K: StarBody, L: StarBody, t: float) -> StarBody:
    """Radial log combination ``(1-t) K +_0 t L``: radial ``rho_K^(1-t) rho_L^t``."""
    if not 0 < t < 1:
        raise DomainError(f"t must lie in (0, 1), got {t}")
    if not (K.positive and L.positive):
        raise DomainError("the log combination needs bodies with positive radial functions")
    if K.dimension != L.dimension:
        raise DimensionError("bodies live in different dimensions")
    t = float(t)
    rk, rl = K.radial, L.radial
    return StarBody(
        K.dimension,
        lambda u: rk(u) ** (1 - t) * rl(u) ** t,
        positive=True,
        continuous=K.continuous and L.continuous,
        label=f"log[{t!r}]({K.label}, {L.label})",
        upper=K.upper ** (1 - t) * L.upper**t,
        lower=K.lower ** (1 - t) * L.lower**t,
    )


# --- registry ----------------------------------------------------------------


def _exponent_curvature(e: float) -> str:
    if e < 1:
        return "strictly_concave" if e > 0 else "strictly_convex"
    return "strictly_convex" if e > 1 else "concave"


def power_function(p: float, arity: int = 2, dimension: int = 2) -> OrliczFunction:
    """``sum_j x_j^p`` with ``p > 0`` (increasing class, normalized)."""
    p = float(p)
    if not p > 0:
        raise ConstructionError(f"lp needs p > 0, got {p}; use psi-lp for p < 0")
    return OrliczFunction(
        arity,
        PHI,
        lambda x: np.sum(x**p, axis=-1),
        label=f"lp:{p!r}",
        convex=p >= 1,
        phi0_curvature=_exponent_curvature(p / dimension),
        dimension=dimension,
        left_deriv_at_1=p,
        right_deriv_at_1=p,
        power=p,
    )


def psi_power_function(p: float, arity: int = 2, dimension: int = 2) -> OrliczFunction:
    """``sum_j x_j^p`` with ``p < 0`` (decreasing class)."""
    p = float(p)
    if not p < 0:
        raise ConstructionError(f"psi-lp needs p < 0, got {p}")
    return OrliczFunction(
        arity,
        PSI,
        lambda x: np.sum(x**p, axis=-1),
        label=f"psi-lp:{p!r}",
        convex=True,
        phi0_curvature="strictly_convex",
        dimension=dimension,
        left_deriv_at_1=p,
        right_deriv_at_1=p,
        power=p,
    )


def sum_powers(p1: float, p2: float, dimension: int = 2) -> OrliczFunction:
    """``x_1^p1 + x_2^p2`` with both exponents positive."""
    p = np.array([p1, p2], dtype=float)
    if np.any(p <= 0):
        raise ConstructionError("sum-powers needs positive exponents")
    curv = {_exponent_curvature(e) for e in p / dimension}
    if len(curv) == 1:
        c = curv.pop()
    elif curv <= {"concave", "strictly_concave"}:
        c = "concave"
    elif curv <= {"concave", "strictly_convex"}:
        c = "convex"
    else:
        c = "none"
    return OrliczFunction(
        2,
        PHI,
        lambda x: x[..., 0] ** p[0] + x[..., 1] ** p[1],
        label=f"sum-powers:{p1!r},{p2!r}",
        convex=bool(np.all(p >= 1)),
        phi0_curvature=c,
        dimension=dimension,
    )


def poly_function(c1: float, c2: float, arity: int = 2, dimension: int = 2) -> OrliczFunction:
    """``sum_j g(x_j)`` with ``g(t) = (c1 t + c2 t^2) / (c1 + c2)``."""
    c1, c2 = float(c1), float(c2)
    if c1 < 0 or c2 < 0 or c1 + c2 <= 0:
        raise ConstructionError("poly needs nonnegative coefficients, not both zero")
    s = c1 + c2

    def func(x):
        return np.sum((c1 * x + c2 * x * x) / s, axis=-1)

    # phi0(t) = (c1 t^(1/n) + c2 t^(2/n)) / s; only c1 = 0, n = 2 makes it linear
    curv = "strictly_concave" if (c1 > 0 or dimension > 2) else "concave"
    d = (c1 + 2 * c2) / s
    return OrliczFunction(
        arity,
        PHI,
        func,
        label=f"poly:{c1!r},{c2!r}",
        convex=True,
        phi0_curvature=curv,
        dimension=dimension,
        left_deriv_at_1=d,
        right_deriv_at_1=d,
        power=1.0 if c2 == 0 else None,
    )


@dataclass(frozen=True)
class LogT:
    """Registry marker for the product function routed to :func:`log_combination`."""

    t: float
    label: str = ""


def parse_phi(desc: str, arity: int = 2, dimension: int = 2) -> OrliczFunction | LogT:
    """Build a registry function from a descriptor such as ``"lp:2"`` or ``"poly:1,1"``."""
    name, _, args = desc.partition(":")
    try:
        vals = [float(a) for a in args.split(",")] if args else []
    except ValueError:
        raise DomainError(f"bad parameters in function descriptor {desc!r}") from None
    try:
        if name == "lp" and len(vals) == 1:
            return power_function(vals[0], arity, dimension)
        if name == "psi-lp" and len(vals) == 1:
            return psi_power_function(vals[0], arity, dimension)
        if name == "sum-powers" and len(vals) == 2:
            if arity != 2:
                raise DomainError("sum-powers is binary")
            return sum_powers(vals[0], vals[1], dimension)
        if name == "poly" and len(vals) == 2:
            return poly_function(vals[0], vals[1], arity, dimension)
        if name == "log-t" and len(vals) == 1:
            if not 0 < vals[0] < 1:
                raise DomainError("log-t needs t in (0, 1)")
            return LogT(vals[0], label=desc)
    except ConstructionError as exc:
        raise DomainError(str(exc)) from None
    raise DomainError(f"unknown function descriptor {desc!r}")


# --- structural checks -------------------------------------------------------


@dataclass(frozen=True)
class AssociativityReport:
    max_gap: float
    node: int
    radii: tuple = ()


def check_associativity(phi: OrliczFunction, K: StarBody, L: StarBody, M_body: StarBody, probe) -> AssociativityReport:
    """Largest gap between ``(K + L) + M`` and ``K + (L + M)`` over the probe nodes."""
    if phi.arity != 2:
        raise DimensionError("associativity is a property of binary additions")
    left = orlicz_sum(phi, [orlicz_sum(phi, [K, L]), M_body])
    right = orlicz_sum(phi, [K, orlicz_sum(phi, [L, M_body])])
    nodes = getattr(probe, "nodes", probe)
    gaps = np.abs(left.values(nodes) - right.values(nodes))
    i = int(np.argmax(gaps))
    return AssociativityReport(float(gaps[i]), i)


def find_associativity_witness(
    phi: OrliczFunction, n: int = 2, seed: int = 0, trials: int = 64, threshold: float = 1e-2
) -> AssociativityReport:
    """Search seeded triples of balls for a nonassociativity witness.

    Returns the first triple whose gap reaches ``threshold``, or the largest gap seen.
    """
    from .geometry import make_ball

    rng = np.random.default_rng(seed)
    probe = np.eye(n)[:1]
    best = AssociativityReport(0.0, 0, ())
    for _ in range(trials):
        a, b, c = rng.uniform(0.2, 5.0, size=3)
        rep = check_associativity(phi, make_ball(n, a), make_ball(n, b), make_ball(n, c), probe)
        rep = AssociativityReport(rep.max_gap, rep.node, (float(a), float(b), float(c)))
        if rep.max_gap >= threshold:
            return rep
        if rep.max_gap > best.max_gap:
            best = rep
    return best


def curvature_violations(phi, curvature: str, n: int, arity: int = 1) -> int:
    """Count midpoint violations of the declared curvature of ``x -> phi(x^(1/n))``.

    ``phi`` may be an :class:`OrliczFunction` or a plain vectorized callable on
    arrays of shape ``(..., arity)``.
    """
    if curvature in (None, "none"):
        return 0
    grid = 2.0 ** np.arange(-4, 4.5, 0.5)
    if arity == 1:
        pts = grid[:, None]
    else:
        rng = np.random.default_rng(12345)
        pts = rng.choice(grid, size=(64, arity))
    i, j = np.triu_indices(pts.shape[0], 1)
    x, y = pts[i], pts[j]
    f0 = lambda z: np.asarray(phi(z ** (1.0 / n)), dtype=float)  # noqa: E731
    with np.errstate(all="ignore"):
        mid = f0(0.5 * (x + y))
        avg = 0.5 * (f0(x) + f0(y))
    tol = 1e-12 * (1 + np.abs(avg))
    if curvature in ("concave", "strictly_concave"):
        bad = mid < avg - tol
    else:
        bad = mid > avg + tol
    count = int(np.count_nonzero(bad))
    if count:
        warnings.warn(f"declared {curvature} phi0 violated at {count} midpoint probes", RuntimeWarning, stacklevel=2)
    return count
