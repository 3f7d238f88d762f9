"""Star bodies as radial oracles, their constructors and the classical radial combinations.

A star body is stored as a vectorized radial oracle on the unit sphere plus a
little metadata (dimension, positivity/continuity flags and a pair of radial
bounds).  Every downstream algorithm consumes radial values only, so no
boundary representation is ever built.

Oracles take an ``(N, n)`` array of unit vectors and return an ``(N,)`` array.
``StarBody.__call__`` additionally accepts a single direction of shape ``(n,)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConstructionError, DimensionError, DomainError

__all__ = [
    "StarBody",
    "LinearMap",
    "ConvexBodySupport",
    "as_directions",
    "direction",
    "make_ball",
    "make_fourier_star",
    "make_ridge_star",
    "random_star",
    "linear_image",
    "scale",
    "pth_radial_combination",
    "radial_metric",
    "restrict_to_coordinate_subspace",
    "ellipsoid",
    "ellipsoid_support",
    "ball_support",
    "polytope_support",
    "polar_star_body",
    "grid_nodes",
    "sample_grid",
    "grid_body",
    "save_grid",
    "load_grid",
]

UNIT_TOL = 1e-14
Oracle = Callable[[np.ndarray], np.ndarray]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_directions(u, n: int | None = None, *, check: bool = False) -> np.ndarray:
    """Return ``u`` as a 2-D float array of directions, shape ``(N, n)``."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[None, :]
    if u.ndim != 2:
        raise DimensionError(f"directions must be 1-D or 2-D, got shape {u.shape}")
    if n is not None and u.shape[1] != n:
        raise DimensionError(f"expected directions in R^{n}, got R^{u.shape[1]}")
    if u.shape[1] < 2:
        raise DimensionError("directions need n >= 2")
    if check:
        norms = np.linalg.norm(u, axis=1)
        bad = np.abs(norms - 1.0) > UNIT_TOL * 10
        if np.any(bad):
            raise DomainError(f"direction {u[np.argmax(bad)]} is not a unit vector")
    return u


def direction(coords: Sequence[float]) -> np.ndarray:
    """Normalize ``coords`` to a unit vector (norm within 1e-14 of one)."""
    v = np.asarray(coords, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise DimensionError("a direction needs n >= 2 coordinates")
    r = np.linalg.norm(v)
    if r == 0:
        raise DomainError("zero vector has no direction")
    return v / r


@dataclass(frozen=True)
class StarBody:
    """A star set given by its radial function on the unit sphere.

    ``upper`` is a finite bound on the radial function and ``lower`` a bound
    from below (zero when nothing better is known).  ``positive`` marks
    membership in the class of star sets with strictly positive radial
    function; ``lower > 0`` whenever it is set by a constructor.
    """

    dimension: int
    radial: Oracle = field(repr=False)
    positive: bool = False
    continuous: bool = True
    label: str = ""
    upper: float = math.inf
    lower: float = 0.0

    def __post_init__(self):
        if self.dimension < 2:
            raise DimensionError(f"star bodies need n >= 2, got {self.dimension}")
        if not math.isfinite(self.upper):
            raise ConstructionError(f"star body {self.label!r} has no finite radial bound")

    def __call__(self, u):
        single = np.ndim(u) == 1
        vals = np.asarray(self.radial(as_directions(u, self.dimension)), dtype=float)
        return float(vals[0]) if single else vals

    def values(self, nodes) -> np.ndarray:
        """Radial values at an ``(N, n)`` node array or a rule's nodes."""
        nodes = getattr(nodes, "nodes", nodes)
        return np.asarray(self.radial(as_directions(nodes, self.dimension)), dtype=float)


@dataclass(frozen=True)
class LinearMap:
    matrix: np.ndarray
    inverse: np.ndarray

    @classmethod
    def from_matrix(cls, matrix) -> "LinearMap":
        a = np.array(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"linear map must be square, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ConstructionError("matrix has non-finite entries")
        s = np.linalg.svd(a, compute_uv=False)
        if s[-1] <= s[0] * 1e-12:
            raise ConstructionError("matrix is singular (condition number above 1e12)")
        inv = np.linalg.inv(a)
        if np.max(np.abs(a @ inv - np.eye(a.shape[0]))) > 1e-10:
            raise ConstructionError("matrix inverse is not accurate to 1e-10")
        return cls(_frozen(a), _frozen(inv))

    @classmethod
    def scalar(cls, r: float, n: int) -> "LinearMap":
        return cls.from_matrix(r * np.eye(n))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def compose(self, other: "LinearMap") -> "LinearMap":
        """``self`` after ``other``."""
        return LinearMap.from_matrix(self.matrix @ other.matrix)


@dataclass(frozen=True)
class ConvexBodySupport:
    """Support function of a convex body with the origin in its interior."""

    dimension: int
    support: Oracle = field(repr=False)
    label: str = ""
    upper: float = math.inf
    lower: float = 0.0

    def __call__(self, u):
        single = np.ndim(u) == 1
        vals = np.asarray(self.support(as_directions(u, self.dimension)), dtype=float)
        return float(vals[0]) if single else vals

    def values(self, nodes) -> np.ndarray:
        nodes = getattr(nodes, "nodes", nodes)
        return np.asarray(self.support(as_directions(nodes, self.dimension)), dtype=float)


def make_ball(n: int, r: float = 1.0) -> StarBody:
    if n < 2:
        raise DimensionError(f"balls need n >= 2, got {n}")
    if r < 0 or not math.isfinite(r):
        raise ConstructionError(f"radius must be finite and nonnegative, got {r}")
    r = float(r)
    return StarBody(
        n,
        lambda u: np.full(u.shape[0], r),
        positive=r > 0,
        label=f"ball:{n}:{r!r}",
        upper=r,
        lower=r,
    )


def make_fourier_star(base: float, amps: Sequence[tuple[int, float]] = ()) -> StarBody:
    """Planar star body with radial function ``base + sum a cos(k theta)``."""
    amps = [(int(k), float(a)) for k, a in amps]
    slack = base - sum(abs(a) for _, a in amps)
    if not slack > 0:
        raise ConstructionError(f"fourier star not positive: base - sum|a| = {slack}")
    ks = np.array([k for k, _ in amps], dtype=float)
    aa = np.array([a for _, a in amps], dtype=float)

    def radial(u):
        theta = np.arctan2(u[:, 1], u[:, 0])
        if ks.size == 0:
            return np.full(u.shape[0], float(base))
        return base + np.cos(np.outer(theta, ks)) @ aa

    tail = "".join(f":{k}:{a!r}" for k, a in amps)
    return StarBody(
        2,
        radial,
        positive=True,
        label=f"fourier:{float(base)!r}{tail}",
        upper=base + float(np.sum(np.abs(aa))),
        lower=slack,
    )


def make_ridge_star(n: int, base: float, ridges: Sequence[tuple[Sequence[float], float, float, float]]) -> StarBody:
    """Smooth star body in any dimension.

    ``ridges`` holds ``(w, k, a, phase)`` tuples and the radial function is
    ``base + sum a cos(k <w, u> + phase)`` with ``w`` normalized.
    """
    if n < 2:
        raise DimensionError(f"n >= 2 required, got {n}")
    ws = np.array([direction(w) for w, *_ in ridges]).reshape(-1, n)
    ks = np.array([r[1] for r in ridges], dtype=float)
    aa = np.array([r[2] for r in ridges], dtype=float)
    ph = np.array([r[3] for r in ridges], dtype=float)
    slack = base - float(np.sum(np.abs(aa)))
    if not slack > 0:
        raise ConstructionError(f"ridge star not positive: base - sum|a| = {slack}")
    ws.setflags(write=False)

    def radial(u):
        return base + np.cos((u @ ws.T) * ks + ph) @ aa

    return StarBody(
        n,
        radial,
        positive=True,
        label=f"ridge:{n}:{float(base)!r}:{len(ridges)}",
        upper=base + float(np.sum(np.abs(aa))),
        lower=slack,
    )


def random_star(n: int, rng: np.random.Generator, *, terms: int = 3, roughness: float = 0.6) -> StarBody:
    """Seeded smooth positive test body (Fourier star for n = 2)."""
    base = rng.uniform(0.7, 1.5)
    budget = roughness * base * rng.uniform(0.3, 1.0)
    share = rng.dirichlet(np.ones(terms)) * budget
    if n == 2:
        ks = rng.choice(np.arange(1, 7), size=terms, replace=False)
        signs = rng.choice([-1.0, 1.0], size=terms)
        return make_fourier_star(base, list(zip(ks.tolist(), (signs * share).tolist())))
    ridges = []
    for a in share:
        w = rng.normal(size=n)
        ridges.append((w, rng.uniform(1.0, 4.0), float(a), rng.uniform(0, 2 * np.pi)))
    return make_ridge_star(n, base, ridges)


def linear_image(K: StarBody, A: LinearMap | np.ndarray) -> StarBody:
    """The image ``A K``, using ``rho_{AK}(u) = rho_K(A^{-1} u)`` and degree -1 homogeneity."""
    if not isinstance(A, LinearMap):
        A = LinearMap.from_matrix(A)
    if A.dimension != K.dimension:
        raise DimensionError(f"map acts on R^{A.dimension}, body lives in R^{K.dimension}")
    inv_t = A.inverse.T
    radial_k = K.radial

    def radial(u):
        y = u @ inv_t
        s = np.linalg.norm(y, axis=1)
        return radial_k(y / s[:, None]) / s

    sv = np.linalg.svd(A.matrix, compute_uv=False)
    return StarBody(
        K.dimension,
        radial,
        positive=K.positive,
        continuous=K.continuous,
        label=f"linear({K.label})",
        upper=K.upper * float(sv[0]),
        lower=K.lower * float(sv[-1]),
    )


def scale(K: StarBody, r: float) -> StarBody:
    """Dilatate ``r K`` (``r >= 0``); exact multiplication of the radial function."""
    if r < 0:
        raise DomainError(f"dilatation factor must be nonnegative, got {r}")
    r = float(r)
    radial_k = K.radial
    return StarBody(
        K.dimension,
        lambda u: r * radial_k(u),
        positive=K.positive and r > 0,
        continuous=K.continuous,
        label=f"{r!r}*({K.label})",
        upper=r * K.upper,
        lower=r * K.lower,
    )


def _pth_mean(alpha: float, a, p: float, beta: float, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if p > 0:
            out = (alpha * a**p + beta * b**p) ** (1.0 / p)
        else:
            # a zero radial gives an infinite term and inf ** (1/p) == 0
            s = (alpha * a**p if alpha > 0 else 0.0) + (beta * b**p if beta > 0 else 0.0)
            out = np.where(s > 0, s ** (1.0 / p), 0.0)
    return out


def pth_radial_combination(alpha: float, K: StarBody, p: float, beta: float, L: StarBody) -> StarBody:
    """``alpha K +_p beta L``: radial ``(alpha rho_K^p + beta rho_L^p)^(1/p)``.

    For ``p < 0`` the radial is 0 wherever a participating body has radial 0.
    """
    if p == 0:
        raise DomainError("p = 0 is the log combination; use orlicz.log_combination")
    if alpha < 0 or beta < 0:
        raise DomainError("coefficients must be nonnegative")
    if K.dimension != L.dimension:
        raise DimensionError("bodies live in different dimensions")
    alpha, beta, p = float(alpha), float(beta), float(p)
    rk, rl = K.radial, L.radial

    def radial(u):
        return _pth_mean(alpha, rk(u), p, beta, rl(u))

    if p > 0:
        positive = (K.positive and alpha > 0) or (L.positive and beta > 0)
    else:
        positive = (K.positive or alpha == 0) and (L.positive or beta == 0) and (alpha + beta > 0)
    return StarBody(
        K.dimension,
        radial,
        positive=bool(positive),
        continuous=K.continuous and L.continuous,
        label=f"({alpha!r}({K.label}) +_{p!r} {beta!r}({L.label}))",
        upper=float(_pth_mean(alpha, K.upper, p, beta, L.upper)),
        lower=float(_pth_mean(alpha, K.lower, p, beta, L.lower)),
    )


def radial_metric(K: StarBody, L: StarBody, probe) -> float:
    """Largest radial discrepancy over the probe nodes.

    This is a lower bound for the true supremum over the sphere and converges
    to it under node refinement for continuous bodies.
    """
    if K.dimension != L.dimension:
        raise DimensionError("bodies live in different dimensions")
    nodes = getattr(probe, "nodes", probe)
    return float(np.max(np.abs(K.values(nodes) - L.values(nodes))))


def restrict_to_coordinate_subspace(K: StarBody, axes: Sequence[int]) -> StarBody:
    """The section of ``K`` by the span of the given coordinate axes, as a body in R^len(axes)."""
    axes = [int(a) for a in axes]
    if len(axes) < 2:
        raise DimensionError("a section needs at least two axes")
    if len(set(axes)) != len(axes) or min(axes) < 0 or max(axes) >= K.dimension:
        raise DimensionError(f"invalid axes {axes} for R^{K.dimension}")
    n = K.dimension
    radial_k = K.radial
    idx = np.array(axes)

    def radial(v):
        u = np.zeros((v.shape[0], n))
        u[:, idx] = v
        return radial_k(u)

    return StarBody(
        len(axes),
        radial,
        positive=K.positive,
        continuous=K.continuous,
        label=f"section({K.label},{axes})",
        upper=K.upper,
        lower=K.lower,
    )


def ellipsoid(semi_axes: Sequence[float]) -> StarBody:
    """Axis-aligned ellipsoid: diagonal linear image of the unit ball."""
    d = np.asarray(semi_axes, dtype=float)
    E = linear_image(make_ball(d.size, 1.0), np.diag(d))
    return StarBody(
        E.dimension,
        E.radial,
        positive=True,
        label="ellipsoid:" + ",".join(repr(float(x)) for x in d),
        upper=E.upper,
        lower=E.lower,
    )


def ellipsoid_support(A) -> ConvexBodySupport:
    """Support function of ``A B^n``: ``h(u) = |A^T u|``."""
    A = np.array(A, dtype=float)
    if A.ndim == 1:
        A = np.diag(A)
    lm = LinearMap.from_matrix(A)
    at = _frozen(lm.matrix)
    sv = np.linalg.svd(at, compute_uv=False)
    return ConvexBodySupport(
        lm.dimension,
        lambda u: np.linalg.norm(u @ at, axis=1),
        label="ellipsoid-support",
        upper=float(sv[0]),
        lower=float(sv[-1]),
    )


def ball_support(n: int, r: float = 1.0) -> ConvexBodySupport:
    if not r > 0:
        raise ConstructionError("support bodies need the origin in the interior (r > 0)")
    r = float(r)
    return ConvexBodySupport(n, lambda u: np.full(u.shape[0], r), label=f"ball-support:{n}:{r!r}", upper=r, lower=r)


def polytope_support(vertices) -> ConvexBodySupport:
    """Support function of the convex hull of finitely many points, ``max_i <v_i, u>``.

    The lower bound is the inradius about the origin; the origin must be
    interior to the hull.
    """
    from scipy.spatial import ConvexHull

    V = _frozen(vertices)
    if V.ndim != 2 or V.shape[1] < 2:
        raise DimensionError("vertices must be an (N, n) array with n >= 2")
    hull = ConvexHull(V)
    # facet equations are normal . x + offset <= 0 with unit normals
    inradius = float(np.min(-hull.equations[:, -1]))
    if not inradius > 0:
        raise ConstructionError("origin is not interior to the polytope")
    return ConvexBodySupport(
        V.shape[1],
        lambda u: np.max(u @ V.T, axis=1),
        label=f"polytope:{V.shape[0]}",
        upper=float(np.max(np.linalg.norm(V, axis=1))),
        lower=inradius,
    )


def polar_star_body(C: ConvexBodySupport) -> StarBody:
    """Polar body as a star body: ``rho(u) = 1 / h(u)``."""
    support = C.support

    def radial(u):
        h = support(u)
        if np.any(~(h > 0)):
            i = int(np.argmax(~(h > 0)))
            raise DomainError(f"nonpositive support value {h[i]} at direction {u[i]}")
        return 1.0 / h

    if not C.lower > 0:
        raise ConstructionError("support function has no positive lower bound")
    return StarBody(
        C.dimension,
        radial,
        positive=True,
        label=f"polar({C.label})",
        upper=1.0 / C.lower,
        lower=1.0 / C.upper if math.isfinite(C.upper) else 0.0,
    )


# --- grid-sampled bodies ----------------------------------------------------


def grid_nodes(n: int, shape: Sequence[int], polar_nodes=None) -> np.ndarray:
    """Directions of a persistence grid in row-major order.

    n = 2: ``theta_i = 2 pi i / N``.  n = 3: Gauss-Legendre nodes in the polar
    cosine (ascending) times uniform azimuths ``2 pi j / N_az``.
    """
    if n == 2:
        (N,) = shape
        th = 2 * np.pi * np.arange(N) / N
        return np.column_stack([np.cos(th), np.sin(th)])
    if n == 3:
        Np, Na = shape
        z = np.polynomial.legendre.leggauss(Np)[0] if polar_nodes is None else np.asarray(polar_nodes, float)
        ph = 2 * np.pi * np.arange(Na) / Na
        s = np.sqrt(np.clip(1 - z**2, 0, None))
        zz, pp = np.meshgrid(z, ph, indexing="ij")
        ss = np.broadcast_to(s[:, None], zz.shape)
        return np.column_stack([(ss * np.cos(pp)).ravel(), (ss * np.sin(pp)).ravel(), zz.ravel()])
    raise DimensionError("grid files support n = 2 and n = 3 only")


def sample_grid(K: StarBody, shape: Sequence[int]) -> dict:
    """Sample ``K`` on a persistence grid and return the JSON-ready record."""
    shape = [int(s) for s in shape]
    record = {"dimension": K.dimension, "grid_shape": shape, "label": K.label}
    if K.dimension == 3:
        record["polar_nodes"] = np.polynomial.legendre.leggauss(shape[0])[0].tolist()
    vals = K.values(grid_nodes(K.dimension, shape, record.get("polar_nodes")))
    record["values"] = vals.tolist()
    return record


def grid_body(record: dict) -> StarBody:
    """Star body interpolating a grid record (linear in angle / bilinear lat-long)."""
    n = int(record["dimension"])
    shape = [int(s) for s in record["grid_shape"]]
    vals = np.asarray(record["values"], dtype=float)
    label = str(record.get("label", "grid"))
    if vals.size != int(np.prod(shape)):
        raise ConstructionError(f"grid has {vals.size} values, shape {shape} needs {int(np.prod(shape))}")
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise ConstructionError("grid values must be finite and nonnegative")
    vmin, vmax = float(vals.min()), float(vals.max())
    if n == 2:
        (N,) = shape
        table = _frozen(np.append(vals, vals[0]))

        def radial(u):
            t = np.mod(np.arctan2(u[:, 1], u[:, 0]), 2 * np.pi) * N / (2 * np.pi)
            i = np.minimum(np.floor(t).astype(int), N - 1)
            f = t - i
            return (1 - f) * table[i] + f * table[i + 1]

    elif n == 3:
        Np, Na = shape
        z = np.asarray(record.get("polar_nodes") or np.polynomial.legendre.leggauss(Np)[0], dtype=float)
        grid = vals.reshape(Np, Na)
        theta = np.arccos(np.clip(z, -1, 1))
        order = np.argsort(theta)
        theta, grid = theta[order], grid[order]
        # pole rows collapse to the mean of the adjacent ring
        th_ext = _frozen(np.concatenate([[0.0], theta, [np.pi]]))
        g = np.vstack([np.full(Na, grid[0].mean()), grid, np.full(Na, grid[-1].mean())])
        g = _frozen(np.hstack([g, g[:, :1]]))

        def radial(u):
            th = np.arccos(np.clip(u[:, 2], -1, 1))
            ph = np.mod(np.arctan2(u[:, 1], u[:, 0]), 2 * np.pi) * Na / (2 * np.pi)
            i = np.clip(np.searchsorted(th_ext, th, side="right") - 1, 0, th_ext.size - 2)
            fi = (th - th_ext[i]) / (th_ext[i + 1] - th_ext[i])
            j = np.minimum(np.floor(ph).astype(int), Na - 1)
            fj = ph - j
            top = (1 - fj) * g[i, j] + fj * g[i, j + 1]
            bot = (1 - fj) * g[i + 1, j] + fj * g[i + 1, j + 1]
            return (1 - fi) * top + fi * bot

    else:
        raise DimensionError("grid files support n = 2 and n = 3 only")
    return StarBody(n, radial, positive=vmin > 0, label=label, upper=vmax, lower=vmin)


def save_grid(record: dict, path) -> None:
    Path(path).write_text(json.dumps(record, sort_keys=True) + "\n")


def load_grid(path) -> StarBody:
    return grid_body(json.loads(Path(path).read_text()))
