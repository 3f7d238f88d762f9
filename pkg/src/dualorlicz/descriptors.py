"""String descriptors for bodies, support functions and unary functions.

Shells and scenario files share one syntax:

* bodies: ``ball:n:r``, ``fourier:base:k:a[:k:a...]``, ``ellipsoid:d1,...,dn``,
  ``random:n:seed``, ``grid:path``
* support functions: ``ball:n:r``, ``ellipsoid:d1,...,dn``
* unary functions for mixed volumes: any registry descriptor, ``log``, or
  ``p:<exponent>`` (a bare power, any sign)
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConstructionError, DomainError
from .geometry import (
    ConvexBodySupport,
    StarBody,
    ball_support,
    ellipsoid,
    ellipsoid_support,
    load_grid,
    make_ball,
    make_fourier_star,
    random_star,
)
from .orlicz import OrliczFunction, parse_phi, power_function, psi_power_function

__all__ = ["parse_body", "parse_support", "parse_unary"]


def _floats(parts, desc):
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise DomainError(f"bad number in descriptor {desc!r}") from None


def parse_body(desc: str) -> StarBody:
    kind, _, rest = desc.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "ball" and len(parts) == 2:
            n, r = _floats(parts, desc)
            return make_ball(int(n), r)
        if kind == "fourier" and len(parts) >= 1 and len(parts) % 2 == 1:
            vals = _floats(parts, desc)
            amps = [(int(vals[i]), vals[i + 1]) for i in range(1, len(vals), 2)]
            return make_fourier_star(vals[0], amps)
        if kind == "ellipsoid" and len(parts) == 1:
            return ellipsoid(_floats(parts[0].split(","), desc))
        if kind == "random" and len(parts) == 2:
            n, seed = (int(v) for v in _floats(parts, desc))
            return random_star(n, np.random.default_rng(seed))
        if kind == "grid" and rest:
            try:
                return load_grid(rest)
            except (OSError, ValueError, KeyError) as exc:
                raise DomainError(f"cannot read grid file {rest!r}: {exc}") from None
    except ConstructionError as exc:
        raise DomainError(str(exc)) from None
    raise DomainError(f"unknown body descriptor {desc!r}")


def parse_support(desc: str) -> ConvexBodySupport:
    kind, _, rest = desc.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "ball" and len(parts) == 2:
            n, r = _floats(parts, desc)
            return ball_support(int(n), r)
        if kind == "ellipsoid" and len(parts) == 1:
            return ellipsoid_support(np.diag(_floats(parts[0].split(","), desc)))
    except ConstructionError as exc:
        raise DomainError(str(exc)) from None
    raise DomainError(f"unknown support descriptor {desc!r}")


def parse_unary(desc: str, dimension: int):
    """Unary function for mixed volumes and inequality checks."""
    if desc == "log":
        return np.log
    if desc.startswith("p:"):
        (p,) = _floats([desc[2:]], desc)
        try:
            if p > 0:
                return power_function(p, 1, dimension)
            if p < 0:
                return psi_power_function(p, 1, dimension)
        except ConstructionError as exc:
            raise DomainError(str(exc)) from None
        raise DomainError("p:0 is not an Orlicz function")
    phi = parse_phi(desc, arity=1, dimension=dimension)
    if not isinstance(phi, OrliczFunction):
        raise DomainError(f"{desc!r} is not a unary function")
    return phi
