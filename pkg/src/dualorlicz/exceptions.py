"""Exception types raised by the library."""


class DualOrliczError(Exception):
    """Base class for all library errors."""


class DimensionError(DualOrliczError, ValueError):
    pass


class ConstructionError(DualOrliczError, ValueError):
    """A constructor received parameters violating a class invariant."""


class DomainError(DualOrliczError, ValueError):
    """An argument lies outside the domain of a function or operation."""


class DivergenceError(DualOrliczError, RuntimeError):
    """A root bracket or integral failed to close."""


class HypothesisError(DualOrliczError, ValueError):
    """A hypothesis needed to orient an inequality is missing."""
