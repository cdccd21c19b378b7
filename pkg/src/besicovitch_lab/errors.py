"""Exception types shared across the package."""


class BesicovitchLabError(Exception):
    """Base class for all package errors."""


class GeometryError(BesicovitchLabError):
    """Invalid geometric input (non-convex vertices, bad rectangle, ...)."""


class ToleranceUnachievable(BesicovitchLabError):
    """A certified computation ran out of resolution budget before reaching tol."""

    def __init__(self, message, achieved=None, budget=None):
        super().__init__(message)
        self.achieved = achieved
        self.budget = budget


class ConstructionFailure(BesicovitchLabError):
    """A rectangle-family construction violated one of its defining properties."""

    def __init__(self, message, violating_pair=None):
        super().__init__(message)
        self.violating_pair = violating_pair


class DirectionMismatch(BesicovitchLabError):
    """Requested directions cannot be matched to a family's available ones."""


class DegenerateGradient(BesicovitchLabError):
    """The defining function's gradient (or in-slice gradient) vanishes."""


class ZeroCurvature(BesicovitchLabError):
    """A slice curve fails the nonzero-curvature hypothesis."""


class CoveringFailure(BesicovitchLabError):
    """The sized covering rectangle misses a translated input rectangle."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DisjointnessFailure(BesicovitchLabError):
    """A rectangle family that must be pairwise disjoint is not."""

    def __init__(self, message, violating_pair=None):
        super().__init__(message)
        self.violating_pair = violating_pair


class StripEmpty(BesicovitchLabError):
    """The strip intersection needed to place the cube Q is empty or too thin."""


class UnboundedValue(BesicovitchLabError):
    """A principal-value expression is evaluated exactly on a critical line."""


class ConfigError(BesicovitchLabError):
    """Invalid run configuration."""
