"""Exception types raised by hgsg."""


class HGSGError(Exception):
    """Base class for all errors raised by this package."""


class LatticeRangeError(HGSGError, ValueError):
    """A level, position or dimension lies outside its valid range."""


class DegreeError(HGSGError, ValueError):
    """A basis degree was requested that the level cannot support."""


class ShapeError(HGSGError, ValueError):
    """An input vector or array has the wrong dimension."""


class AdmissibilityError(HGSGError):
    """An index or point was created without its required ancestors."""


class DuplicatePointError(HGSGError):
    """A lattice point was inserted twice."""


class StateError(HGSGError):
    """The grid state does not hold what the operation needs."""


class ConfigError(HGSGError, ValueError):
    """Invalid experiment or driver configuration.

    Parameters
    ----------
    field : str
        Name of the offending configuration field.
    message : str
        Human readable description.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class IntegralUndefinedError(HGSGError, ZeroDivisionError):
    """The relative integral error is undefined for a zero reference."""


class EvaluationError(HGSGError):
    """The user function failed at a specific grid point."""

    def __init__(self, point, x, cause):
        self.point = point
        self.x = x
        super().__init__(f"function evaluation failed at x={list(x)}: {cause!r}")
