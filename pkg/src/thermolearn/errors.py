"""Semantic exception hierarchy shared by every module.

The CLI maps these onto process exit codes, so the distinction between
"your input is malformed" and "the computation could not finish" matters.
"""


class ThermolearnError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ThermolearnError, ValueError):
    """Malformed or out-of-contract input (bad shapes, ranges, sums)."""


class DomainError(ThermolearnError, ValueError):
    """Mathematically undefined request (support mismatch, zero variance)."""


class CapacityError(ValidationError):
    """Exact enumeration requested beyond the guarded problem size."""


class DegenerateSplitError(ThermolearnError, ValueError):
    """A boosting reweighting step has no mass to work with."""


class NumericalError(ThermolearnError, RuntimeError):
    """A computation finished outside its numerical contract."""


class ConvergenceError(NumericalError):
    """An iterative procedure cannot reach its target."""
