from __future__ import annotations


class InvalidOrderError(ValueError):
    """Step number, derivative order or smoothing level outside its range."""


class DomainError(ValueError):
    """Argument outside the domain where a closed form is valid."""


class SmoothingError(DomainError):
    """Too few integrations to make the smoothed source vanish at zero."""


class QuadratureError(RuntimeError):
    """Quadrature could not reach the requested accuracy."""


class DimensionError(ValueError):
    """Array shapes do not match."""


class SolverError(RuntimeError):
    """Linear solve failed while time stepping."""


class OracleDomainError(ValueError):
    """Reference function evaluated outside its trusted range."""


class UsageError(ValueError):
    """Malformed command line or experiment plan."""
