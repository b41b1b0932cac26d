"""Exception types raised across the package."""


class StokesDiracError(Exception):
    """Base class for all package errors."""


class InvalidArgument(StokesDiracError, ValueError):
    """Bad degree, size, or geometry parameter."""


class TypeMismatch(StokesDiracError, TypeError):
    """Cochains or maps living on incompatible spaces."""


class SingularOperator(StokesDiracError, ArithmeticError):
    """An operator that must be inverted has a zero diagonal entry."""


class WellCenterednessError(StokesDiracError, ValueError):
    """A top simplex does not strictly contain its circumcenter."""


class ConsistencyError(StokesDiracError, AssertionError):
    """Two assemblies of the same operator disagree (a sign-table bug)."""

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class IntegratorError(StokesDiracError, RuntimeError):
    """The implicit midpoint system could not be factorized or solved."""


class ConfigError(StokesDiracError, ValueError):
    """Simulation config failed schema validation."""

    def __init__(self, message, path=""):
        super().__init__(f"config field {path}: {message}" if path else message)
        self.path = path
