"""Exception hierarchy shared across the package."""


class HullError(Exception):
    """Base class for all package errors."""


class DomainError(HullError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(HullError, ValueError):
    """A simulation or suite configuration is invalid (bad dt, eps, sizes, bindings)."""


class BudgetError(HullError, RuntimeError):
    """A step or rejection budget was exhausted before the target event occurred."""


class StructureError(HullError, RuntimeError):
    """An internal structural invariant was violated (signals a bug, not bad input)."""
