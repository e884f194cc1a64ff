"""Exception hierarchy shared across the package."""


class PathlensError(Exception):
    """Base class for all pathlens errors."""


class InputError(PathlensError):
    """Invalid data, moments, or configuration (CLI exit code 2)."""


class InfeasibleError(PathlensError):
    """No path satisfies the requested constraints (CLI exit code 3)."""


class BudgetError(PathlensError):
    """Enumeration would exceed the configured candidate budget (CLI exit code 3)."""
