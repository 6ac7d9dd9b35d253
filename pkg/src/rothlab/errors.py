class RothlabError(Exception):
    """Base class for library errors."""


class CapacityError(RothlabError, OverflowError):
    """A fixed-width kernel would overflow."""


class BudgetExceeded(RothlabError):
    """An exhaustive routine was asked to run past its configured size ceiling."""
