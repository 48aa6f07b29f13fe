class UsageError(ValueError):
    """Bad arguments: mismatched primes, digits out of range, malformed files."""


class DomainError(ValueError):
    """A point or object lies outside the domain an operation is defined on."""


class BudgetExceeded(RuntimeError):
    """A state or size budget ran out before a construction finished."""
