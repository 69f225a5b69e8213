"""Exception hierarchy shared by the solver and the CLI."""


class NarrativeEqError(Exception):
    """Base class for all solver errors."""


class InputError(NarrativeEqError, ValueError):
    """Malformed or out-of-range input (bad history, bias, rule parameters...)."""


class ContractViolation(NarrativeEqError):
    """A precondition on a structured argument does not hold."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class ResourceLimitError(NarrativeEqError):
    """A configured size cap would be exceeded."""


class DegenerateCaseError(NarrativeEqError):
    """The requested quantity is undefined for this instance."""


class NumericError(NarrativeEqError, ArithmeticError):
    """Non-finite value in the floating-point pathway."""


class InvariantError(NarrativeEqError, AssertionError):
    """A property guaranteed by the theory failed to hold. Indicates a bug."""
