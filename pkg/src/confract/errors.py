"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its documented exit statuses without a lookup table.
"""

from __future__ import annotations


class ConfractError(Exception):
    exit_code = 1


class ExpressionSyntaxError(ConfractError):
    """Malformed expression text; ``offset`` is the byte offset of the failure."""

    exit_code = 2

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f" (expected {', '.join(repr(e) for e in self.expected)})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class DomainError(ConfractError, ValueError):
    """Argument outside the domain of an operation, or a violated precondition."""

    exit_code = 3


class EvaluationError(DomainError):
    """A function returned a non-finite value where a finite one was required."""

    def __init__(self, message: str, at: float | None = None):
        self.at = at
        super().__init__(message if at is None else f"{message} (at t={at!r})")


class DivergenceError(DomainError):
    """Transform requested outside its region of convergence."""


class LookupFailure(DomainError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class TheoremInapplicableError(DomainError):
    pass


class BoundaryTermError(DomainError):
    pass


class IllConditionedPolesError(DomainError):
    pass


class InconsistentPolesError(DomainError):
    pass


class UnsupportedOrderError(DomainError):
    pass


class AccuracyError(ConfractError, ArithmeticError):
    """A numerical procedure failed to reach its target accuracy."""

    exit_code = 4

    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")


class ContourParameterError(AccuracyError):
    pass


class ConsistencyError(AccuracyError):
    pass


class StabilityError(AccuracyError):
    def __init__(self, message: str, step: int):
        self.step = step
        super().__init__(f"{message} at step {step}")


class VerificationFailure(ConfractError):
    exit_code = 5
