"""Exception types shared across the toolkit.

Every expected failure derives from :class:`DomainError`; the CLI maps
these to exit code 1 and prints ``<name>: <message>`` to stderr, where
``name`` is the class name.  Anything else escaping to the CLI is a bug.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for expected, user-reportable failures."""

    @property
    def name(self) -> str:
        return type(self).__name__


class WrongDimensions(DomainError):
    pass


class UnknownSymbol(DomainError):
    def __init__(self, row: int, col: int, char: str):
        super().__init__(f"unknown tile symbol {char!r} at row {row}, column {col}")
        self.row = row
        self.col = col
        self.char = char


class KTooLarge(DomainError):
    pass


class SingleCluster(DomainError):
    pass


class SingleClass(DomainError):
    pass


class ParseError(DomainError):
    pass


class MissingField(DomainError):
    pass


class BudgetTooSmall(DomainError):
    pass


class BudgetExhausted(DomainError):
    pass


class PoolEmpty(DomainError):
    pass


class UnknownId(DomainError):
    pass


class AlreadyLabeled(DomainError):
    pass


class YieldTooLow(DomainError):
    """Generate-and-test ran out of attempts; the partial set rides along."""

    def __init__(self, message: str, cpset):
        super().__init__(message)
        self.cpset = cpset


class InsufficientCPs(DomainError):
    pass


class AssemblyFailed(DomainError):
    pass


class BinEmpty(DomainError):
    pass


class TraceTooShort(DomainError):
    pass
