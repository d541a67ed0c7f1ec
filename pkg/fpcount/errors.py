"""
Error types raised by fpcount services

Every error carries a short ``kind`` that the CLI prints as ``error:<kind>:<message>``.
"""


class FrobeniusError(Exception):
    kind = "internal"


class CapacityError(FrobeniusError):
    """A limit, table size or evaluation cost bound was exceeded."""
    kind = "capacity"


class DomainError(FrobeniusError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""
    kind = "domain"


class NotCoprimeError(DomainError):
    kind = "not-coprime"


class OrderingError(DomainError):
    kind = "ordering"


class OutputError(FrobeniusError):
    kind = "io"
