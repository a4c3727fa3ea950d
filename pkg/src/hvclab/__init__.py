"""Desk-scale laboratory for the layered long-code reduction to hypergraph vertex cover."""

from .errors import (
    BudgetExhausted,
    DecodeError,
    DomainError,
    HvcError,
    ParseError,
    PreconditionError,
    PropertyViolation,
    ResourceError,
    SizeError,
)

__all__ = [
    "BudgetExhausted",
    "DecodeError",
    "DomainError",
    "HvcError",
    "ParseError",
    "PreconditionError",
    "PropertyViolation",
    "ResourceError",
    "SizeError",
]

__version__ = "0.1.0"
