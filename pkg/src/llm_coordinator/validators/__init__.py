"""Validators package initialization."""

from .schema_validator import SCHEMAS, SchemaValidator, ValidationResult
from .structured_parser import GRAMMAR_VERSION, ParseResult, parse_structured, serialize_structured

__all__ = [
    "GRAMMAR_VERSION",
    "SCHEMAS",
    "ParseResult",
    "SchemaValidator",
    "ValidationResult",
    "parse_structured",
    "serialize_structured",
]
