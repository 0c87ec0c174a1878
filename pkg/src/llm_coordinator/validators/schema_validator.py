"""JSON schemas of the structured replies and their validation."""

from typing import Any, Dict, List, Optional

import jsonschema

AGENT_KEY_PATTERN = "^agent_[0-9]+$"

_ACTION_TERM = {"type": ["string", "integer"]}
_AGENT_MAP = {
    "type": "object",
    "patternProperties": {AGENT_KEY_PATTERN: _ACTION_TERM},
    "additionalProperties": False,
}
_RATIONALES = {"type": "object", "additionalProperties": {"type": "string"}}
_THOUGHTS = {"type": "string"}

SCHEMAS: Dict[str, Dict[str, Any]] = {
    "action_map": {
        "type": "object",
        "required": ["actions"],
        "properties": {
            "thoughts": _THOUGHTS,
            "actions": _AGENT_MAP,
            "rationales": _RATIONALES,
        },
    },
    "suggestion_map": {
        "type": "object",
        "required": ["suggestions"],
        "properties": {
            "thoughts": _THOUGHTS,
            "suggestions": _AGENT_MAP,
            "rationales": _RATIONALES,
        },
    },
    "verdict": {
        "type": "object",
        "required": ["verdict"],
        "properties": {
            "thoughts": _THOUGHTS,
            "verdict": {
                "type": "object",
                "required": ["pass", "issues"],
                "properties": {
                    "pass": {"type": "boolean"},
                    "issues": {"type": "array", "items": {"type": "string"}},
                },
            },
            "feedback": {"type": "string"},
            "suggestions": _AGENT_MAP,
            "rationales": _RATIONALES,
            "notes": {"type": "array", "items": {"type": "string"}},
        },
    },
    "feedback_list": {
        "type": "object",
        "required": ["feedback"],
        "properties": {
            "thoughts": _THOUGHTS,
            "feedback": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["agent", "reason"],
                    "properties": {
                        "agent": {"type": "string", "pattern": AGENT_KEY_PATTERN},
                        "reason": {"type": "string", "minLength": 1},
                    },
                },
            },
        },
    },
    "single_action": {
        "type": "object",
        "required": ["action"],
        "properties": {
            "thoughts": _THOUGHTS,
            "action": _ACTION_TERM,
            "rationale": {"type": "string"},
        },
    },
}

#: Reply kinds whose agent map must cover every agent exactly once.
AGENT_MAP_FIELDS = {"action_map": "actions", "suggestion_map": "suggestions"}


class ValidationResult:
    """Result of schema validation."""

    def __init__(self, is_valid: bool, errors: Optional[List[str]] = None):
        self.is_valid = is_valid
        self.errors = errors or []

    def __repr__(self) -> str:
        return f"<ValidationResult(is_valid={self.is_valid}, errors={len(self.errors)})>"


class SchemaValidator:
    """JSON schema validation with readable error paths."""

    def __init__(self) -> None:
        self.validator_class = jsonschema.Draft7Validator
        self._validators = {kind: self.validator_class(schema) for kind, schema in SCHEMAS.items()}

    def validate(self, data: Any, kind: str) -> ValidationResult:
        """Validate decoded JSON against the schema of reply ``kind``."""
        if kind not in self._validators:
            raise KeyError(f"Unknown reply kind: {kind}")
        errors = sorted(self._validators[kind].iter_errors(data), key=lambda e: list(e.path))
        if not errors:
            return ValidationResult(is_valid=True)
        formatted = []
        for error in errors:
            path = " -> ".join(str(p) for p in error.path) if error.path else "root"
            formatted.append(f"Path '{path}': {error.message}")
        return ValidationResult(is_valid=False, errors=formatted)
