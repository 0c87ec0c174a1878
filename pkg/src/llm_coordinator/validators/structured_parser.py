"""Extraction of structured blocks from free-form model output."""

import json
import logging
import re
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from ..errors import GrammarError
from ..llm.base import ThoughtExtractor
from .schema_validator import AGENT_MAP_FIELDS, SchemaValidator

logger = logging.getLogger(__name__)

#: Version of the reply grammar; stored in transcript headers.
GRAMMAR_VERSION = "1.0"

_FENCE_RE = re.compile(r"```(?:json|JSON)?[ \t]*\n(.*?)```", re.DOTALL)
_decoder = json.JSONDecoder()
_validator = SchemaValidator()


@dataclass(frozen=True)
class ParseResult:
    """Either a parsed value or the GrammarError explaining why there is none."""

    value: Optional[Dict[str, Any]] = None
    error: Optional[GrammarError] = None
    thoughts: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _candidates(text: str) -> Iterator[Tuple[Any, Tuple[int, int]]]:
    """Decoded JSON objects in order of where they start in the text.

    Braces inside a fenced block that decoded are not scanned again; a
    fence whose body is not plain JSON is searched like prose.
    """
    found: List[Tuple[int, Any, Tuple[int, int]]] = []
    fenced: List[Tuple[int, int]] = []
    for match in _FENCE_RE.finditer(text):
        try:
            value = json.loads(match.group(1).strip())
        except json.JSONDecodeError:
            continue
        span = (match.start(), match.end())
        fenced.append(span)
        found.append((span[0], value, span))

    position = 0
    while True:
        start = text.find("{", position)
        if start < 0:
            break
        enclosing = next((s for s in fenced if s[0] <= start < s[1]), None)
        if enclosing is not None:
            position = enclosing[1]
            continue
        try:
            value, end = _decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            position = start + 1
            continue
        found.append((start, value, (start, end)))
        position = end

    for _, value, span in sorted(found, key=lambda item: item[0]):
        yield value, span


def _check_agents(
    value: Dict[str, Any], kind: str, agents: Optional[Sequence[str]]
) -> Optional[str]:
    field = AGENT_MAP_FIELDS.get(kind)
    if field is None or agents is None:
        return None
    present = set(value[field])
    missing = [a for a in agents if a not in present]
    if missing:
        return f"missing agent: {', '.join(missing)}"
    extra = sorted(present - set(agents))
    if extra:
        return f"unknown agent: {', '.join(extra)}"
    return None


def parse_structured(
    response_text: str, kind: str, agents: Optional[Sequence[str]] = None
) -> ParseResult:
    """Parse the first block of ``response_text`` conforming to ``kind``.

    Never raises on malformed input: every input yields a value or a
    GrammarError. When ``agents`` is given, agent maps must name exactly
    those agents.
    """
    text, thoughts = ThoughtExtractor.extract(response_text or "")
    first_error: Optional[GrammarError] = None

    for value, span in _candidates(text):
        validation = _validator.validate(value, kind)
        if not validation.is_valid:
            first_error = first_error or GrammarError(
                f"{kind} does not match schema: {validation.errors[0]}", span
            )
            continue
        agent_problem = _check_agents(value, kind, agents)
        if agent_problem:
            first_error = first_error or GrammarError(agent_problem, span)
            continue
        if thoughts is None and isinstance(value.get("thoughts"), str):
            thoughts = value["thoughts"]
        return ParseResult(value=value, thoughts=thoughts)

    error = first_error or GrammarError(f"no structured {kind} block found")
    logger.debug(f"parse_structured({kind}) failed: {error.reason}")
    return ParseResult(error=error, thoughts=thoughts)


def serialize_structured(value: Dict[str, Any]) -> str:
    """Canonical fenced block for a structured value."""
    return "```json\n" + json.dumps(value, sort_keys=True, indent=2) + "\n```"
