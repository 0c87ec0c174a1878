"""Versioned prompt templates with ``{{name}}`` placeholders."""

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Dict, Mapping, Tuple

from ..errors import UnboundPlaceholder
from .base import PromptMessages

PLACEHOLDER_RE = re.compile(r"\{\{\s*([a-z_][a-z0-9_]*)\s*\}\}")
_HEADER_RE = re.compile(r"^#\s*([a-z_]+)\s*:\s*(.*)$")
_SECTION_RE = re.compile(r"^\[(system|user|assistant)\]\s*$")

EXPLORE_CLAUSE = (
    "You have a proclivity for exploration and prioritise long-term gains: prefer actions "
    "whose outcome is still uncertain when they could reveal a better joint strategy."
)
EXPLOIT_CLAUSE = (
    "You gravitate towards exploitation and emphasise short-term gains: prefer the joint "
    "strategy that has produced the best observed outcome so far."
)


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    version: str
    placeholders: Tuple[str, ...]
    sections: Tuple[Tuple[str, str], ...]

    @property
    def referenced(self) -> Tuple[str, ...]:
        """Placeholders used in the body, sorted."""
        names = set()
        for _, body in self.sections:
            names.update(PLACEHOLDER_RE.findall(body))
        return tuple(sorted(names))


def parse_template(text: str) -> PromptTemplate:
    """Parse a template file: ``# key: value`` headers then ``[speaker]`` sections."""
    headers: Dict[str, str] = {}
    sections = []
    speaker = None
    body: list = []

    for line in text.splitlines():
        section = _SECTION_RE.match(line)
        if section:
            if speaker is not None:
                sections.append((speaker, "\n".join(body).strip("\n")))
            speaker, body = section.group(1), []
            continue
        if speaker is None:
            header = _HEADER_RE.match(line)
            if header:
                headers[header.group(1)] = header.group(2).strip()
            continue
        body.append(line)
    if speaker is not None:
        sections.append((speaker, "\n".join(body).strip("\n")))

    if "name" not in headers or "version" not in headers:
        raise ValueError("template needs '# name:' and '# version:' headers")
    if not sections:
        raise ValueError(f"template '{headers['name']}' has no sections")

    declared = tuple(
        sorted(p.strip() for p in headers.get("placeholders", "").split(",") if p.strip())
    )
    template = PromptTemplate(
        name=headers["name"],
        version=headers["version"],
        placeholders=declared,
        sections=tuple(sections),
    )
    if template.referenced != declared:
        raise ValueError(
            f"template '{template.name}' declares {list(declared)} "
            f"but references {list(template.referenced)}"
        )
    return template


@lru_cache(maxsize=None)
def load_template(name: str) -> PromptTemplate:
    """Load a template shipped in the ``prompts`` package data directory."""
    resource = resources.files("llm_coordinator").joinpath("prompts", f"{name}.txt")
    return parse_template(resource.read_text(encoding="utf-8"))


def instantiate_prompt(template: PromptTemplate, bindings: Mapping[str, Any]) -> PromptMessages:
    """Substitute every placeholder; single pass, so bound values are never re-expanded."""
    missing = [name for name in template.referenced if name not in bindings]
    if missing:
        raise UnboundPlaceholder(template.name, missing)

    def substitute(match: "re.Match[str]") -> str:
        return str(bindings[match.group(1)])

    return tuple(
        (speaker, PLACEHOLDER_RE.sub(substitute, body)) for speaker, body in template.sections
    )


def render_prompt(name: str, bindings: Mapping[str, Any]) -> PromptMessages:
    return instantiate_prompt(load_template(name), bindings)
