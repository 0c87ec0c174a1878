"""Append-only JSON Lines transcripts of episodes."""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, TextIO

from ..errors import TranscriptTruncated, VersionMismatch
from ..llm.base import ChatExchange
from ..validators.structured_parser import GRAMMAR_VERSION

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
RECORD_TYPES = ("header", "exchange", "event", "transition", "result")


def stable_json_dumps(obj: Any) -> str:
    """Compact JSON with sorted keys; the only serialization used for records."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class TranscriptWriter:
    """Writes transcript records as they happen.

    Without a path the records are only kept in memory (``records``), which
    is what tests and unrecorded runs use.
    """

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.records: List[Dict[str, Any]] = []
        self._fp: Optional[TextIO] = None
        if path:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            self._fp = open(path, "w", encoding="utf-8")

    def _append(self, record: Dict[str, Any]) -> None:
        self.records.append(record)
        if self._fp is not None:
            self._fp.write(stable_json_dumps(record) + "\n")
            self._fp.flush()

    def write_header(
        self,
        run_config: Dict[str, Any],
        scenario: Dict[str, Any],
        scenario_hash: str,
        seed: int,
        trial: int,
    ) -> None:
        self._append(
            {
                "type": "header",
                "schema_version": SCHEMA_VERSION,
                "grammar_version": GRAMMAR_VERSION,
                "run_config": run_config,
                "scenario": scenario,
                "scenario_hash": scenario_hash,
                "seed": seed,
                "trial": trial,
            }
        )

    def record_exchange(self, exchange: ChatExchange) -> None:
        self._append({"type": "exchange", **exchange.to_record()})

    def record_event(self, kind: str, step: int, after_seq: int, **data: Any) -> None:
        """Loop event; ``after_seq`` is the number of calls started before it."""
        self._append({"type": "event", "kind": kind, "step": step, "after_seq": after_seq, "data": data})

    def record_transition(
        self,
        step: int,
        state_text: str,
        actions: Dict[str, Any],
        rewards: Dict[str, float],
        next_state_text: str,
    ) -> None:
        self._append(
            {
                "type": "transition",
                "step": step,
                "state": state_text,
                "actions": actions,
                "rewards": rewards,
                "next_state": next_state_text,
            }
        )

    def write_result(self, result: Dict[str, Any]) -> None:
        self._append({"type": "result", "result": result})

    def close(self) -> None:
        if self._fp is not None:
            self._fp.close()
            self._fp = None

    def __enter__(self) -> "TranscriptWriter":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


@dataclass
class Transcript:
    header: Dict[str, Any]
    exchanges: List[ChatExchange] = field(default_factory=list)
    events: List[Dict[str, Any]] = field(default_factory=list)
    transitions: List[Dict[str, Any]] = field(default_factory=list)
    result: Dict[str, Any] = field(default_factory=dict)


def parse_transcript(lines: List[str], source: str = "<memory>") -> Transcript:
    """Parse transcript lines, checking versions and the closing record."""
    records = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            if number == len(lines):
                raise TranscriptTruncated(f"{source}: last record is incomplete") from e
            raise TranscriptTruncated(f"{source}: line {number} is not valid JSON") from e

    if not records or records[0].get("type") != "header":
        raise TranscriptTruncated(f"{source}: missing header record")
    header = records[0]
    if header.get("schema_version") != SCHEMA_VERSION:
        raise VersionMismatch(
            f"{source}: schema version {header.get('schema_version')!r}, expected {SCHEMA_VERSION!r}"
        )
    if header.get("grammar_version") != GRAMMAR_VERSION:
        raise VersionMismatch(
            f"{source}: grammar version {header.get('grammar_version')!r}, "
            f"expected {GRAMMAR_VERSION!r}"
        )
    if records[-1].get("type") != "result":
        raise TranscriptTruncated(f"{source}: no closing result record")

    transcript = Transcript(header=header, result=records[-1]["result"])
    for record in records[1:-1]:
        kind = record.get("type")
        if kind == "exchange":
            transcript.exchanges.append(ChatExchange.from_record(record))
        elif kind == "event":
            transcript.events.append(record)
        elif kind == "transition":
            transcript.transitions.append(record)
        else:
            raise TranscriptTruncated(f"{source}: unexpected {kind!r} record before result")
    transcript.exchanges.sort(key=lambda e: e.seq)
    return transcript


def load_transcript(path: str) -> Transcript:
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return parse_transcript(lines, source=path)
