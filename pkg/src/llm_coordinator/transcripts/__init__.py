"""Episode transcripts."""

from .store import (
    SCHEMA_VERSION,
    Transcript,
    TranscriptWriter,
    load_transcript,
    parse_transcript,
    stable_json_dumps,
)

__all__ = [
    "SCHEMA_VERSION",
    "Transcript",
    "TranscriptWriter",
    "load_transcript",
    "parse_transcript",
    "stable_json_dumps",
]
