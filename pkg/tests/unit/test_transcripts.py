"""Unit tests for transcript writing and parsing."""

import json

import pytest

from llm_coordinator.errors import TranscriptTruncated, VersionMismatch
from llm_coordinator.llm import ChatExchange, TokenUsage
from llm_coordinator.transcripts import (
    SCHEMA_VERSION,
    TranscriptWriter,
    load_transcript,
    parse_transcript,
    stable_json_dumps,
)


def exchange(seq: int, role_tag: str = "assessor") -> ChatExchange:
    return ChatExchange(
        seq=seq,
        role_tag=role_tag,
        prompt_messages=(("user", f"prompt {seq}"),),
        response_text=f"reply {seq}",
        usage=TokenUsage.of(2, 2),
        latency_ms=0,
        backend_id="scripted",
    )


def write_episode(writer: TranscriptWriter) -> None:
    writer.write_header({"method": "actor_critic"}, {"env": "gs"}, "abc123", seed=7, trial=1)
    writer.record_event("step_start", step=0, after_seq=0)
    writer.record_exchange(exchange(1, "critic_exploit"))
    writer.record_exchange(exchange(0, "critic_explore"))
    writer.record_transition(0, "round 0", {"agent_0": 1}, {"agent_0": 0.5}, "round 1")
    writer.write_result({"success": True, "steps": 1})


class TestStableJson:
    def test_sorted_and_compact(self):
        assert stable_json_dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


class TestTranscriptWriter:
    """Test record writing."""

    def test_in_memory_only(self):
        writer = TranscriptWriter()
        write_episode(writer)

        assert [r["type"] for r in writer.records] == [
            "header",
            "event",
            "exchange",
            "exchange",
            "transition",
            "result",
        ]
        assert writer.records[0]["schema_version"] == SCHEMA_VERSION

    def test_file_round_trip(self, temp_output_dir):
        path = str(temp_output_dir / "nested" / "episode.jsonl")
        with TranscriptWriter(path) as writer:
            write_episode(writer)

        transcript = load_transcript(path)

        assert transcript.header["seed"] == 7
        assert [e.seq for e in transcript.exchanges] == [0, 1]
        assert transcript.exchanges[0] == exchange(0, "critic_explore")
        assert transcript.events[0]["kind"] == "step_start"
        assert transcript.transitions[0]["rewards"] == {"agent_0": 0.5}
        assert transcript.result == {"success": True, "steps": 1}


class TestParseTranscript:
    """Test truncation and version checks."""

    def _lines(self):
        writer = TranscriptWriter()
        write_episode(writer)
        return [stable_json_dumps(r) for r in writer.records]

    def test_missing_result(self):
        with pytest.raises(TranscriptTruncated):
            parse_transcript(self._lines()[:-1])

    def test_partial_last_line(self):
        lines = self._lines()
        lines[-1] = lines[-1][:10]

        with pytest.raises(TranscriptTruncated) as exc_info:
            parse_transcript(lines)
        assert "incomplete" in str(exc_info.value)

    def test_missing_header(self):
        with pytest.raises(TranscriptTruncated):
            parse_transcript(self._lines()[1:])

    @pytest.mark.parametrize("field", ["schema_version", "grammar_version"])
    def test_version_mismatch(self, field):
        lines = self._lines()
        header = json.loads(lines[0])
        header[field] = "0.1"
        lines[0] = stable_json_dumps(header)

        with pytest.raises(VersionMismatch):
            parse_transcript(lines)

    def test_blank_lines_ignored(self):
        lines = self._lines()
        lines.insert(2, "")

        assert len(parse_transcript(lines).exchanges) == 2
