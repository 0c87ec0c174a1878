"""Unit tests for trial tables, aggregation and the printed report."""

import pandas as pd
import pytest

from llm_coordinator.errors import EmptyInput
from llm_coordinator.exporters import (
    AGGREGATE_COLUMNS,
    TRIAL_COLUMNS,
    ReportExporter,
    aggregate_frame,
    build_report,
    format_report,
    load_frames,
    tokens_frame,
    trials_frame,
)


def record(seed: int, steps: int, success: bool = True, method: str = "actor_critic", **extra):
    base = {
        "method": method,
        "env": "grid-easy",
        "size": "2x2",
        "seed": seed,
        "trial": seed,
        "success": success,
        "failure_reason": None if success else "StepLimit",
        "steps": steps,
        "internal_retries": 1,
        "external_notes": steps % 2,
        "token_usage": {
            "critic_explore": {"prompt_tokens": 10, "completion_tokens": 2, "total_tokens": 12},
            "assessor": {"prompt_tokens": 5, "completion_tokens": 1, "total_tokens": 6},
        },
        "final_reward": 1.0,
        "regret": None,
    }
    base.update(extra)
    return base


RECORDS = [record(0, 4), record(1, 6), record(2, 8, success=False), record(0, 3, method="debate")]


class TestFrames:
    """Test the per-trial and per-role tables."""

    def test_trials_columns_and_feedback(self):
        trials = trials_frame(RECORDS)

        assert list(trials.columns) == TRIAL_COLUMNS
        assert list(trials.columns[:9]) == [
            "method",
            "env",
            "size",
            "seed",
            "success",
            "steps",
            "feedback",
            "prompt_tokens",
            "completion_tokens",
        ]
        assert trials["feedback"].tolist() == [1, 1, 1, 2]
        assert trials["prompt_tokens"].tolist() == [15] * 4
        assert trials.loc[2, "failure_reason"] == "StepLimit"

    def test_tokens_one_row_per_role(self):
        tokens = tokens_frame(RECORDS[:1])

        assert tokens["role"].tolist() == ["assessor", "critic_explore"]
        assert tokens["total_tokens"].sum() == 18


class TestAggregate:
    def test_mean_and_sample_sd(self):
        aggregate = aggregate_frame(trials_frame(RECORDS)).set_index("method")

        assert list(aggregate.reset_index().columns) == AGGREGATE_COLUMNS
        row = aggregate.loc["actor_critic"]
        assert row["trials"] == 3
        assert row["successes"] == 2
        assert row["success_rate"] == pytest.approx(200 / 3)
        assert row["steps_mean"] == 6.0
        assert row["steps_sd"] == pytest.approx(2.0)

    def test_single_trial_has_zero_sd(self):
        aggregate = aggregate_frame(trials_frame(RECORDS)).set_index("method")

        assert aggregate.loc["debate", "steps_sd"] == 0.0
        assert aggregate.loc["debate", "feedback_sd"] == 0.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            aggregate_frame(pd.DataFrame(columns=TRIAL_COLUMNS))


class TestReport:
    def test_report_sections(self):
        text = format_report(trials_frame(RECORDS), tokens_frame(RECORDS))

        assert text.startswith("Summary\n")
        assert "6.0 (2.00)" in text
        assert "67%" in text
        assert "Token usage by role" in text

    def test_report_without_tokens(self):
        text = format_report(trials_frame(RECORDS), tokens_frame([]))
        assert "(no token usage recorded)" in text

    def test_export_then_rebuild(self, temp_output_dir):
        """Reading the exported CSVs back gives the same report."""
        paths = ReportExporter(str(temp_output_dir)).export(RECORDS)

        assert set(paths) == {"trials", "tokens", "aggregate", "report"}
        assert len(pd.read_csv(paths["trials"])) == 4
        with open(paths["report"], encoding="utf-8") as f:
            assert build_report([str(temp_output_dir)]) == f.read()

    def test_load_frames_from_file(self, temp_output_dir):
        paths = ReportExporter(str(temp_output_dir)).export(RECORDS)

        trials, tokens = load_frames([paths["trials"]])

        assert trials["success"].tolist() == [True, True, False, True]
        assert tokens.empty

    def test_no_rows(self, temp_output_dir):
        with pytest.raises(EmptyInput):
            load_frames([str(temp_output_dir)])
        with pytest.raises(EmptyInput):
            ReportExporter(str(temp_output_dir)).export([])
