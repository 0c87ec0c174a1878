"""Per-trial CSVs, aggregate tables and the printed experiment report."""

import logging
import os
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

import pandas as pd

from ..errors import EmptyInput

logger = logging.getLogger(__name__)

GROUP_COLUMNS = ["method", "env", "size"]
TRIAL_COLUMNS = [
    "method",
    "env",
    "size",
    "seed",
    "success",
    "steps",
    "feedback",
    "prompt_tokens",
    "completion_tokens",
    "trial",
    "failure_reason",
    "internal_retries",
    "external_notes",
    "total_tokens",
    "final_reward",
    "regret",
]
TOKEN_COLUMNS = [
    "method",
    "env",
    "size",
    "seed",
    "role",
    "prompt_tokens",
    "completion_tokens",
    "total_tokens",
]
AGGREGATE_COLUMNS = GROUP_COLUMNS + [
    "trials",
    "successes",
    "success_rate",
    "steps_mean",
    "steps_sd",
    "feedback_mean",
    "feedback_sd",
    "internal_retries_mean",
    "external_notes_mean",
    "prompt_tokens_mean",
    "completion_tokens_mean",
    "total_tokens_mean",
    "final_reward_mean",
]

TRIALS_FILE = "trials.csv"
TOKENS_FILE = "tokens.csv"
AGGREGATE_FILE = "aggregate.csv"
REPORT_FILE = "report.txt"


def trials_frame(records: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    """One row per episode result record."""
    rows = []
    for record in records:
        usage = record.get("token_usage", {})
        prompt = sum(u["prompt_tokens"] for u in usage.values())
        completion = sum(u["completion_tokens"] for u in usage.values())
        rows.append(
            {
                "method": record["method"],
                "env": record["env"],
                "size": record["size"],
                "seed": record["seed"],
                "success": bool(record["success"]),
                "steps": record["steps"],
                "feedback": record["internal_retries"] + record["external_notes"],
                "prompt_tokens": prompt,
                "completion_tokens": completion,
                "trial": record["trial"],
                "failure_reason": record.get("failure_reason") or "",
                "internal_retries": record["internal_retries"],
                "external_notes": record["external_notes"],
                "total_tokens": prompt + completion,
                "final_reward": record.get("final_reward"),
                "regret": record.get("regret"),
            }
        )
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS)


def tokens_frame(records: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    """One row per (episode, role tag)."""
    rows = []
    for record in records:
        for role, usage in sorted(record.get("token_usage", {}).items()):
            rows.append(
                {
                    "method": record["method"],
                    "env": record["env"],
                    "size": record["size"],
                    "seed": record["seed"],
                    "role": role,
                    "prompt_tokens": usage["prompt_tokens"],
                    "completion_tokens": usage["completion_tokens"],
                    "total_tokens": usage["total_tokens"],
                }
            )
    return pd.DataFrame(rows, columns=TOKEN_COLUMNS)


def aggregate_frame(trials: pd.DataFrame) -> pd.DataFrame:
    """Mean and sample standard deviation per (method, env, size).

    A single trial has a standard deviation of 0.0.
    """
    if trials.empty:
        raise EmptyInput("no trial rows to aggregate")
    frame = trials.copy()
    frame["success"] = frame["success"].astype(bool)
    grouped = frame.groupby(GROUP_COLUMNS, sort=True)
    out = grouped.agg(
        trials=("trial", "count"),
        successes=("success", "sum"),
        steps_mean=("steps", "mean"),
        steps_sd=("steps", "std"),
        feedback_mean=("feedback", "mean"),
        feedback_sd=("feedback", "std"),
        internal_retries_mean=("internal_retries", "mean"),
        external_notes_mean=("external_notes", "mean"),
        prompt_tokens_mean=("prompt_tokens", "mean"),
        completion_tokens_mean=("completion_tokens", "mean"),
        total_tokens_mean=("total_tokens", "mean"),
        final_reward_mean=("final_reward", "mean"),
    ).reset_index()
    out["successes"] = out["successes"].astype(int)
    out["success_rate"] = 100.0 * out["successes"] / out["trials"]
    out[["steps_sd", "feedback_sd"]] = out[["steps_sd", "feedback_sd"]].fillna(0.0)
    return out[AGGREGATE_COLUMNS]


def _mean_sd(mean: float, sd: float) -> str:
    return f"{mean:.1f} ({sd:.2f})"


def format_summary(aggregate: pd.DataFrame) -> str:
    """Success, Steps and Feedback per group, ``mean (sd)`` style."""
    table = pd.DataFrame(
        {
            "method": aggregate["method"],
            "env": aggregate["env"],
            "size": aggregate["size"],
            "trials": aggregate["trials"],
            "Success": [f"{rate:.0f}%" for rate in aggregate["success_rate"]],
            "Steps": [_mean_sd(m, s) for m, s in zip(aggregate["steps_mean"], aggregate["steps_sd"])],
            "Feedback": [
                _mean_sd(m, s) for m, s in zip(aggregate["feedback_mean"], aggregate["feedback_sd"])
            ],
            "Internal": [f"{m:.1f}" for m in aggregate["internal_retries_mean"]],
            "External": [f"{m:.1f}" for m in aggregate["external_notes_mean"]],
        }
    )
    return table.to_string(index=False)


def token_breakdown(tokens: pd.DataFrame) -> pd.DataFrame:
    """Token totals per (method, env, size, role)."""
    return (
        tokens.groupby(GROUP_COLUMNS + ["role"], sort=True)[
            ["prompt_tokens", "completion_tokens", "total_tokens"]
        ]
        .sum()
        .reset_index()
    )


def format_report(trials: pd.DataFrame, tokens: pd.DataFrame) -> str:
    """Printed report: the summary table and the per-role token breakdown."""
    aggregate = aggregate_frame(trials)
    sections = ["Summary", format_summary(aggregate), "", "Token usage by role"]
    if tokens.empty:
        sections.append("(no token usage recorded)")
    else:
        sections.append(token_breakdown(tokens).to_string(index=False))
    return "\n".join(sections) + "\n"


def _read_csv(path: str) -> Tuple[str, pd.DataFrame]:
    frame = pd.read_csv(path, keep_default_na=False, na_values=[""])
    kind = "tokens" if "role" in frame.columns else "trials"
    return kind, frame


def load_frames(paths: Sequence[str]) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Trial and token rows from CSV files or directories holding them.

    Raises:
        EmptyInput: no trial rows found
    """
    trials: List[pd.DataFrame] = []
    tokens: List[pd.DataFrame] = []
    for path in paths:
        if os.path.isdir(path):
            files = [os.path.join(path, name) for name in (TRIALS_FILE, TOKENS_FILE)]
            files = [f for f in files if os.path.exists(f)]
        else:
            files = [path]
        for file_path in files:
            kind, frame = _read_csv(file_path)
            (tokens if kind == "tokens" else trials).append(frame)
            logger.debug(f"Read {len(frame)} {kind} row(s) from {file_path}")

    trial_rows = [f for f in trials if not f.empty]
    if not trial_rows:
        raise EmptyInput("no trial rows in " + ", ".join(paths))
    trial_frame = pd.concat(trial_rows, ignore_index=True)
    trial_frame["success"] = trial_frame["success"].map(
        lambda v: v if isinstance(v, bool) else str(v).strip().lower() == "true"
    )
    token_rows = [f for f in tokens if not f.empty]
    token_frame = (
        pd.concat(token_rows, ignore_index=True) if token_rows else pd.DataFrame(columns=TOKEN_COLUMNS)
    )
    return trial_frame, token_frame


def build_report(paths: Sequence[str]) -> str:
    trials, tokens = load_frames(paths)
    return format_report(trials, tokens)


class ReportExporter:
    """Writes the CSV artifacts and the report of a batch."""

    def __init__(self, output_dir: str):
        """Initialize exporter.

        Args:
            output_dir: Directory receiving the CSV files and the report
        """
        self.output_dir = output_dir

    def export(self, records: Sequence[Mapping[str, Any]]) -> Dict[str, str]:
        """Write trials, tokens, aggregate and report files.

        Args:
            records: Episode result records

        Returns:
            Paths of the written files by kind
        """
        if not records:
            raise EmptyInput("no episode results to export")
        os.makedirs(self.output_dir, exist_ok=True)
        trials = trials_frame(records)
        tokens = tokens_frame(records)
        paths = {
            "trials": os.path.join(self.output_dir, TRIALS_FILE),
            "tokens": os.path.join(self.output_dir, TOKENS_FILE),
            "aggregate": os.path.join(self.output_dir, AGGREGATE_FILE),
            "report": os.path.join(self.output_dir, REPORT_FILE),
        }
        trials.to_csv(paths["trials"], index=False)
        tokens.to_csv(paths["tokens"], index=False)
        aggregate_frame(trials).to_csv(paths["aggregate"], index=False)
        with open(paths["report"], "w", encoding="utf-8") as f:
            f.write(format_report(trials, tokens))
        logger.info(f"Exported {len(trials)} trial row(s) to {self.output_dir}")
        return paths
