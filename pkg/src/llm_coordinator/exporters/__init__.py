"""Exporters package initialization."""

from .report_exporter import (
    AGGREGATE_COLUMNS,
    TOKEN_COLUMNS,
    TRIAL_COLUMNS,
    ReportExporter,
    aggregate_frame,
    build_report,
    format_report,
    load_frames,
    token_breakdown,
    tokens_frame,
    trials_frame,
)

__all__ = [
    "AGGREGATE_COLUMNS",
    "TOKEN_COLUMNS",
    "TRIAL_COLUMNS",
    "ReportExporter",
    "aggregate_frame",
    "build_report",
    "format_report",
    "load_frames",
    "token_breakdown",
    "tokens_frame",
    "trials_frame",
]
