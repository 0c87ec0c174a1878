"""Episode processing: policies, the engine and the batch runner."""

from .baselines import build_policy
from .batch import BatchReport, run_batch, transcript_name
from .engine import EpisodeEngine, build_environment, token_usage_from_exchanges
from .manager import BACKEND_KINDS, BackendManager
from .models import (
    BASELINE_METHODS,
    METHOD_ALIASES,
    EpisodeResult,
    FailureReason,
    Method,
    RunConfig,
    parse_method,
    parse_size,
)

__all__ = [
    "BACKEND_KINDS",
    "BASELINE_METHODS",
    "BackendManager",
    "BatchReport",
    "EpisodeEngine",
    "EpisodeResult",
    "FailureReason",
    "METHOD_ALIASES",
    "Method",
    "RunConfig",
    "build_environment",
    "build_policy",
    "parse_method",
    "parse_size",
    "run_batch",
    "token_usage_from_exchanges",
    "transcript_name",
]
