"""Run configuration and episode result models."""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from llm_coordinator.core.types import AgentId, JointAction
from llm_coordinator.environments import ENVIRONMENT_NAMES
from llm_coordinator.llm.base import TokenUsage


class Method(str, Enum):
    """Coordination method of a run."""
    ACTOR_CRITIC = "actor_critic"
    DEBATE = "debate"
    ONLY_EXPLORE = "only_explore"
    ONLY_EXPLOIT = "only_exploit"
    DECENTRALIZED = "decentralized"
    SCRIPTED_GREEDY = "scripted_greedy"


#: Alternative method names accepted on input; records always use the canonical value.
METHOD_ALIASES = {"llamac": Method.ACTOR_CRITIC}


def parse_method(value: Any) -> Any:
    """Canonical :class:`Method` for an alias, anything else unchanged."""
    if isinstance(value, str) and value in METHOD_ALIASES:
        return METHOD_ALIASES[value]
    return value


BASELINE_METHODS = (
    Method.DEBATE,
    Method.ONLY_EXPLORE,
    Method.ONLY_EXPLOIT,
    Method.DECENTRALIZED,
)


class FailureReason(str, Enum):
    """Why an episode did not succeed; exactly one per failed episode."""
    GRAMMAR_LIMIT = "GrammarLimit"
    CONTEXT_LENGTH = "ContextLength"
    STEP_LIMIT = "StepLimit"
    INTERNAL_EXHAUSTED = "InternalExhausted"
    TRANSPORT = "Transport"


_SIZE_RE = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


def parse_size(text: str) -> Tuple[int, int]:
    """``"2x4"`` -> ``(2, 4)``; raises ValueError otherwise."""
    match = _SIZE_RE.match(text)
    if not match:
        raise ValueError(f"grid size must look like RxC, got {text!r}")
    rows, cols = int(match.group(1)), int(match.group(2))
    if rows < 1 or cols < 1:
        raise ValueError("grid size must be at least 1x1")
    return rows, cols


class RunConfig(BaseModel):
    """Validated parameters of one experiment (all trials share them)."""

    model_config = ConfigDict(frozen=True, use_enum_values=False)

    method: Method = Method.ACTOR_CRITIC
    env: str = Field(default="gs", description="gs, grid-easy or grid-hard")
    agents: int = Field(default=3, ge=1, description="Number of gs agents")
    rows: int = Field(default=2, ge=1, description="Grid rows")
    cols: int = Field(default=2, ge=1, description="Grid columns")
    n_objects: Optional[int] = Field(default=None, ge=1)
    mu: Optional[float] = Field(default=None, gt=0)
    sigma: Optional[float] = Field(default=None, gt=0)
    rounds: int = Field(default=20, ge=1, description="gs decision rounds")
    max_steps: Optional[int] = Field(default=None, ge=0, description="Horizon T; environment default when unset")
    if_limit: int = Field(default=3, ge=1)
    ef_limit: int = Field(default=3, ge=1)
    mem_window: Optional[int] = Field(default=None, ge=1)
    grammar_reask_limit: int = Field(default=3, ge=1)
    debate_rounds: int = Field(default=2, ge=1)
    seed: int = 0
    trials: int = Field(default=1, ge=1)
    backend: Literal["http", "scripted", "replay"] = "scripted"
    provider: Optional[str] = None
    scenario_path: Optional[str] = None

    @field_validator("method", mode="before")
    @classmethod
    def _resolve_alias(cls, value: Any) -> Any:
        return parse_method(value)

    @field_validator("env")
    @classmethod
    def _known_env(cls, value: str) -> str:
        if value not in ENVIRONMENT_NAMES:
            raise ValueError(f"env must be one of {', '.join(ENVIRONMENT_NAMES)}")
        return value

    @model_validator(mode="after")
    def _check_combination(self) -> "RunConfig":
        if self.env == "gs" and self.scenario_path:
            raise ValueError("scenario files describe grid instances only")
        return self

    @property
    def is_grid(self) -> bool:
        return self.env != "gs"

    @property
    def size_label(self) -> str:
        return f"{self.rows}x{self.cols}" if self.is_grid else f"n={self.agents}"

    def to_record(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


@dataclass
class StepDecision:
    """Joint action chosen for one step and what it cost in feedback."""
    joint: JointAction
    internal_retries: int = 0
    external_notes: int = 0
    fallbacks: List[AgentId] = field(default_factory=list)
    notes: Tuple[str, ...] = ()


@dataclass
class EpisodeResult:
    """Outcome of one episode."""
    method: str
    env: str
    size: str
    seed: int
    trial: int
    success: bool
    failure_reason: Optional[FailureReason]
    steps: int
    internal_retries: int = 0
    external_notes: int = 0
    token_usage: Dict[str, TokenUsage] = field(default_factory=dict)
    reward_trace: List[float] = field(default_factory=list)
    llm_calls: int = 0
    fallbacks: int = 0
    final_reward: Optional[float] = None
    regret: Optional[float] = None
    transcript_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.success != (self.failure_reason is None):
            raise ValueError("success exactly when there is no failure reason")

    @property
    def feedback_count(self) -> int:
        """Internal retries plus external feedback notes."""
        return self.internal_retries + self.external_notes

    @property
    def total_usage(self) -> TokenUsage:
        total = TokenUsage()
        for usage in self.token_usage.values():
            total = total + usage
        return total

    def to_record(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "env": self.env,
            "size": self.size,
            "seed": self.seed,
            "trial": self.trial,
            "success": self.success,
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
            "steps": self.steps,
            "feedback": self.feedback_count,
            "internal_retries": self.internal_retries,
            "external_notes": self.external_notes,
            "token_usage": {role: u.to_dict() for role, u in sorted(self.token_usage.items())},
            "reward_trace": list(self.reward_trace),
            "llm_calls": self.llm_calls,
            "fallbacks": self.fallbacks,
            "final_reward": self.final_reward,
            "regret": self.regret,
            "transcript_path": self.transcript_path,
        }

    def comparable(self) -> Dict[str, Any]:
        """Record without where it was written; equal for a run and its replay."""
        record = self.to_record()
        record.pop("transcript_path")
        return record

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "EpisodeResult":
        reason = record.get("failure_reason")
        return cls(
            method=record["method"],
            env=record["env"],
            size=record["size"],
            seed=record["seed"],
            trial=record["trial"],
            success=record["success"],
            failure_reason=FailureReason(reason) if reason else None,
            steps=record["steps"],
            internal_retries=record.get("internal_retries", 0),
            external_notes=record.get("external_notes", 0),
            token_usage={
                role: TokenUsage(**usage) for role, usage in record.get("token_usage", {}).items()
            },
            reward_trace=list(record.get("reward_trace", [])),
            llm_calls=record.get("llm_calls", 0),
            fallbacks=record.get("fallbacks", 0),
            final_reward=record.get("final_reward"),
            regret=record.get("regret"),
            transcript_path=record.get("transcript_path"),
        )
