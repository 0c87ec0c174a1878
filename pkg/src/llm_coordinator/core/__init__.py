"""Core decision-process abstractions."""

from .environment import BaseEnvironment
from .seeding import derive_trial_seed, normalize_seed, stream
from .types import (
    AgentAction,
    AgentId,
    EnvState,
    JointAction,
    Observation,
    StepOutcome,
    TransitionRecord,
    agent_key,
    parse_agent_key,
)

__all__ = [
    "AgentAction",
    "AgentId",
    "BaseEnvironment",
    "EnvState",
    "JointAction",
    "Observation",
    "StepOutcome",
    "TransitionRecord",
    "agent_key",
    "derive_trial_seed",
    "normalize_seed",
    "parse_agent_key",
    "stream",
]
