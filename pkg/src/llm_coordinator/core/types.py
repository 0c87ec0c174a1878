"""Shared decision-process types used by every environment."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, Mapping, NewType, Tuple

AgentId = NewType("AgentId", int)


def agent_key(agent: int) -> str:
    """Wire name of an agent (``agent_3``)."""
    return f"agent_{agent}"


def parse_agent_key(key: str) -> AgentId:
    """Inverse of :func:`agent_key`; raises ValueError on malformed keys."""
    prefix, _, index = key.partition("_")
    if prefix != "agent" or not index.isdigit():
        raise ValueError(f"Malformed agent key: {key!r}")
    return AgentId(int(index))


@dataclass(frozen=True)
class EnvState:
    """Immutable environment snapshot with its text rendering."""

    step_index: int
    payload: Any
    text: str

    def __post_init__(self) -> None:
        if self.step_index < 0:
            raise ValueError("step_index must be >= 0")


@dataclass(frozen=True)
class Observation:
    """Local view of one agent, derived from an EnvState."""

    agent: AgentId
    payload: Any
    text: str


@dataclass(frozen=True)
class AgentAction:
    """One agent's action term."""

    agent: AgentId
    action: Any


@dataclass(frozen=True)
class JointAction:
    """Exactly one action per agent, keyed by agent id."""

    actions: Mapping[AgentId, AgentAction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for agent, agent_action in self.actions.items():
            if agent_action.agent != agent:
                raise ValueError(
                    f"Action for agent_{agent} is addressed to agent_{agent_action.agent}"
                )
        # Canonical agent order so equal joints compare and render identically.
        object.__setattr__(self, "actions", dict(sorted(self.actions.items())))

    @classmethod
    def from_terms(cls, terms: Mapping[int, Any]) -> "JointAction":
        """Build a joint action from raw per-agent action terms."""
        return cls(
            {AgentId(a): AgentAction(AgentId(a), term) for a, term in terms.items()}
        )

    def __getitem__(self, agent: int) -> AgentAction:
        return self.actions[AgentId(agent)]

    def __iter__(self) -> Iterator[AgentId]:
        return iter(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def agents(self) -> Tuple[AgentId, ...]:
        return tuple(self.actions)

    def terms(self) -> Dict[AgentId, Any]:
        return {agent: a.action for agent, a in self.actions.items()}

    def replace(self, updates: Mapping[int, Any]) -> "JointAction":
        """Return a copy with some agents' action terms replaced."""
        merged = self.terms()
        merged.update({AgentId(a): term for a, term in updates.items()})
        return JointAction.from_terms(merged)


@dataclass(frozen=True)
class StepOutcome:
    """Result of executing a joint action."""

    next_state: EnvState
    rewards: Mapping[AgentId, float]
    done: bool
    goal_reached: bool

    def __post_init__(self) -> None:
        if self.goal_reached and not self.done:
            raise ValueError("goal_reached implies done")
        for agent, reward in self.rewards.items():
            if not math.isfinite(reward):
                raise ValueError(f"Non-finite reward for agent_{agent}: {reward}")


@dataclass(frozen=True)
class TransitionRecord:
    """One (s, a, r, s') transition stored in decision memory."""

    state: EnvState
    joint_action: JointAction
    rewards: Mapping[AgentId, float]
    next_state: EnvState

    def __post_init__(self) -> None:
        if self.next_state.step_index != self.state.step_index + 1:
            raise ValueError(
                "next_state.step_index must equal state.step_index + 1 "
                f"(got {self.state.step_index} -> {self.next_state.step_index})"
            )
