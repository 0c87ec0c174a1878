"""Messages exchanged between the critic and the actors."""

from dataclasses import dataclass
from typing import Dict, Mapping

from ..core.types import AgentAction, AgentId, JointAction


@dataclass(frozen=True)
class Suggestion:
    """Critic's proposed action for one agent, before actor confirmation."""

    agent: AgentId
    action: AgentAction
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.action.agent != self.agent:
            raise ValueError(
                f"Suggestion for agent_{self.agent} carries an action for agent_{self.action.agent}"
            )


SuggestionMap = Dict[AgentId, Suggestion]


@dataclass(frozen=True)
class FeedbackNote:
    """Why an actor could not execute its suggestion."""

    agent: AgentId
    suggestion: Suggestion
    reason: str

    def __post_init__(self) -> None:
        if not self.reason.strip():
            raise ValueError("feedback reason must not be empty")


def suggestions_from_joint(joint: JointAction, rationale: str = "") -> SuggestionMap:
    return {
        agent: Suggestion(agent, joint[agent], rationale) for agent in joint.agents
    }


def joint_from_suggestions(suggestions: Mapping[AgentId, Suggestion]) -> JointAction:
    return JointAction.from_terms({agent: s.action.action for agent, s in suggestions.items()})
