"""Decentralized actors: plan confirmation and the external feedback loop."""

import asyncio
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from ..core.environment import BaseEnvironment
from ..core.types import AgentId, EnvState, JointAction, Observation, agent_key
from ..llm.base import ChatExchange
from ..llm.gateway import LLMGateway
from ..llm.templates import render_prompt
from ..memory import DecisionMemory
from ..validators import parse_structured
from .critic import CentralCritic
from .messages import FeedbackNote, Suggestion, SuggestionMap, joint_from_suggestions
from .prompting import EventSink, output_format

logger = logging.getLogger(__name__)


class Decision(str, Enum):
    EXECUTE = "Execute"
    NEEDS_REVISION = "NeedsRevision"


@dataclass(frozen=True)
class AvailabilityCheck:
    passed: bool
    detail: str

    name = "availability"


@dataclass(frozen=True)
class DistanceCheck:
    passed: bool
    old: Optional[int] = None
    new: Optional[int] = None
    detail: str = ""

    name = "distance"


Check = Union[AvailabilityCheck, DistanceCheck]


@dataclass(frozen=True)
class ConfirmationResult:
    decision: Decision
    checks: Tuple[Check, ...]

    def __post_init__(self) -> None:
        all_pass = all(c.passed for c in self.checks)
        if (self.decision is Decision.EXECUTE) != all_pass:
            raise ValueError("Execute exactly when every applicable check passes")

    @property
    def failed(self) -> Tuple[Check, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def report(self) -> str:
        return "\n".join(
            f"- {c.name}: {'pass' if c.passed else 'FAIL'} ({c.detail})" for c in self.checks
        )


def plan_confirmation(
    env: BaseEnvironment, observation: Observation, suggestion: Suggestion, state: EnvState
) -> ConfirmationResult:
    """Deterministic check of one suggestion: availability, then distance."""
    if suggestion.agent != observation.agent:
        raise ValueError(
            f"suggestion for agent_{suggestion.agent} given to agent_{observation.agent}"
        )
    agent, action = suggestion.agent, suggestion.action.action
    term = env.format_action(action)

    if action not in env.legal_actions(state, agent):
        check = AvailabilityCheck(False, env.describe_unavailable(state, agent, action))
        return ConfirmationResult(Decision.NEEDS_REVISION, (check,))
    availability = AvailabilityCheck(True, f"{term} is available")

    change = env.distance_change(state, action)
    if change is None:
        distance = DistanceCheck(True, detail="no distance change to check")
    else:
        old, new = change
        if new <= old:
            distance = DistanceCheck(True, old, new, f"distance {old} -> {new}")
        else:
            distance = DistanceCheck(
                False, old, new, f"{term} increases the distance to the target from {old} to {new}"
            )
    decision = Decision.EXECUTE if distance.passed else Decision.NEEDS_REVISION
    return ConfirmationResult(decision, (availability, distance))


def _check_dicts(confirmation: ConfirmationResult) -> List[Dict[str, Any]]:
    out = []
    for check in confirmation.checks:
        entry: Dict[str, Any] = {"check": check.name, "passed": check.passed, "detail": check.detail}
        if isinstance(check, DistanceCheck):
            entry.update(old=check.old, new=check.new)
        out.append(entry)
    return out


async def generate_feedback(
    gateway: LLMGateway,
    env: BaseEnvironment,
    observation: Observation,
    suggestion: Suggestion,
    confirmation: ConfirmationResult,
    state: EnvState,
) -> FeedbackNote:
    """One actor call explaining a rejected suggestion.

    The reply is free text at heart: when it carries no usable feedback entry
    the failed check details become the reason.
    """
    if confirmation.decision is Decision.EXECUTE:
        raise ValueError("feedback is only generated for rejected suggestions")
    agent = suggestion.agent
    role_tag = f"actor_{agent}"
    bindings = {
        "agent": agent_key(agent),
        "observation": observation.text,
        "suggestion": str(env.format_action(suggestion.action.action)),
        "check_report": confirmation.report(),
        "output_format": output_format("feedback_list"),
    }
    context = {
        "kind": "actor_feedback",
        "env": env,
        "state": state,
        "agent": agent,
        "suggestion": suggestion.action.action,
        "checks": _check_dicts(confirmation),
    }
    exchange = await gateway.complete(role_tag, render_prompt("actor_feedback", bindings), context)

    fallback = "; ".join(c.detail for c in confirmation.failed)
    result = parse_structured(exchange.response_text, "feedback_list")
    reason = ""
    if result.ok:
        own = [e["reason"] for e in result.value["feedback"] if e["agent"] == agent_key(agent)]
        reason = "; ".join(own).strip()
    elif exchange.response_text.strip():
        logger.debug(f"{role_tag}: free-text feedback ({result.error.reason})")
        reason = exchange.response_text.strip()
    return FeedbackNote(agent, suggestion, reason or fallback)


@dataclass
class ExternalFeedbackOutcome:
    joint: JointAction
    iterations: int
    notes: int = 0
    revisions: int = 0
    fallbacks: List[AgentId] = field(default_factory=list)


class ActorTeam:
    """All actors of an episode, running the external feedback loop together."""

    def __init__(
        self,
        env: BaseEnvironment,
        gateway: LLMGateway,
        critic: CentralCritic,
        on_event: Optional[EventSink] = None,
    ):
        self.env = env
        self.gateway = gateway
        self.critic = critic
        self.on_event = on_event

    def _emit(self, kind: str, **data: Any) -> None:
        if self.on_event is not None:
            self.on_event(kind, **data)

    async def external_feedback_loop(
        self,
        suggestions: SuggestionMap,
        observations: Mapping[AgentId, Observation],
        state: EnvState,
        limit: int,
        memory: DecisionMemory,
        dialogue: Sequence[ChatExchange] = (),
    ) -> ExternalFeedbackOutcome:
        """Confirm, collect feedback, revise; confirmed actors stay frozen."""
        if limit < 1:
            raise ValueError("external feedback limit must be >= 1")
        if set(suggestions) != set(self.env.agents):
            raise ValueError("suggestions must cover every agent")

        current: SuggestionMap = dict(suggestions)
        frozen: Dict[AgentId, Any] = {}
        outcome = ExternalFeedbackOutcome(joint=joint_from_suggestions(current), iterations=0)
        pending_revision = False

        for iteration in range(1, limit + 1):
            outcome.iterations = iteration
            self._emit("external_iteration", iteration=iteration)
            confirmations = {
                agent: plan_confirmation(self.env, observations[agent], current[agent], state)
                for agent in self.env.agents
                if agent not in frozen
            }
            dissenters = []
            for agent, confirmation in confirmations.items():
                if confirmation.decision is Decision.EXECUTE:
                    frozen[agent] = current[agent].action.action
                else:
                    dissenters.append(agent)
                    logger.debug(f"agent_{agent}: {confirmation.report()}")
            pending_revision = False
            if not dissenters:
                break

            feedback = await asyncio.gather(
                *(
                    generate_feedback(
                        self.gateway, self.env, observations[a], current[a], confirmations[a], state
                    )
                    for a in dissenters
                )
            )
            notes = sorted(feedback, key=lambda n: n.agent)
            outcome.notes += len(notes)
            self._emit("external_feedback", iteration=iteration, agents=[agent_key(n.agent) for n in notes])
            revised = await self.critic.revise_suggestions(state, memory, current, dialogue, notes)
            outcome.revisions += 1
            # Confirmed actors keep their action whatever the revision says.
            current = {
                agent: (current[agent] if agent in frozen else revised[agent]) for agent in self.env.agents
            }
            pending_revision = True

        if pending_revision:
            for agent in self.env.agents:
                if agent in frozen:
                    continue
                confirmation = plan_confirmation(self.env, observations[agent], current[agent], state)
                if confirmation.decision is Decision.EXECUTE:
                    frozen[agent] = current[agent].action.action
        for agent in self.env.agents:
            if agent not in frozen:
                frozen[agent] = self.env.fallback_action(state, agent)
                outcome.fallbacks.append(agent)
                logger.warning(
                    f"agent_{agent}: external feedback exhausted, falling back to "
                    f"{self.env.format_action(frozen[agent])}"
                )
                self._emit("fallback", agent=agent_key(agent))

        outcome.joint = JointAction.from_terms(frozen)
        return outcome

    async def resolve_conflicts(
        self,
        joint: JointAction,
        observations: Mapping[AgentId, Observation],
        state: EnvState,
        memory: DecisionMemory,
        rounds: int,
        dialogue: Sequence[ChatExchange] = (),
    ) -> Tuple[JointAction, int, List[AgentId]]:
        """Final-joint safety net before execution.

        Conflicting agents other than the lowest id of each conflict are sent
        back to the critic for up to ``rounds`` revisions; whatever conflict
        remains is settled by degrading those agents to their fallback.
        Returns the joint, the number of notes sent and the degraded agents.
        """
        notes_sent = 0
        for round_index in range(1, rounds + 1):
            conflicts = self.env.detect_conflicts(state, joint)
            if not conflicts:
                return joint, notes_sent, []
            logger.warning(f"final joint action has {len(conflicts)} conflict(s); revising")
            reasons: Dict[AgentId, List[str]] = {}
            for conflict in conflicts:
                for agent in sorted(conflict.agents)[1:]:
                    reasons.setdefault(agent, []).append(conflict.detail)
            suggestions = {
                agent: Suggestion(agent, joint[agent]) for agent in joint.agents
            }
            notes = [
                FeedbackNote(agent, suggestions[agent], "conflict: " + "; ".join(details))
                for agent, details in sorted(reasons.items())
            ]
            notes_sent += len(notes)
            self._emit("conflict_revision", round=round_index, agents=[agent_key(n.agent) for n in notes])
            revised = await self.critic.revise_suggestions(state, memory, suggestions, dialogue, notes)
            updates = {}
            for note in notes:
                agent = note.agent
                confirmation = plan_confirmation(self.env, observations[agent], revised[agent], state)
                if confirmation.decision is Decision.EXECUTE:
                    updates[agent] = revised[agent].action.action
                else:
                    updates[agent] = self.env.fallback_action(state, agent)
            joint = joint.replace(updates)

        joint, degraded = degrade_conflicts(self.env, state, joint)
        if degraded:
            self._emit("conflict_degraded", agents=[agent_key(a) for a in degraded])
        return joint, notes_sent, degraded


def degrade_conflicts(
    env: BaseEnvironment, state: EnvState, joint: JointAction
) -> Tuple[JointAction, List[AgentId]]:
    """Keep the lowest agent id of every conflict, send the others to their fallback."""
    degraded: List[AgentId] = []
    for conflict in env.detect_conflicts(state, joint):
        for agent in sorted(conflict.agents)[1:]:
            if agent not in degraded:
                degraded.append(agent)
    if not degraded:
        return joint, []
    logger.warning("degrading conflicting agents: " + ", ".join(agent_key(a) for a in sorted(degraded)))
    return joint.replace({a: env.fallback_action(state, a) for a in degraded}), sorted(degraded)
