"""Per-step decision policies: the actor-critic method and its baselines.

Every policy turns (state, observations, memory) into one conflict-free
joint action. Baselines share the engine, the metrics and the failure
taxonomy with the actor-critic method; only the way the joint action is
obtained differs.
"""

import asyncio
import json
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Mapping, Optional

from llm_coordinator.agents import (
    ActorTeam,
    CentralCritic,
    CriticPreference,
    ask_structured,
    degrade_conflicts,
    output_format,
    parse_agent_terms,
)
from llm_coordinator.agents.prompting import EventSink, agents_text, memory_text
from llm_coordinator.config import LoopConfig
from llm_coordinator.core.environment import BaseEnvironment
from llm_coordinator.core.types import AgentId, EnvState, JointAction, Observation, agent_key
from llm_coordinator.llm.gateway import LLMGateway
from llm_coordinator.llm.templates import EXPLOIT_CLAUSE, EXPLORE_CLAUSE, render_prompt
from llm_coordinator.memory import DecisionMemory

from .models import Method, RunConfig, StepDecision

logger = logging.getLogger(__name__)


class StepPolicy(ABC):
    """Chooses the joint action of one step."""

    def __init__(
        self,
        env: BaseEnvironment,
        gateway: Optional[LLMGateway],
        config: RunConfig,
        on_event: Optional[EventSink] = None,
    ):
        self.env = env
        self.gateway = gateway
        self.config = config
        self.on_event = on_event

    @property
    def reask_attempts(self) -> int:
        return 1 + self.config.grammar_reask_limit

    @abstractmethod
    async def decide(
        self,
        state: EnvState,
        observations: Mapping[AgentId, Observation],
        memory: DecisionMemory,
    ) -> StepDecision:
        """Joint action for ``state``."""

    def _settle(self, state: EnvState, joint: JointAction, **counts: Any) -> StepDecision:
        joint, degraded = degrade_conflicts(self.env, state, joint)
        return StepDecision(joint=joint, fallbacks=degraded, **counts)


class ActorCriticPolicy(StepPolicy):
    """Internal feedback, external feedback, then the final conflict check."""

    def __init__(self, env, gateway, config, on_event=None):
        super().__init__(env, gateway, config, on_event)
        self.critic = CentralCritic(env, gateway, config.grammar_reask_limit, on_event)
        self.actors = ActorTeam(env, gateway, self.critic, on_event)

    async def decide(self, state, observations, memory):
        internal = await self.critic.internal_feedback_loop(state, memory, self.config.if_limit)
        dialogue = internal.state.dialogue
        external = await self.actors.external_feedback_loop(
            internal.suggestions, observations, state, self.config.ef_limit, memory, dialogue
        )
        joint, conflict_notes, degraded = await self.actors.resolve_conflicts(
            external.joint, observations, state, memory, self.config.ef_limit, dialogue
        )
        return StepDecision(
            joint=joint,
            internal_retries=internal.retries,
            external_notes=external.notes + conflict_notes,
            fallbacks=list(external.fallbacks) + degraded,
            notes=internal.notes,
        )


class SingleProposerPolicy(StepPolicy):
    """One preference-biased proposer, no assessor and no actor feedback."""

    def __init__(self, env, gateway, config, preference: CriticPreference, on_event=None):
        super().__init__(env, gateway, config, on_event)
        self.preference = preference
        self.critic = CentralCritic(env, gateway, config.grammar_reask_limit, on_event)

    async def decide(self, state, observations, memory):
        messages, context = self.critic.proposal_request(self.preference, state, memory)
        joint, _ = await ask_structured(
            self.gateway,
            self.preference.role_tag,
            messages,
            "action_map",
            context,
            lambda value: parse_agent_terms(self.env, value["actions"], self.env.agents),
            self.reask_attempts,
            self.env.agents,
        )
        return self._settle(state, joint)


def own_history(env: BaseEnvironment, memory: DecisionMemory, agent: AgentId) -> str:
    """An agent's own past actions and the rewards it received."""
    if not memory.transitions:
        return "(no previous steps)"
    lines = []
    for record in memory.transitions:
        term = env.format_action(record.joint_action[agent].action)
        reward = record.rewards.get(agent, 0.0)
        lines.append(f"step {record.state.step_index}: your action {term}, reward {reward!r}")
    return "\n".join(lines)


class DecentralizedPolicy(StepPolicy):
    """Each agent decides alone from its own observation: one call per agent."""

    def __init__(self, env, gateway, config, on_event=None, warn_threshold: int = 20):
        super().__init__(env, gateway, config, on_event)
        if len(env.agents) >= warn_threshold:
            logger.warning(
                f"decentralized run with {len(env.agents)} agents issues one model call "
                f"per agent per step"
            )

    async def _decide_agent(self, state, observation: Observation, memory) -> Any:
        agent = observation.agent
        bindings = {
            "agent": agent_key(agent),
            "environment": self.env.name,
            "observation": observation.text,
            "memory": own_history(self.env, memory, agent),
            "action_grammar": self.env.action_grammar(),
            "output_format": output_format("single_action"),
        }
        context = {"kind": "decentralized", "env": self.env, "state": state, "agent": agent}
        action, _ = await ask_structured(
            self.gateway,
            f"actor_{agent}",
            render_prompt("decentralized_actor", bindings),
            "single_action",
            context,
            lambda value: self.env.parse_action(agent, value["action"]),
            self.reask_attempts,
        )
        return action

    async def decide(self, state, observations, memory):
        actions = await asyncio.gather(
            *(self._decide_agent(state, observations[a], memory) for a in self.env.agents)
        )
        joint = JointAction.from_terms(dict(zip(self.env.agents, actions)))
        return self._settle(state, joint)


def debate_history_text(env: BaseEnvironment, history: List[Dict[int, JointAction]]) -> str:
    if not history:
        return "(no answers yet)"
    lines = []
    for index, answers in enumerate(history, start=1):
        lines.append(f"round {index}:")
        for debater in sorted(answers):
            rendered = json.dumps(env.format_joint(answers[debater]), sort_keys=True)
            lines.append(f"  debater_{debater}: {rendered}")
    return "\n".join(lines)


class DebatePolicy(StepPolicy):
    """Two debaters answer for ``debate_rounds`` rounds, then a judge decides."""

    STANCES = {1: EXPLORE_CLAUSE, 2: EXPLOIT_CLAUSE}
    JUDGE_ROLE = "assessor"

    def _convert(self, value: Dict[str, Any]) -> JointAction:
        return parse_agent_terms(self.env, value["actions"], self.env.agents)

    def _bindings(self, state, memory, history) -> Dict[str, Any]:
        return {
            "environment": self.env.name,
            "agents": agents_text(self.env.agents),
            "state": state.text,
            "memory": memory_text(self.env, memory),
            "debate_history": debate_history_text(self.env, history),
            "action_grammar": self.env.action_grammar(),
            "output_format": output_format("action_map", self.env.agents),
        }

    async def _argue(self, debater: int, state, memory, history) -> JointAction:
        bindings = {
            **self._bindings(state, memory, history),
            "debater": f"debater_{debater}",
            "stance": self.STANCES[debater],
        }
        context = {
            "kind": "debater",
            "env": self.env,
            "state": state,
            "memory": memory,
            "debater": debater,
            "debate_history": list(history),
        }
        joint, _ = await ask_structured(
            self.gateway,
            f"debater_{debater}",
            render_prompt("debater", bindings),
            "action_map",
            context,
            self._convert,
            self.reask_attempts,
            self.env.agents,
        )
        return joint

    async def decide(self, state, observations, memory):
        history: List[Dict[int, JointAction]] = []
        for round_index in range(1, self.config.debate_rounds + 1):
            if self.on_event is not None:
                self.on_event("debate_round", round=round_index)
            answers = await asyncio.gather(*(self._argue(d, state, memory, history) for d in (1, 2)))
            history.append(dict(zip((1, 2), answers)))

        context = {
            "kind": "debate_final",
            "env": self.env,
            "state": state,
            "memory": memory,
            "debate_history": list(history),
        }
        joint, _ = await ask_structured(
            self.gateway,
            self.JUDGE_ROLE,
            render_prompt("debate_final", self._bindings(state, memory, history)),
            "action_map",
            context,
            self._convert,
            self.reask_attempts,
            self.env.agents,
        )
        return self._settle(state, joint)


class ScriptedGreedyPolicy(StepPolicy):
    """The environment's own planner; no model calls."""

    async def decide(self, state, observations, memory):
        return self._settle(state, self.env.reference_joint(state))


def build_policy(
    env: BaseEnvironment,
    gateway: LLMGateway,
    config: RunConfig,
    loop: Optional[LoopConfig] = None,
    on_event: Optional[EventSink] = None,
) -> StepPolicy:
    """Policy implementing ``config.method``."""
    loop = loop or LoopConfig()
    method = Method(config.method)
    if method is Method.ACTOR_CRITIC:
        return ActorCriticPolicy(env, gateway, config, on_event)
    if method is Method.ONLY_EXPLORE:
        return SingleProposerPolicy(env, gateway, config, CriticPreference.EXPLORE, on_event)
    if method is Method.ONLY_EXPLOIT:
        return SingleProposerPolicy(env, gateway, config, CriticPreference.EXPLOIT, on_event)
    if method is Method.DECENTRALIZED:
        return DecentralizedPolicy(env, gateway, config, on_event, loop.decentralized_agent_warning)
    if method is Method.DEBATE:
        return DebatePolicy(env, gateway, config, on_event)
    return ScriptedGreedyPolicy(env, gateway, config, on_event)
