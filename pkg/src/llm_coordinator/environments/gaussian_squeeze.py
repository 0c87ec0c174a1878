"""System resource allocation environment (Gaussian squeeze objective)."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, List, NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.environment import BaseEnvironment
from ..core.types import AgentId, EnvState, JointAction, Observation, StepOutcome
from ..errors import GrammarError, IllegalAction, NonPositiveSigma

logger = logging.getLogger(__name__)


class GsConfig(BaseModel):
    """Gaussian squeeze instance parameters.

    ``mu`` and ``sigma`` default to ``2.5 * n_agents`` and ``0.5 * n_agents``,
    which places the optimum strictly inside the joint action range.
    """

    model_config = ConfigDict(frozen=True)

    n_agents: int = Field(default=3, ge=1, description="Number of agents")
    mu: float = Field(gt=0, description="Peak location of the objective")
    sigma: float = Field(gt=0, description="Width of the objective")
    action_min: int = Field(default=0, description="Smallest per-agent action")
    action_max: int = Field(default=9, description="Largest per-agent action")
    max_rounds: int = Field(default=20, ge=1, description="Decision rounds T")

    @model_validator(mode="before")
    @classmethod
    def _default_shape(cls, values: Any) -> Any:
        if isinstance(values, dict):
            values = dict(values)
            n_agents = int(values.get("n_agents", 3))
            if values.get("mu") is None:
                values["mu"] = 2.5 * n_agents
            if values.get("sigma") is None:
                values["sigma"] = 0.5 * n_agents
        return values

    @model_validator(mode="after")
    def _check_range(self) -> "GsConfig":
        if self.action_min > self.action_max:
            raise ValueError("action_min must be <= action_max")
        return self

    @property
    def sum_range(self) -> Tuple[int, int]:
        return self.n_agents * self.action_min, self.n_agents * self.action_max


@dataclass(frozen=True)
class GsRoundRecord:
    """Actions of one round, their sum and the broadcast system reward."""

    actions: Tuple[int, ...]
    sum_x: int
    reward: float


@dataclass(frozen=True)
class GsPayload:
    config: GsConfig
    history: Tuple[GsRoundRecord, ...] = ()


@dataclass(frozen=True)
class GsObservation:
    agent: AgentId
    own_actions: Tuple[int, ...]
    system_rewards: Tuple[float, ...]


class GsOptimum(NamedTuple):
    x_star: int
    r_star: float


def gaussian_squeeze(x: float, mu: float, sigma: float) -> float:
    """System reward ``x * exp(-(x - mu)^2 / sigma^2)``."""
    if sigma <= 0:
        raise NonPositiveSigma(f"sigma must be > 0, got {sigma}")
    return float(x * math.exp(-((x - mu) ** 2) / sigma**2))


def stationary_root(mu: float, sigma: float) -> float:
    """Positive root of ``2x^2 - 2mu*x - sigma^2 = 0`` (the continuous peak)."""
    return (mu + math.sqrt(mu**2 + 2 * sigma**2)) / 2


def brute_force_optimum(config: GsConfig) -> GsOptimum:
    """Exhaustive integer argmax of the objective over the joint sum range.

    Ties go to the smallest sum. The result is cross-checked against the
    continuous peak: when the peak lies inside the range, the integer argmax
    must be within distance 1 of it.
    """
    low, high = config.sum_range
    xs = np.arange(low, high + 1, dtype=np.float64)
    rewards = xs * np.exp(-((xs - config.mu) ** 2) / config.sigma**2)
    x_star = int(low + int(np.argmax(rewards)))
    r_star = gaussian_squeeze(x_star, config.mu, config.sigma)

    root = stationary_root(config.mu, config.sigma)
    if low <= root <= high and abs(x_star - root) > 1:
        logger.error(
            f"Brute-force argmax {x_star} disagrees with stationary point {root:.4f} "
            f"for mu={config.mu}, sigma={config.sigma}"
        )
        raise RuntimeError("Brute-force optimum inconsistent with stationarity condition")
    return GsOptimum(x_star=x_star, r_star=r_star)


def allocate_greedy(total: int, n_agents: int, action_min: int, action_max: int) -> List[int]:
    """Fill agents in index order up to ``action_max`` until ``total`` is reached."""
    low, high = n_agents * action_min, n_agents * action_max
    if not low <= total <= high:
        raise ValueError(f"Sum {total} outside reachable range [{low}, {high}]")
    allocation = [action_min] * n_agents
    remaining = total - low
    for i in range(n_agents):
        step = min(action_max - action_min, remaining)
        allocation[i] += step
        remaining -= step
    return allocation


def allocate_even(total: int, n_agents: int, action_min: int, action_max: int) -> List[int]:
    """Spread ``total`` as evenly as possible; lower indices take the remainder."""
    low, high = n_agents * action_min, n_agents * action_max
    total = max(low, min(high, total))
    base, extra = divmod(total, n_agents)
    return [base + 1 if i < extra else base for i in range(n_agents)]


def format_reward(reward: float) -> str:
    """Shortest round-trip text of a reward value."""
    return repr(float(reward))


class GaussianSqueezeEnvironment(BaseEnvironment):
    """Agents pick integers; the system reward depends only on their sum."""

    name = "gs"
    has_goal = False

    def __init__(self, config: GsConfig):
        self.config = config
        self._agents = tuple(AgentId(i) for i in range(config.n_agents))

    @property
    def agents(self) -> Tuple[AgentId, ...]:
        return self._agents

    @property
    def max_steps(self) -> int:
        return self.config.max_rounds

    def reset(self, seed: int) -> Tuple[EnvState, Dict[AgentId, Observation]]:
        # No stochastic initial state: every seed yields the same empty history.
        state = self._make_state(0, GsPayload(config=self.config))
        return state, self.observe_all(state)

    def step(self, state: EnvState, joint: JointAction) -> StepOutcome:
        self.check_joint_coverage(joint)
        payload: GsPayload = state.payload
        actions = []
        for agent in self.agents:
            value = joint[agent].action
            if (
                isinstance(value, bool)
                or not isinstance(value, int)
                or not self.config.action_min <= value <= self.config.action_max
            ):
                raise IllegalAction(
                    agent,
                    f"action {value!r} outside [{self.config.action_min}, {self.config.action_max}]",
                )
            actions.append(value)

        sum_x = sum(actions)
        reward = gaussian_squeeze(sum_x, self.config.mu, self.config.sigma)
        record = GsRoundRecord(actions=tuple(actions), sum_x=sum_x, reward=reward)
        history = payload.history + (record,)
        next_state = self._make_state(state.step_index + 1, GsPayload(self.config, history))
        logger.debug(f"gs round {len(history)}: sum={sum_x} reward={reward:.4f}")
        return StepOutcome(
            next_state=next_state,
            rewards={agent: reward for agent in self.agents},
            done=len(history) >= self.config.max_rounds,
            goal_reached=False,
        )

    def observe(self, state: EnvState, agent: int) -> Observation:
        agent_id = self.check_agent(agent)
        history = state.payload.history
        own = tuple(record.actions[agent_id] for record in history)
        rewards = tuple(record.reward for record in history)
        text = "\n".join(
            [
                f"agent_{agent_id} observation",
                f"action range: [{self.config.action_min}, {self.config.action_max}]",
                f"your actions: [{', '.join(str(a) for a in own)}]",
                f"system rewards: [{', '.join(format_reward(r) for r in rewards)}]",
            ]
        )
        return Observation(agent=agent_id, payload=GsObservation(agent_id, own, rewards), text=text)

    def legal_actions(self, state: EnvState, agent: int) -> FrozenSet[int]:
        self.check_agent(agent)
        return frozenset(range(self.config.action_min, self.config.action_max + 1))

    def parse_action(self, agent: int, term: Any) -> int:
        value: Any = term
        if isinstance(term, str) and term.strip().lstrip("-").isdigit():
            value = int(term.strip())
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int):
            raise GrammarError(f"action for agent_{agent} must be a bare integer, got {term!r}")
        if not self.config.action_min <= value <= self.config.action_max:
            raise GrammarError(
                f"action for agent_{agent} out of range [{self.config.action_min}, "
                f"{self.config.action_max}]: {value}"
            )
        return value

    def format_action(self, action: Any) -> int:
        return int(action)

    def action_grammar(self) -> str:
        return (
            f"Each agent's action is a bare integer between {self.config.action_min} "
            f"and {self.config.action_max} (inclusive), e.g. \"agent_0\": 4."
        )

    def fallback_action(self, state: EnvState, agent: int) -> int:
        history = state.payload.history
        if history:
            return history[-1].actions[agent]
        return self.config.action_min

    def reference_joint(self, state: EnvState) -> JointAction:
        optimum = brute_force_optimum(self.config)
        allocation = allocate_greedy(
            optimum.x_star, self.config.n_agents, self.config.action_min, self.config.action_max
        )
        return JointAction.from_terms(dict(enumerate(allocation)))

    def scenario_dict(self) -> Dict[str, Any]:
        return {"env": self.name, "gs": self.config.model_dump(mode="json")}

    def render_state(self, step_index: int, payload: GsPayload) -> str:
        lines = [
            "environment: gs",
            f"agents: {self.config.n_agents}",
            f"action range: [{self.config.action_min}, {self.config.action_max}] per agent",
            f"round: {len(payload.history)}/{self.config.max_rounds}",
            "objective: maximise the system reward, an unknown function of the sum of all actions",
        ]
        if payload.history:
            last = payload.history[-1]
            lines.append(
                f"last round: actions=[{', '.join(str(a) for a in last.actions)}] "
                f"sum={last.sum_x} system_reward={format_reward(last.reward)}"
            )
        else:
            lines.append("last round: none")
        return "\n".join(lines)

    def _make_state(self, step_index: int, payload: GsPayload) -> EnvState:
        return EnvState(step_index=step_index, payload=payload, text=self.render_state(step_index, payload))
