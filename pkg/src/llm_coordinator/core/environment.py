"""Abstract environment contract shared by the benchmark environments."""

import hashlib
import json
from abc import ABC, abstractmethod
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from ..errors import UnknownAgent
from .types import AgentId, EnvState, JointAction, Observation, StepOutcome


class BaseEnvironment(ABC):
    """Decision process with per-agent observations and text renderings.

    Environments are stateless with respect to episodes: every operation takes
    the current :class:`EnvState` explicitly and returns new immutable values.
    """

    #: Short identifier used in configs, CSV rows and transcripts.
    name: str = "base"
    #: Whether the episode has a goal (grid) or is a fixed-horizon optimisation (gs).
    has_goal: bool = True

    @property
    @abstractmethod
    def agents(self) -> Tuple[AgentId, ...]:
        """All agent ids, in index order."""

    @property
    @abstractmethod
    def max_steps(self) -> int:
        """Episode horizon T."""

    @property
    def size_label(self) -> str:
        """Human label for the instance size (``2x4`` or ``n=5``)."""
        return f"n={len(self.agents)}"

    @abstractmethod
    def reset(self, seed: int) -> Tuple[EnvState, Dict[AgentId, Observation]]:
        """Initial state (step 0) and one observation per agent."""

    @abstractmethod
    def step(self, state: EnvState, joint: JointAction) -> StepOutcome:
        """Execute a joint action; deterministic given (state, joint)."""

    @abstractmethod
    def observe(self, state: EnvState, agent: int) -> Observation:
        """Local observation of ``agent``; pure function of the state."""

    @abstractmethod
    def legal_actions(self, state: EnvState, agent: int) -> FrozenSet[Any]:
        """Actions available to ``agent`` in ``state``."""

    @abstractmethod
    def parse_action(self, agent: int, term: Any) -> Any:
        """Parse a wire action term; raises GrammarError when malformed."""

    @abstractmethod
    def format_action(self, action: Any) -> Any:
        """Wire term for an action (JSON-serialisable)."""

    @abstractmethod
    def action_grammar(self) -> str:
        """Text description of the action grammar, embedded in prompts."""

    @abstractmethod
    def fallback_action(self, state: EnvState, agent: int) -> Any:
        """Action used when an agent's suggestion is never confirmed."""

    @abstractmethod
    def reference_joint(self, state: EnvState) -> JointAction:
        """Oracle joint action used by the scripted greedy reference run."""

    @abstractmethod
    def scenario_dict(self) -> Dict[str, Any]:
        """Canonical, JSON-serialisable description of the instance."""

    def detect_conflicts(self, state: EnvState, joint: JointAction) -> List[Any]:
        """Inter-agent conflicts of a joint action (none by default)."""
        return []

    def distance_change(
        self, state: EnvState, action: Any
    ) -> Optional[Tuple[int, int]]:
        """(old, new) distance-to-target for a move, or None when not applicable."""
        return None

    def describe_unavailable(self, state: EnvState, agent: int, action: Any) -> str:
        """Why ``action`` is not among ``agent``'s legal actions."""
        return f"{self.format_action(action)} is not available to agent_{agent}"

    def observe_all(self, state: EnvState) -> Dict[AgentId, Observation]:
        return {agent: self.observe(state, agent) for agent in self.agents}

    def check_agent(self, agent: int) -> AgentId:
        if agent not in self.agents:
            raise UnknownAgent(agent)
        return AgentId(agent)

    def check_joint_coverage(self, joint: JointAction) -> None:
        """Raise ValueError unless ``joint`` has exactly one entry per agent."""
        if tuple(joint.agents) != self.agents:
            missing = sorted(set(self.agents) - set(joint.agents))
            extra = sorted(set(joint.agents) - set(self.agents))
            raise ValueError(
                f"Joint action must cover every agent once (missing={missing}, extra={extra})"
            )

    def format_joint(self, joint: JointAction) -> Dict[str, Any]:
        return {f"agent_{a}": self.format_action(act.action) for a, act in joint.actions.items()}

    def scenario_hash(self) -> str:
        """SHA-256 of the canonical scenario description."""
        canonical = json.dumps(self.scenario_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
