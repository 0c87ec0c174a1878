"""Deterministic oracle policies answering in the live model's reply grammar.

Rule table (gs):

* first round: every proposal sums to ``n`` (one per agent, clamped)
* explore: step from the best-known sum toward the brute-force optimum by
  ``min(n, distance)``
* exploit: repeat the best-known sum
* assessor: take the exploration proposal while rewards rise (or before two
  rounds are known), the exploitation proposal otherwise
* decentralized: each agent hill-climbs its own action by +/-1
* debate: debater 1 argues the exploration sum, debater 2 the exploitation
  sum, each later round moves halfway toward the other; the judge takes the
  floor of their mean

Rule table (grid):

* explore: greedy plan serving the farthest objects first
* exploit: greedy plan serving the closest objects first
* assessor: approve when the automatic checks pass and keep the
  exploitation plan
* revision and actor feedback: the greedy plan's action for the agent
* decentralized: deliver if possible, else the best distance-decreasing move
"""

import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence

from ..core.types import AgentId, JointAction, agent_key
from ..environments.gaussian_squeeze import (
    GaussianSqueezeEnvironment,
    GsRoundRecord,
    allocate_even,
    brute_force_optimum,
)
from ..environments.grid_transport import (
    MoveToCell,
    MoveToCorner,
    MoveToTarget,
    NoOp,
    PlaceInTarget,
    GridTransportEnvironment,
    format_grid_action,
    greedy_plan,
)

logger = logging.getLogger(__name__)


def _verdict(issues: Sequence[str], suggestions: Optional[Dict[str, Any]], notes: List[str]) -> Dict[str, Any]:
    reply: Dict[str, Any] = {
        "verdict": {"pass": not issues, "issues": list(issues)},
        "feedback": "; ".join(issues) if issues else "both proposals are consistent",
        "notes": notes,
    }
    if not issues and suggestions is not None:
        reply["suggestions"] = suggestions
    return reply


class OraclePolicy:
    """Base oracle: dispatches on the call ``kind`` stored in the context."""

    def __init__(self, env: Any):
        self.env = env

    def respond(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        kind = context["kind"]
        handler = getattr(self, f"on_{kind}", None)
        if handler is None:
            raise ValueError(f"Oracle has no rule for call kind '{kind}'")
        return handler(role_tag, context)

    def _terms(self, joint: JointAction) -> Dict[str, Any]:
        return self.env.format_joint(joint)

    def on_actor_feedback(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        failed = [c for c in context["checks"] if not c["passed"]]
        reason = "; ".join(c["detail"] for c in failed) or "suggestion rejected"
        return {"feedback": [{"agent": agent_key(context["agent"]), "reason": reason}]}


class GaussianSqueezeOracle(OraclePolicy):
    env: GaussianSqueezeEnvironment

    def __init__(self, env: GaussianSqueezeEnvironment):
        super().__init__(env)
        self.config = env.config
        self.optimum = brute_force_optimum(env.config)

    # Sums ------------------------------------------------------------------

    def _clamp_sum(self, total: int) -> int:
        low, high = self.config.sum_range
        return max(low, min(high, total))

    def _history(self, context: Mapping[str, Any]) -> Sequence[GsRoundRecord]:
        return context["state"].payload.history

    @staticmethod
    def _best(history: Sequence[GsRoundRecord]) -> GsRoundRecord:
        return max(history, key=lambda r: (r.reward, -r.sum_x))

    def explore_sum(self, history: Sequence[GsRoundRecord]) -> int:
        if not history:
            return self._clamp_sum(self.config.n_agents)
        best = self._best(history).sum_x
        gap = self.optimum.x_star - best
        if gap == 0:
            # Probe a neighbour even at the optimum.
            low, high = self.config.sum_range
            return best + 1 if best < high else max(low, best - 1)
        step = min(self.config.n_agents, abs(gap))
        return best + (step if gap > 0 else -step)

    def exploit_sum(self, history: Sequence[GsRoundRecord]) -> int:
        if not history:
            return self._clamp_sum(self.config.n_agents)
        return self._best(history).sum_x

    @staticmethod
    def rising(history: Sequence[GsRoundRecord]) -> bool:
        return len(history) < 2 or history[-1].reward > history[-2].reward

    def _allocation(self, total: int) -> Dict[str, int]:
        actions = allocate_even(
            total, self.config.n_agents, self.config.action_min, self.config.action_max
        )
        return {agent_key(i): a for i, a in enumerate(actions)}

    @staticmethod
    def _joint_sum(joint: JointAction) -> int:
        return sum(int(term) for term in joint.terms().values())

    def _blend(self, context: Mapping[str, Any]) -> Optional[JointAction]:
        proposals = context["proposals"]
        history = self._history(context)
        at_optimum = bool(history) and self._best(history).sum_x == self.optimum.x_star
        preferred = "explore" if self.rising(history) and not at_optimum else "exploit"
        other = "exploit" if preferred == "explore" else "explore"
        return proposals.get(preferred) or proposals.get(other)

    # Call kinds ------------------------------------------------------------

    def on_proposal(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        history = self._history(context)
        if context["preference"] == "explore":
            total = self.explore_sum(history)
        else:
            total = self.exploit_sum(history)
        best = self._best(history).sum_x if history else None
        return {
            "thoughts": f"best-known sum {best}; proposing sum {total}",
            "actions": self._allocation(total),
        }

    def on_scrutiny(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        history = self._history(context)
        issues = list(context["issues"])
        chosen = None if issues else self._blend(context)
        notes = []
        if len(history) >= 2 and not self.rising(history):
            last = history[-1]
            notes.append(f"sum {last.sum_x} lowered the system reward to {last.reward:.4f}")
        return _verdict(issues, self._terms(chosen) if chosen else None, notes)

    def on_correction(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        chosen = self._blend(context)
        return {"suggestions": self._terms(chosen)}

    def on_revision(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        current = context["suggestions"]
        state = context["state"]
        suggestions = {}
        for agent in context["revise_agents"]:
            term = current[agent].action
            if term not in self.env.legal_actions(state, agent):
                term = self.env.fallback_action(state, agent)
            suggestions[agent_key(agent)] = term
        return {"suggestions": suggestions}

    def on_decentralized(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        agent = context["agent"]
        history = self._history(context)
        low, high = self.config.action_min, self.config.action_max
        own = [record.actions[agent] for record in history]
        if not own:
            action = 1
        elif len(own) == 1:
            action = own[-1] + 1
        else:
            direction = 1 if own[-1] >= own[-2] else -1
            if history[-1].reward < history[-2].reward:
                direction = -direction
            action = own[-1] + direction
        return {"action": max(low, min(high, action))}

    def _debate_sums(self, context: Mapping[str, Any]) -> List[Dict[int, int]]:
        return [
            {debater: self._joint_sum(joint) for debater, joint in round_answers.items()}
            for round_answers in context["debate_history"]
        ]

    def on_debater(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        debater = context["debater"]
        rounds = self._debate_sums(context)
        if not rounds:
            history = self._history(context)
            total = self.explore_sum(history) if debater == 1 else self.exploit_sum(history)
        else:
            last = rounds[-1]
            own, other = last[debater], last[3 - debater]
            total = own + int((other - own) / 2)
        return {"actions": self._allocation(self._clamp_sum(total))}

    def on_debate_final(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        last = self._debate_sums(context)[-1]
        total = sum(last.values()) // len(last)
        return {"actions": self._allocation(self._clamp_sum(total))}


class GridOracle(OraclePolicy):
    env: GridTransportEnvironment

    def on_proposal(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        reverse = context["preference"] == "explore"
        joint = greedy_plan(self.env, context["state"], reverse=reverse)
        order = "farthest" if reverse else "closest"
        return {"thoughts": f"greedy plan serving {order} objects first", "actions": self._terms(joint)}

    def on_scrutiny(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        issues = list(context["issues"])
        chosen = context["proposals"].get("exploit") or context["proposals"].get("explore")
        return _verdict(issues, self._terms(chosen) if chosen else None, [])

    def on_correction(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        chosen = context["proposals"].get("exploit") or context["proposals"].get("explore")
        return {"suggestions": self._terms(chosen)}

    def best_action(self, state: Any, agent: AgentId) -> Any:
        return greedy_plan(self.env, state)[agent].action

    def on_revision(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        state = context["state"]
        merged: JointAction = context["suggestions"]
        suggestions = {}
        for agent in context["revise_agents"]:
            candidate = merged.replace({agent: self.best_action(state, agent)})
            clashes = [
                c for c in self.env.detect_conflicts(state, candidate) if agent in c.agents
            ]
            action = NoOp() if clashes else candidate[agent].action
            merged = merged.replace({agent: action})
            suggestions[agent_key(agent)] = format_grid_action(action)
        return {"suggestions": suggestions}

    def on_actor_feedback(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        reply = super().on_actor_feedback(role_tag, context)
        better = self.best_action(context["state"], context["agent"])
        if not isinstance(better, NoOp):
            reply["feedback"][0]["reason"] += f"; better: {format_grid_action(better)}"
        return reply

    def on_decentralized(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        state, agent = context["state"], context["agent"]
        legal = self.env.legal_actions(state, agent)
        deliveries = [a for a in legal if isinstance(a, (PlaceInTarget, MoveToTarget))]
        if deliveries:
            choice = min(deliveries, key=format_grid_action)
            return {"action": format_grid_action(choice)}
        moves = []
        for action in legal:
            if isinstance(action, (MoveToCell, MoveToCorner)):
                old, new = self.env.distance_change(state, action)
                if new < old:
                    moves.append((new - old, action.object_id, format_grid_action(action)))
        if moves:
            return {"action": min(moves)[2]}
        return {"action": "noop"}

    def on_debater(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        reverse = context["debater"] == 1 and not context["debate_history"]
        return {"actions": self._terms(greedy_plan(self.env, context["state"], reverse=reverse))}

    def on_debate_final(self, role_tag: str, context: Mapping[str, Any]) -> Dict[str, Any]:
        return {"actions": self._terms(greedy_plan(self.env, context["state"]))}


def oracle_for(env: Any) -> OraclePolicy:
    if isinstance(env, GaussianSqueezeEnvironment):
        return GaussianSqueezeOracle(env)
    if isinstance(env, GridTransportEnvironment):
        return GridOracle(env)
    raise TypeError(f"No oracle policy for {type(env).__name__}")
