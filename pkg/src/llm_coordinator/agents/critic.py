"""Central critic: two preference-biased proposers plus an assessor.

One internal-feedback iteration is two concurrent proposer calls followed by
one assessor call. The assessor's scrutiny reply also carries the blended
suggestions, so a clean iteration costs exactly three model calls; a
separate correction call is made only when those suggestions are unusable.
"""

import asyncio
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from ..core.environment import BaseEnvironment
from ..core.types import AgentId, EnvState, JointAction, agent_key
from ..errors import GrammarError, InternalFeedbackExhausted
from ..llm.base import ChatExchange, PromptMessages
from ..llm.gateway import LLMGateway
from ..llm.templates import EXPLOIT_CLAUSE, EXPLORE_CLAUSE, render_prompt
from ..memory import DecisionMemory
from ..validators import parse_structured
from .messages import FeedbackNote, Suggestion, SuggestionMap, joint_from_suggestions
from .prompting import (
    EventSink,
    agents_text,
    ask_structured,
    joint_text,
    memory_text,
    notes_text,
    output_format,
    parse_agent_terms,
)

logger = logging.getLogger(__name__)

ASSESSOR_ROLE = "assessor"


class CriticPreference(str, Enum):
    EXPLORE = "explore"
    EXPLOIT = "exploit"

    @property
    def role_tag(self) -> str:
        return f"critic_{self.value}"

    @property
    def clause(self) -> str:
        return EXPLORE_CLAUSE if self is CriticPreference.EXPLORE else EXPLOIT_CLAUSE


@dataclass(frozen=True)
class GrammarIssue:
    source: str
    detail: str

    def describe(self) -> str:
        return f"[grammar] {self.source} proposal: {self.detail}"


@dataclass(frozen=True)
class ConflictIssue:
    source: str
    conflict: Any

    def describe(self) -> str:
        kind = getattr(self.conflict.kind, "value", self.conflict.kind)
        return f"[conflict] {self.source} proposal: {kind}: {self.conflict.detail}"


@dataclass(frozen=True)
class AssessorIssue:
    detail: str

    def describe(self) -> str:
        return f"[assessor] {self.detail}"


ScrutinyIssue = Union[GrammarIssue, ConflictIssue, AssessorIssue]


@dataclass(frozen=True)
class Proposal:
    """A proposer's joint action, or the grammar error that prevented one."""

    preference: CriticPreference
    joint: Optional[JointAction]
    rationale: str = ""
    grammar_error: Optional[GrammarError] = None
    exchange: Optional[ChatExchange] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if (self.joint is None) == (self.grammar_error is None):
            raise ValueError("a proposal carries either a joint action or a grammar error")

    @property
    def valid(self) -> bool:
        return self.joint is not None


@dataclass(frozen=True)
class ScrutinyVerdict:
    passed: bool
    issues: Tuple[ScrutinyIssue, ...] = ()
    feedback: str = ""
    notes: Tuple[str, ...] = ()
    suggestions: Optional[Mapping[str, Any]] = None
    rationales: Mapping[str, str] = field(default_factory=dict)
    exchange: Optional[ChatExchange] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.passed != (not self.issues):
            raise ValueError("a verdict passes exactly when it lists no issues")

    @property
    def deterministic_issues(self) -> Tuple[ScrutinyIssue, ...]:
        return tuple(i for i in self.issues if not isinstance(i, AssessorIssue))


@dataclass
class InternalFeedbackState:
    limit: int
    iteration: int = 0
    feedback: Optional[str] = None
    dialogue: List[ChatExchange] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.limit < 1:
            raise ValueError("internal feedback limit must be >= 1")

    def advance(self) -> None:
        if self.iteration >= self.limit:
            raise ValueError("internal feedback iterations exceed the limit")
        self.iteration += 1


@dataclass(frozen=True)
class InternalFeedbackOutcome:
    suggestions: SuggestionMap
    state: InternalFeedbackState
    approved: bool
    retries: int
    notes: Tuple[str, ...] = ()


def summarize_dialogue(dialogue: Sequence[ChatExchange], width: int = 240) -> str:
    if not dialogue:
        return "(none)"
    lines = []
    for exchange in dialogue:
        text = " ".join(exchange.response_text.split())
        if len(text) > width:
            text = text[: width - 3] + "..."
        lines.append(f"#{exchange.seq} {exchange.role_tag}: {text}")
    return "\n".join(lines)


def feedback_text(notes: Sequence[FeedbackNote], env: BaseEnvironment) -> str:
    return "\n".join(
        f"- {agent_key(n.agent)} (suggested {env.format_action(n.suggestion.action.action)}): {n.reason}"
        for n in notes
    )


class CentralCritic:
    """Proposes, scrutinises and corrects joint actions for all agents."""

    def __init__(
        self,
        env: BaseEnvironment,
        gateway: LLMGateway,
        grammar_reask_limit: int = 3,
        on_event: Optional[EventSink] = None,
    ):
        self.env = env
        self.gateway = gateway
        self.grammar_reask_limit = grammar_reask_limit
        self.on_event = on_event

    def _emit(self, kind: str, **data: Any) -> None:
        if self.on_event is not None:
            self.on_event(kind, **data)

    def _base_bindings(self, state: EnvState) -> Dict[str, Any]:
        return {
            "environment": self.env.name,
            "agents": agents_text(self.env.agents),
            "state": state.text,
            "action_grammar": self.env.action_grammar(),
        }

    @staticmethod
    def _proposal_map(proposals: Sequence[Proposal]) -> Dict[str, Optional[JointAction]]:
        return {p.preference.value: p.joint for p in proposals}

    def _proposal_text(self, proposal: Optional[Proposal]) -> str:
        if proposal is None:
            return "(none)"
        error = proposal.grammar_error.reason if proposal.grammar_error else None
        return joint_text(self.env, proposal.joint, error)

    def _to_suggestions(
        self, terms: Mapping[str, Any], rationales: Mapping[str, str], fallback: str
    ) -> SuggestionMap:
        joint = parse_agent_terms(self.env, terms, self.env.agents)
        return {
            agent: Suggestion(agent, joint[agent], rationales.get(agent_key(agent), fallback))
            for agent in joint.agents
        }

    # Proposals ---------------------------------------------------------

    def proposal_request(
        self,
        preference: CriticPreference,
        state: EnvState,
        memory: DecisionMemory,
        feedback: Optional[str] = None,
    ) -> Tuple[PromptMessages, Dict[str, Any]]:
        """Prompt and call context of one proposer call."""
        bindings = {
            **self._base_bindings(state),
            "preference_clause": preference.clause,
            "memory": memory_text(self.env, memory),
            "notes": notes_text(memory),
            "feedback": feedback or "(none)",
            "output_format": output_format("action_map", self.env.agents),
        }
        messages = render_prompt("critic_proposal", bindings)
        context = {
            "kind": "proposal",
            "env": self.env,
            "state": state,
            "memory": memory,
            "preference": preference.value,
            "feedback": feedback,
        }
        return messages, context

    async def propose(
        self,
        preference: CriticPreference,
        state: EnvState,
        memory: DecisionMemory,
        feedback: Optional[str] = None,
    ) -> Proposal:
        """One proposer call; grammar problems come back inside the proposal."""
        messages, context = self.proposal_request(preference, state, memory, feedback)
        exchange = await self.gateway.complete(preference.role_tag, messages, context)
        agent_keys = [agent_key(a) for a in self.env.agents]
        result = parse_structured(exchange.response_text, "action_map", agent_keys)
        if not result.ok:
            return Proposal(preference, None, grammar_error=result.error, exchange=exchange)
        try:
            joint = parse_agent_terms(self.env, result.value["actions"], self.env.agents)
        except GrammarError as e:
            return Proposal(preference, None, grammar_error=e, exchange=exchange)
        return Proposal(preference, joint, result.thoughts or "", exchange=exchange)

    # Scrutiny ----------------------------------------------------------

    def deterministic_checks(self, state: EnvState, proposals: Sequence[Proposal]) -> List[ScrutinyIssue]:
        issues: List[ScrutinyIssue] = []
        for proposal in proposals:
            source = proposal.preference.value
            if proposal.grammar_error is not None:
                issues.append(GrammarIssue(source, proposal.grammar_error.reason))
                continue
            for conflict in self.env.detect_conflicts(state, proposal.joint):
                issues.append(ConflictIssue(source, conflict))
        return issues

    async def veracity_scrutiny(
        self, state: EnvState, memory: DecisionMemory, proposals: Sequence[Proposal]
    ) -> ScrutinyVerdict:
        """Automatic checks, then one assessor call; any failing check fails the verdict."""
        if len(proposals) != 2:
            raise ValueError("scrutiny needs exactly two proposals")
        by_preference = {p.preference: p for p in proposals}
        issues: List[ScrutinyIssue] = self.deterministic_checks(state, proposals)
        for issue in issues:
            logger.debug(f"scrutiny: {issue.describe()}")

        check_report = "\n".join(i.describe() for i in issues) or "all automatic checks passed"
        bindings = {
            **self._base_bindings(state),
            "memory": memory_text(self.env, memory),
            "notes": notes_text(memory),
            "proposal_explore": self._proposal_text(by_preference.get(CriticPreference.EXPLORE)),
            "proposal_exploit": self._proposal_text(by_preference.get(CriticPreference.EXPLOIT)),
            "check_report": check_report,
            "output_format": output_format("verdict", self.env.agents),
        }
        context = {
            "kind": "scrutiny",
            "env": self.env,
            "state": state,
            "memory": memory,
            "proposals": self._proposal_map(proposals),
            "issues": [i.describe() for i in issues],
        }
        exchange = await self.gateway.complete(
            ASSESSOR_ROLE, render_prompt("assessor_scrutiny", bindings), context
        )

        reply: Dict[str, Any] = {}
        result = parse_structured(exchange.response_text, "verdict")
        if result.ok:
            reply = result.value or {}
            verdict = reply["verdict"]
            if not verdict["pass"]:
                reported = verdict["issues"] or [reply.get("feedback") or "assessor rejected the proposals"]
                known = {i.describe() for i in issues}
                issues.extend(AssessorIssue(text) for text in reported if text not in known)
        else:
            # Without a readable verdict only the automatic checks decide.
            logger.warning(f"assessor: unreadable scrutiny reply: {result.error.reason}")

        return ScrutinyVerdict(
            passed=not issues,
            issues=tuple(issues),
            feedback=reply.get("feedback", ""),
            notes=tuple(reply.get("notes", ())),
            suggestions=reply.get("suggestions"),
            rationales=reply.get("rationales", {}),
            exchange=exchange,
        )

    # Correction --------------------------------------------------------

    async def belief_correction(
        self,
        state: EnvState,
        memory: DecisionMemory,
        proposals: Sequence[Proposal],
        verdict: ScrutinyVerdict,
    ) -> SuggestionMap:
        """Final per-agent suggestions blending both proposals.

        Uses the suggestions of the scrutiny reply; only when they are missing,
        malformed or conflicting is the assessor asked again.

        Raises:
            GrammarLimitExceeded: re-asks exhausted
        """
        if not verdict.passed:
            raise ValueError("belief correction requires a passed scrutiny")
        fallback_rationale = verdict.feedback

        def convert(terms: Mapping[str, Any], rationales: Mapping[str, str]) -> SuggestionMap:
            suggestions = self._to_suggestions(terms, rationales, fallback_rationale)
            conflicts = self.env.detect_conflicts(state, joint_from_suggestions(suggestions))
            if conflicts:
                raise GrammarError("suggestions conflict: " + "; ".join(c.detail for c in conflicts))
            return suggestions

        if verdict.suggestions is None:
            error = GrammarError("the scrutiny reply carried no suggestions")
        else:
            try:
                return convert(verdict.suggestions, verdict.rationales)
            except GrammarError as e:
                error = e
        logger.info(f"assessor: re-asking for suggestions ({error.reason})")

        by_preference = {p.preference: p for p in proposals}
        bindings = {
            "agents": agents_text(self.env.agents),
            "state": state.text,
            "action_grammar": self.env.action_grammar(),
            "proposal_explore": self._proposal_text(by_preference.get(CriticPreference.EXPLORE)),
            "proposal_exploit": self._proposal_text(by_preference.get(CriticPreference.EXPLOIT)),
            "error": error.reason,
            "output_format": output_format("suggestion_map", self.env.agents),
        }
        context = {
            "kind": "correction",
            "env": self.env,
            "state": state,
            "memory": memory,
            "proposals": self._proposal_map(proposals),
        }
        suggestions, _ = await ask_structured(
            self.gateway,
            ASSESSOR_ROLE,
            render_prompt("assessor_correction", bindings),
            "suggestion_map",
            context,
            lambda value: convert(value["suggestions"], value.get("rationales", {})),
            max_attempts=self.grammar_reask_limit,
            agents=self.env.agents,
        )
        return suggestions

    # Internal feedback -------------------------------------------------

    @staticmethod
    def synthesize_feedback(iteration: int, verdict: ScrutinyVerdict, proposals: Sequence[Proposal], env: BaseEnvironment) -> str:
        lines = [f"Scrutiny failed at iteration {iteration}:"]
        lines.extend(f"- {issue.describe()}" for issue in verdict.issues)
        if verdict.feedback:
            lines.append(f"Assessor feedback: {verdict.feedback}")
        lines.append("Failing proposals:")
        for proposal in proposals:
            error = proposal.grammar_error.reason if proposal.grammar_error else None
            lines.append(f"{proposal.preference.value}: {joint_text(env, proposal.joint, error)}")
        return "\n".join(lines)

    def _deterministically_valid(self, state: EnvState, proposals: Sequence[Proposal]) -> Optional[Proposal]:
        usable = [
            p for p in proposals if p.valid and not self.env.detect_conflicts(state, p.joint)
        ]
        for preference in (CriticPreference.EXPLOIT, CriticPreference.EXPLORE):
            for proposal in usable:
                if proposal.preference is preference:
                    return proposal
        return None

    async def internal_feedback_loop(
        self, state: EnvState, memory: DecisionMemory, limit: int
    ) -> InternalFeedbackOutcome:
        """Propose, scrutinise and retry with feedback, at most ``limit`` times.

        Raises:
            InternalFeedbackExhausted: no iteration produced a usable proposal
        """
        loop_state = InternalFeedbackState(limit=limit)
        last_usable: Optional[Proposal] = None
        notes: List[str] = []

        while loop_state.iteration < limit:
            loop_state.advance()
            iteration = loop_state.iteration
            self._emit("internal_iteration", iteration=iteration)
            proposals = await asyncio.gather(
                self.propose(CriticPreference.EXPLORE, state, memory, loop_state.feedback),
                self.propose(CriticPreference.EXPLOIT, state, memory, loop_state.feedback),
            )
            loop_state.dialogue.extend(p.exchange for p in proposals if p.exchange is not None)

            verdict = await self.veracity_scrutiny(state, memory, proposals)
            if verdict.exchange is not None:
                loop_state.dialogue.append(verdict.exchange)
            notes.extend(verdict.notes)
            self._emit(
                "scrutiny",
                iteration=iteration,
                passed=verdict.passed,
                issues=[i.describe() for i in verdict.issues],
            )

            if verdict.passed:
                suggestions = await self.belief_correction(state, memory, proposals, verdict)
                return InternalFeedbackOutcome(
                    suggestions, loop_state, approved=True, retries=iteration - 1, notes=tuple(notes)
                )

            usable = self._deterministically_valid(state, proposals)
            if usable is not None:
                last_usable = usable
            loop_state.feedback = self.synthesize_feedback(iteration, verdict, proposals, self.env)
            logger.info(f"internal feedback {iteration}/{limit}: {len(verdict.issues)} issue(s)")

        if last_usable is None or last_usable.joint is None:
            self._emit("internal_exhausted", iteration=limit, usable=False)
            logger.error(f"internal feedback exhausted after {limit} iteration(s)")
            raise InternalFeedbackExhausted(limit)

        self._emit("internal_exhausted", iteration=limit, usable=True)
        logger.warning(
            f"internal feedback exhausted; proceeding with the last valid "
            f"{last_usable.preference.value} proposal"
        )
        joint = last_usable.joint
        suggestions = {
            agent: Suggestion(agent, joint[agent], last_usable.rationale) for agent in joint.agents
        }
        return InternalFeedbackOutcome(
            suggestions, loop_state, approved=False, retries=limit, notes=tuple(notes)
        )

    # External feedback -------------------------------------------------

    async def revise_suggestions(
        self,
        state: EnvState,
        memory: DecisionMemory,
        suggestions: SuggestionMap,
        dialogue: Sequence[ChatExchange],
        notes: Sequence[FeedbackNote],
    ) -> SuggestionMap:
        """Regenerate the suggestions of the agents named in ``notes`` only.

        Raises:
            ValueError: ``notes`` is empty
            GrammarLimitExceeded: re-asks exhausted
        """
        if not notes:
            raise ValueError("revise_suggestions needs at least one feedback note")
        revise_agents: List[AgentId] = sorted({n.agent for n in notes})
        current = joint_from_suggestions(suggestions)

        bindings = {
            "environment": self.env.name,
            "state": state.text,
            "action_grammar": self.env.action_grammar(),
            "memory": memory_text(self.env, memory),
            "notes": notes_text(memory),
            "suggestions": joint_text(self.env, current),
            "dialogue": summarize_dialogue(dialogue),
            "feedback": feedback_text(notes, self.env),
            "revise_agents": agents_text(revise_agents),
            "output_format": output_format("suggestion_map", revise_agents),
        }
        context = {
            "kind": "revision",
            "env": self.env,
            "state": state,
            "memory": memory,
            "suggestions": current,
            "revise_agents": revise_agents,
        }

        def convert(value: Dict[str, Any]) -> SuggestionMap:
            terms = value["suggestions"]
            missing = [agent_key(a) for a in revise_agents if agent_key(a) not in terms]
            if missing:
                raise GrammarError(f"missing agent: {', '.join(missing)}")
            wanted = {agent_key(a): terms[agent_key(a)] for a in revise_agents}
            joint = parse_agent_terms(self.env, wanted)
            rationales = value.get("rationales", {})
            revised = dict(suggestions)
            for agent in revise_agents:
                revised[agent] = Suggestion(
                    agent, joint[agent], rationales.get(agent_key(agent), value.get("thoughts", ""))
                )
            return revised

        revised, _ = await ask_structured(
            self.gateway,
            ASSESSOR_ROLE,
            render_prompt("assessor_revision", bindings),
            "suggestion_map",
            context,
            convert,
            max_attempts=1 + self.grammar_reask_limit,
            agents=revise_agents,
        )
        self._emit("revision", agents=[agent_key(a) for a in revise_agents])
        return revised
