"""Prompt bindings shared by the critic, the actors and the baselines."""

import json
import logging
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple, TypeVar

from ..core.environment import BaseEnvironment
from ..core.types import AgentId, JointAction, agent_key
from ..errors import GrammarError, GrammarLimitExceeded
from ..llm.base import ChatExchange, PromptMessages
from ..llm.gateway import LLMGateway
from ..llm.templates import render_prompt
from ..memory import DecisionMemory, render_memory, render_notes, summarize_memory_gs
from ..validators import parse_structured

logger = logging.getLogger(__name__)

T = TypeVar("T")

#: ``sink(kind, **data)`` receives loop events for the transcript.
EventSink = Callable[..., None]


def _agent_map_example(agents: Sequence[AgentId]) -> str:
    shown = list(agents[:2])
    entries = ", ".join(f'"{agent_key(a)}": <action>' for a in shown)
    if len(agents) > 2:
        entries += ", ..."
    return "{" + entries + "}"


def output_format(kind: str, agents: Sequence[AgentId] = ()) -> str:
    """Literal reply shape requested from the model for reply ``kind``."""
    agent_map = _agent_map_example(agents)
    if kind == "action_map":
        return '{"thoughts": "<short reasoning>", "actions": ' + agent_map + "}"
    if kind == "suggestion_map":
        return '{"thoughts": "<short reasoning>", "suggestions": ' + agent_map + "}"
    if kind == "verdict":
        return (
            '{"thoughts": "<short reasoning>", '
            '"verdict": {"pass": true or false, "issues": ["<problem>"]}, '
            '"feedback": "<what the critics must fix>", '
            '"suggestions": ' + agent_map + ", "
            '"notes": ["<lesson worth remembering>"]}'
        )
    if kind == "feedback_list":
        return '{"feedback": [{"agent": "agent_<i>", "reason": "<issue and how to improve>"}]}'
    if kind == "single_action":
        return '{"thoughts": "<short reasoning>", "action": <action>}'
    raise KeyError(f"Unknown reply kind: {kind}")


def agents_text(agents: Sequence[AgentId]) -> str:
    return ", ".join(agent_key(a) for a in agents)


def memory_text(env: BaseEnvironment, memory: DecisionMemory) -> str:
    """Trajectory window, plus the running summary for gs."""
    rendered = render_memory(memory, env.name)
    if env.name == "gs":
        rendered += "\n" + summarize_memory_gs(memory)
    return rendered


def notes_text(memory: DecisionMemory) -> str:
    return render_notes(memory)


def joint_text(env: BaseEnvironment, joint: Optional[JointAction], error: Optional[str] = None) -> str:
    if joint is None:
        return f"unparseable ({error or 'no reply'})"
    return json.dumps(env.format_joint(joint), sort_keys=True)


def parse_agent_terms(
    env: BaseEnvironment, terms: Mapping[str, Any], agents: Optional[Sequence[AgentId]] = None
) -> JointAction:
    """Parse an ``agent_i -> term`` map into a joint action.

    Raises GrammarError for a malformed term or, when ``agents`` is given,
    for a map that does not name exactly those agents.
    """
    parsed: Dict[AgentId, Any] = {}
    for key, term in terms.items():
        prefix, _, index = key.partition("_")
        if prefix != "agent" or not index.isdigit():
            raise GrammarError(f"malformed agent key: {key}")
        agent = AgentId(int(index))
        if agent not in env.agents:
            raise GrammarError(f"unknown agent: {key}")
        parsed[agent] = env.parse_action(agent, term)
    if agents is not None:
        missing = [agent_key(a) for a in agents if a not in parsed]
        if missing:
            raise GrammarError(f"missing agent: {', '.join(missing)}")
        extra = [agent_key(a) for a in parsed if a not in agents]
        if extra:
            raise GrammarError(f"unknown agent: {', '.join(extra)}")
    return JointAction.from_terms(parsed)


def reask_messages(
    messages: PromptMessages, response_text: str, error: GrammarError, kind: str, agents: Sequence[AgentId]
) -> PromptMessages:
    """Conversation extended with the bad reply and a request to answer again."""
    reask = render_prompt(
        "grammar_reask", {"error": error.reason, "output_format": output_format(kind, agents)}
    )
    return tuple(messages) + (("assistant", response_text),) + reask


async def ask_structured(
    gateway: LLMGateway,
    role_tag: str,
    messages: PromptMessages,
    kind: str,
    context: Mapping[str, Any],
    convert: Callable[[Dict[str, Any]], T],
    max_attempts: int,
    agents: Sequence[AgentId] = (),
) -> Tuple[T, ChatExchange]:
    """Call the model until its reply parses and converts, at most ``max_attempts`` times.

    ``convert`` may raise GrammarError to reject a reply that matches the
    schema but not the environment's action grammar.

    Raises:
        GrammarLimitExceeded: no usable reply within ``max_attempts`` calls
    """
    last_error = GrammarError("no attempt made")
    for attempt in range(1, max_attempts + 1):
        exchange = await gateway.complete(role_tag, messages, {**context, "attempt": attempt})
        result = parse_structured(exchange.response_text, kind)
        if result.ok:
            try:
                return convert(result.value or {}), exchange
            except GrammarError as e:
                last_error = e
        else:
            last_error = result.error or last_error
        logger.warning(
            f"{role_tag}: unusable {kind} reply (attempt {attempt}/{max_attempts}): {last_error.reason}"
        )
        messages = reask_messages(messages, exchange.response_text, last_error, kind, agents)
    raise GrammarLimitExceeded(role_tag, max_attempts, last_error)
