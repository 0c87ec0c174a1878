"""Offline backend driven by oracle policies, with canned-response overrides."""

import logging
from collections import deque
from typing import Any, Deque, Dict, Iterable, Mapping, Optional, Tuple

from ..validators.structured_parser import serialize_structured
from .base import (
    BaseLLMBackend,
    GenerationParams,
    ParsedResponse,
    PromptMessages,
    TokenUsage,
    estimate_prompt_tokens,
    estimate_tokens,
)
from .oracle_policies import OraclePolicy, oracle_for

logger = logging.getLogger(__name__)


class ScriptedBackend(BaseLLMBackend):
    """Deterministic test double.

    Each call is answered from the ``overrides`` queue of its role tag when
    one is pending (used to inject faults), otherwise by the environment's
    oracle policy using the structured context behind the prompt. Token
    usage is the whitespace estimate and latency is always 0.
    """

    def __init__(self, overrides: Optional[Mapping[str, Iterable[str]]] = None):
        self._overrides: Dict[str, Deque[str]] = {
            role_tag: deque(responses) for role_tag, responses in (overrides or {}).items()
        }
        self._oracle_cache: Optional[Tuple[Any, OraclePolicy]] = None

    @property
    def backend_id(self) -> str:
        return "scripted"

    def push_override(self, role_tag: str, response: str) -> None:
        self._overrides.setdefault(role_tag, deque()).append(response)

    def pending_overrides(self, role_tag: str) -> int:
        return len(self._overrides.get(role_tag, ()))

    def _oracle(self, env: Any) -> OraclePolicy:
        """Oracle of ``env``; only the most recent environment is kept."""
        if self._oracle_cache is None or self._oracle_cache[0] is not env:
            self._oracle_cache = (env, oracle_for(env))
        return self._oracle_cache[1]

    async def complete(
        self,
        role_tag: str,
        messages: PromptMessages,
        params: GenerationParams,
        context: Optional[Mapping[str, Any]] = None,
    ) -> ParsedResponse:
        queue = self._overrides.get(role_tag)
        if queue:
            content = queue.popleft()
            logger.debug(f"{role_tag}: canned response ({len(queue)} left)")
        else:
            if context is None:
                raise ValueError(f"{role_tag}: scripted backend needs the call context")
            reply = self._oracle(context["env"]).respond(role_tag, context)
            content = serialize_structured(reply)

        usage = TokenUsage.of(estimate_prompt_tokens(messages), estimate_tokens(content))
        return ParsedResponse(
            content=content,
            usage=usage,
            model="scripted-oracle",
            metadata={"latency_ms": 0},
        )
