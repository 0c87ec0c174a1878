"""Backend answering from a recorded transcript."""

import logging
from collections import defaultdict, deque
from typing import Any, Deque, Dict, Iterable, Mapping, Optional

from ..errors import ReplayDivergence
from .base import BaseLLMBackend, ChatExchange, GenerationParams, ParsedResponse, PromptMessages

logger = logging.getLogger(__name__)


class ReplayBackend(BaseLLMBackend):
    """Replays recorded exchanges, one queue per role tag in sequence order.

    Keying by role tag keeps replay exact even when calls of different roles
    run concurrently. With ``strict`` the prompt must also match the record
    byte for byte.
    """

    def __init__(self, exchanges: Iterable[ChatExchange], strict: bool = True):
        self._queues: Dict[str, Deque[ChatExchange]] = defaultdict(deque)
        for exchange in sorted(exchanges, key=lambda e: e.seq):
            self._queues[exchange.role_tag].append(exchange)
        self.strict = strict

    @property
    def backend_id(self) -> str:
        return "replay"

    @property
    def remaining(self) -> int:
        return sum(len(queue) for queue in self._queues.values())

    async def complete(
        self,
        role_tag: str,
        messages: PromptMessages,
        params: GenerationParams,
        context: Optional[Mapping[str, Any]] = None,
    ) -> ParsedResponse:
        queue = self._queues.get(role_tag)
        if not queue:
            raise ReplayDivergence(f"No recorded exchange left for role {role_tag}")
        exchange = queue.popleft()
        if self.strict and tuple(messages) != exchange.prompt_messages:
            raise ReplayDivergence(
                f"Prompt for {role_tag} differs from recorded exchange #{exchange.seq}"
            )
        return ParsedResponse(
            content=exchange.response_text,
            usage=exchange.usage,
            model=exchange.backend_id,
            thoughts=exchange.thoughts,
            metadata={"latency_ms": exchange.latency_ms, "backend_id": exchange.backend_id},
        )
