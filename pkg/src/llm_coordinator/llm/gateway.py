"""Single entry point for model calls: limits, retries, ordering and accounting."""

import asyncio
import logging
import time
from collections import OrderedDict
from typing import Any, Dict, List, Mapping, Optional, Protocol

from ..config import GenerationConfig, ProcessingConfig
from ..errors import ContextLengthExceeded, TransportError
from .base import (
    BaseLLMBackend,
    ChatExchange,
    GenerationParams,
    PromptMessages,
    TokenUsage,
    estimate_prompt_tokens,
    role_family,
)

logger = logging.getLogger(__name__)


class ExchangeRecorder(Protocol):
    def record_exchange(self, exchange: ChatExchange) -> None:
        ...


class TokenLedger:
    """Running token totals per role tag."""

    def __init__(self) -> None:
        self._by_role: Dict[str, TokenUsage] = {}

    def add(self, exchange: ChatExchange) -> None:
        current = self._by_role.get(exchange.role_tag, TokenUsage())
        self._by_role[exchange.role_tag] = current + exchange.usage

    def by_role(self) -> Dict[str, TokenUsage]:
        return OrderedDict(sorted(self._by_role.items()))

    def by_family(self) -> Dict[str, TokenUsage]:
        """Totals per module (all ``actor_i`` tags fold into ``actor``)."""
        totals: Dict[str, TokenUsage] = {}
        for role_tag, usage in self._by_role.items():
            family = role_family(role_tag)
            totals[family] = totals.get(family, TokenUsage()) + usage
        return OrderedDict(sorted(totals.items()))

    def total(self) -> TokenUsage:
        result = TokenUsage()
        for usage in self._by_role.values():
            result = result + usage
        return result


class LLMGateway:
    """Wraps a backend with the context check, retries and the transcript hook.

    Sequence numbers are taken under a lock when a call starts, so the
    exchange order is total and independent of completion order.
    """

    def __init__(
        self,
        backend: BaseLLMBackend,
        generation: Optional[GenerationConfig] = None,
        processing: Optional[ProcessingConfig] = None,
        context_limit: int = 8192,
        recorder: Optional[ExchangeRecorder] = None,
        seed: Optional[int] = None,
    ):
        self.backend = backend
        self.generation = generation or GenerationConfig()
        self.processing = processing or ProcessingConfig()
        self.context_limit = context_limit
        self.recorder = recorder
        self.seed = seed
        self.ledger = TokenLedger()
        self.exchanges: List[ChatExchange] = []
        self.rate_limiter = backend.get_rate_limiter()
        self._semaphore = asyncio.Semaphore(self.processing.parallelism)
        self._lock = asyncio.Lock()
        self._next_seq = 0

    @property
    def call_count(self) -> int:
        return len(self.exchanges)

    @property
    def started(self) -> int:
        """Calls that have been assigned a sequence number."""
        return self._next_seq

    def params_for(self, role_tag: str) -> GenerationParams:
        return GenerationParams(
            temperature=self.generation.temperature_for(role_tag),
            max_tokens=self.generation.max_tokens,
            top_p=self.generation.top_p,
            seed=self.seed,
        )

    async def complete(
        self,
        role_tag: str,
        messages: PromptMessages,
        context: Optional[Mapping[str, Any]] = None,
    ) -> ChatExchange:
        """Run one model call and record it.

        Raises:
            ContextLengthExceeded: prompt estimate above the context limit
            TransportError: backend still failing after ``max_retries`` retries
        """
        prompt_tokens = estimate_prompt_tokens(messages)
        if prompt_tokens > self.context_limit:
            logger.error(f"{role_tag}: prompt of ~{prompt_tokens} tokens exceeds {self.context_limit}")
            raise ContextLengthExceeded(role_tag, prompt_tokens, self.context_limit)

        async with self._lock:
            seq = self._next_seq
            self._next_seq += 1

        params = self.params_for(role_tag)
        async with self._semaphore:
            response = await self._call_with_retries(role_tag, messages, params, context)

        latency_ms = response.metadata.get("latency_ms")
        if latency_ms is None:
            latency_ms = 0
        exchange = ChatExchange(
            seq=seq,
            role_tag=role_tag,
            prompt_messages=tuple(messages),
            response_text=response.content,
            usage=response.usage or TokenUsage(),
            latency_ms=int(latency_ms),
            backend_id=response.metadata.get("backend_id", self.backend.backend_id),
            thoughts=response.thoughts,
        )
        self.exchanges.append(exchange)
        self.ledger.add(exchange)
        if self.recorder is not None:
            self.recorder.record_exchange(exchange)
        logger.debug(
            f"#{seq} {role_tag}: {exchange.usage.total_tokens} tokens, "
            f"response: {exchange.response_text[:200]!r}"
        )
        return exchange

    async def _call_with_retries(
        self,
        role_tag: str,
        messages: PromptMessages,
        params: GenerationParams,
        context: Optional[Mapping[str, Any]],
    ):
        attempts = self.processing.max_retries + 1
        for attempt in range(attempts):
            try:
                if self.rate_limiter is not None:
                    await self.rate_limiter.acquire()
                started = time.monotonic()
                response = await asyncio.wait_for(
                    self.backend.complete(role_tag, messages, params, context),
                    timeout=self.processing.timeout_seconds,
                )
                if self.backend.is_live and "latency_ms" not in response.metadata:
                    response.metadata["latency_ms"] = int((time.monotonic() - started) * 1000)
                return response
            except (TransportError, asyncio.TimeoutError) as e:
                if attempt == attempts - 1:
                    logger.error(f"{role_tag}: transport failed after {attempts} attempt(s): {e}")
                    if isinstance(e, TransportError):
                        raise
                    raise TransportError(f"{role_tag}: timed out") from e
                delay = self.processing.retry_backoff_seconds * (2**attempt)
                logger.warning(
                    f"{role_tag}: transport error (attempt {attempt + 1}/{attempts}), "
                    f"retrying in {delay:.1f}s: {e}"
                )
                await asyncio.sleep(delay)
        raise AssertionError("unreachable")
