"""OpenAI-compatible chat-completion backend."""

import logging
import time
from typing import Any, Mapping, Optional

import openai
from openai import AsyncOpenAI

from ..config import ProviderConfig
from ..errors import TransportError
from ..utils.rate_limiter import RateLimiter
from .base import (
    BaseLLMBackend,
    GenerationParams,
    ParsedResponse,
    PromptMessages,
    ThoughtExtractor,
    TokenUsage,
    estimate_prompt_tokens,
    estimate_tokens,
)

logger = logging.getLogger(__name__)


class OpenAIBackend(BaseLLMBackend):
    """Live backend speaking the OpenAI chat-completion protocol.

    Works against any compatible endpoint (OpenAI, vLLM, Ollama, ...);
    endpoint, model and key fall back to ``OPENAI_BASE_URL``,
    ``OPENAI_MODEL`` and ``OPENAI_API_KEY``.
    """

    is_live = True

    def __init__(self, config: ProviderConfig, name: str = "openai", timeout_seconds: int = 120):
        """Initialize the backend.

        Args:
            config: Provider configuration
            name: Provider name used for logs and the rate limiter
            timeout_seconds: Per-request timeout
        """
        self.config = config
        self.name = name
        api_key = config.get_api_key()
        if not api_key:
            raise ValueError("An API key is required (set OPENAI_API_KEY or api_key)")

        client_kwargs: dict = {"api_key": api_key, "timeout": timeout_seconds, "max_retries": 0}
        base_url = config.get_base_url()
        if base_url:
            client_kwargs["base_url"] = base_url
        self.client = AsyncOpenAI(**client_kwargs)
        self.model = config.get_model()
        self._rate_limiter = RateLimiter(config.rate_limit, name)

    @property
    def backend_id(self) -> str:
        return f"{self.name}:{self.model}"

    def get_rate_limiter(self) -> Optional[RateLimiter]:
        return self._rate_limiter

    async def complete(
        self,
        role_tag: str,
        messages: PromptMessages,
        params: GenerationParams,
        context: Optional[Mapping[str, Any]] = None,
    ) -> ParsedResponse:
        start_time = time.monotonic()
        request: dict = {
            "model": self.model,
            "messages": [{"role": speaker, "content": text} for speaker, text in messages],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "top_p": params.top_p,
        }
        if params.seed is not None:
            request["seed"] = params.seed

        try:
            response = await self.client.chat.completions.create(**request)
        except (openai.APIConnectionError, openai.APITimeoutError, openai.RateLimitError) as e:
            raise TransportError(f"{self.name}: {e}") from e
        except openai.APIStatusError as e:
            if e.status_code >= 500:
                raise TransportError(f"{self.name}: HTTP {e.status_code}") from e
            raise

        processing_time = int((time.monotonic() - start_time) * 1000)
        logger.debug(f"{role_tag}: {self.backend_id} answered in {processing_time} ms")
        return self.parse_response(response, messages, processing_time)

    def parse_response(
        self, raw_response: Any, messages: PromptMessages, latency_ms: int = 0
    ) -> ParsedResponse:
        """Normalize a chat-completion response.

        Endpoints that omit ``usage`` fall back to the whitespace estimator.
        """
        message = raw_response.choices[0].message
        content = message.content or ""
        separate_reasoning = getattr(message, "reasoning", None)
        answer, thoughts = ThoughtExtractor.extract(content, separate_reasoning)

        if raw_response.usage:
            usage = TokenUsage.of(
                raw_response.usage.prompt_tokens, raw_response.usage.completion_tokens
            )
        else:
            usage = TokenUsage.of(estimate_prompt_tokens(messages), estimate_tokens(content))

        return ParsedResponse(
            content=answer,
            usage=usage,
            model=raw_response.model,
            thoughts=thoughts,
            metadata={
                "latency_ms": latency_ms,
                "finish_reason": raw_response.choices[0].finish_reason,
            },
        )
