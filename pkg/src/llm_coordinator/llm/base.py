"""Backend interface and the exchange/usage records shared by all backends."""

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, Mapping, Optional, Sequence, Tuple

if TYPE_CHECKING:
    from ..utils.rate_limiter import RateLimiter

PromptMessages = Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class TokenUsage:
    """Token counts of one or more calls; ``total = prompt + completion``."""

    prompt_tokens: int = 0
    completion_tokens: int = 0
    total_tokens: int = 0

    def __post_init__(self) -> None:
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be >= 0")
        if self.total_tokens != self.prompt_tokens + self.completion_tokens:
            raise ValueError("total_tokens must equal prompt_tokens + completion_tokens")

    @classmethod
    def of(cls, prompt_tokens: int, completion_tokens: int) -> "TokenUsage":
        return cls(prompt_tokens, completion_tokens, prompt_tokens + completion_tokens)

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage.of(
            self.prompt_tokens + other.prompt_tokens,
            self.completion_tokens + other.completion_tokens,
        )

    def to_dict(self) -> Dict[str, int]:
        return {
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "total_tokens": self.total_tokens,
        }


@dataclass(frozen=True)
class GenerationParams:
    temperature: float
    max_tokens: int
    top_p: float = 1.0
    seed: Optional[int] = None


class ParsedResponse:
    """Normalized backend response."""

    def __init__(
        self,
        content: str,
        usage: Optional[TokenUsage] = None,
        model: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None,
        thoughts: Optional[str] = None,
    ):
        self.content = content
        self.usage = usage
        self.model = model
        self.metadata = metadata or {}
        self.thoughts = thoughts

    def __repr__(self) -> str:
        tokens = self.usage.total_tokens if self.usage else None
        return f"<ParsedResponse(model='{self.model}', tokens={tokens})>"


@dataclass(frozen=True)
class ChatExchange:
    """One model call: prompt, response, token usage and timing.

    ``seq`` is assigned when the call starts, so it orders exchanges totally
    even when calls complete out of order.
    """

    seq: int
    role_tag: str
    prompt_messages: PromptMessages
    response_text: str
    usage: TokenUsage
    latency_ms: int
    backend_id: str
    thoughts: Optional[str] = None

    def to_record(self) -> Dict[str, Any]:
        return {
            "seq": self.seq,
            "role_tag": self.role_tag,
            "prompt_messages": [list(message) for message in self.prompt_messages],
            "response_text": self.response_text,
            "thoughts": self.thoughts,
            "usage": self.usage.to_dict(),
            "latency_ms": self.latency_ms,
            "backend_id": self.backend_id,
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> "ChatExchange":
        usage = record["usage"]
        return cls(
            seq=int(record["seq"]),
            role_tag=record["role_tag"],
            prompt_messages=tuple((speaker, text) for speaker, text in record["prompt_messages"]),
            response_text=record["response_text"],
            usage=TokenUsage(
                usage["prompt_tokens"], usage["completion_tokens"], usage["total_tokens"]
            ),
            latency_ms=int(record["latency_ms"]),
            backend_id=record["backend_id"],
            thoughts=record.get("thoughts"),
        )


def estimate_tokens(text: str) -> int:
    """Whitespace-piece token estimate; deterministic, not a real tokenizer."""
    return len(text.split())


def estimate_prompt_tokens(messages: Sequence[Tuple[str, str]]) -> int:
    return sum(estimate_tokens(text) for _, text in messages)


def role_family(role_tag: str) -> str:
    """Module a role tag belongs to (``actor_3`` -> ``actor``)."""
    for family in ("actor", "debater"):
        if role_tag.startswith(family + "_"):
            return family
    return role_tag


class BaseLLMBackend(ABC):
    """Abstract base for live, scripted and replay backends."""

    #: Live backends go through the provider rate limiter and report real usage.
    is_live: bool = False

    @property
    @abstractmethod
    def backend_id(self) -> str:
        """Identifier stored on every exchange."""

    @abstractmethod
    async def complete(
        self,
        role_tag: str,
        messages: PromptMessages,
        params: GenerationParams,
        context: Optional[Mapping[str, Any]] = None,
    ) -> ParsedResponse:
        """Run one chat completion.

        Args:
            role_tag: Framework role issuing the call
            messages: Ordered (speaker, text) pairs
            params: Sampling parameters
            context: Structured inputs behind the prompt; only scripted
                backends read it

        Returns:
            Parsed response with content, usage and metadata
        """

    def get_rate_limiter(self) -> Optional["RateLimiter"]:
        """Provider-specific rate limiter, if any."""
        return None


class ThoughtExtractor:
    """Separates ``<think>``/``<reason>`` reasoning from the answer text."""

    PATTERNS = (
        re.compile(r"<think>(.*?)</think>", re.DOTALL | re.IGNORECASE),
        re.compile(r"<reason>(.*?)</reason>", re.DOTALL | re.IGNORECASE),
    )

    @classmethod
    def extract(
        cls, content: str, separate_reasoning: Optional[str] = None
    ) -> Tuple[str, Optional[str]]:
        """Return ``(answer, thoughts)``.

        Reasoning supplied separately by the endpoint wins over tags.
        """
        if separate_reasoning and separate_reasoning.strip():
            return content, separate_reasoning.strip()
        for pattern in cls.PATTERNS:
            match = pattern.search(content)
            if match:
                return pattern.sub("", content).strip(), match.group(1).strip()
        return content, None
