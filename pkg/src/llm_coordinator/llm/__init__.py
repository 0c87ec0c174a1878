"""LLM package initialization."""

from .base import (
    BaseLLMBackend,
    ChatExchange,
    GenerationParams,
    ParsedResponse,
    ThoughtExtractor,
    TokenUsage,
    estimate_prompt_tokens,
    estimate_tokens,
    role_family,
)
from .openai_provider import OpenAIBackend
from .templates import PromptTemplate, instantiate_prompt, load_template, render_prompt

__all__ = [
    "BaseLLMBackend",
    "ChatExchange",
    "GenerationParams",
    "OpenAIBackend",
    "ParsedResponse",
    "PromptTemplate",
    "ThoughtExtractor",
    "TokenUsage",
    "estimate_prompt_tokens",
    "estimate_tokens",
    "instantiate_prompt",
    "load_template",
    "render_prompt",
    "role_family",
]
