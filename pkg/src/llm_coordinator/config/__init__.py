"""Configuration package initialization."""

from .settings import (
    GenerationConfig,
    LoggingConfig,
    LoopConfig,
    ProcessingConfig,
    ProviderConfig,
    RateLimitConfig,
    Settings,
)

__all__ = [
    "GenerationConfig",
    "LoggingConfig",
    "LoopConfig",
    "ProcessingConfig",
    "ProviderConfig",
    "RateLimitConfig",
    "Settings",
]
