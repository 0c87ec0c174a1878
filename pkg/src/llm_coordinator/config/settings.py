"""Configuration management for LLM Coordinator."""

import json
import logging
import os
from typing import Dict, Optional

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATHS = (
    "config.json",
    "config/config.json",
    os.path.join("~", ".llm_coordinator", "config.json"),
)


class RateLimitConfig(BaseModel):
    """Rate limiting configuration."""

    requests_per_minute: int = Field(default=60, ge=1, description="Maximum requests per minute")
    requests_per_hour: int = Field(default=1000, ge=1, description="Maximum requests per hour")


class ProviderConfig(BaseModel):
    """Configuration for an OpenAI-compatible chat-completion endpoint."""

    type: str = Field(default="openai", description="Provider type (only 'openai' is supported)")
    api_key: str = Field(default="", description="API key (empty = OPENAI_API_KEY)")
    base_url: str = Field(default="", description="Endpoint base URL (empty = OPENAI_BASE_URL)")
    model: str = Field(default="", description="Model name (empty = OPENAI_MODEL)")
    context_limit: int = Field(
        default=8192, ge=1, description="Prompt token ceiling checked before every call"
    )
    rate_limit: RateLimitConfig = Field(
        default_factory=RateLimitConfig, description="Rate limiting settings"
    )

    def get_api_key(self) -> str:
        """Get API key from config or environment variable."""
        return self.api_key or os.getenv("OPENAI_API_KEY", "")

    def get_base_url(self) -> Optional[str]:
        return self.base_url or os.getenv("OPENAI_BASE_URL") or None

    def get_model(self) -> str:
        return self.model or os.getenv("OPENAI_MODEL", "gpt-4")


class GenerationConfig(BaseModel):
    """Sampling parameters, with one temperature per framework role."""

    critic_temperature: float = Field(default=0.7, ge=0.0, le=2.0)
    assessor_temperature: float = Field(default=0.2, ge=0.0, le=2.0)
    actor_temperature: float = Field(default=0.3, ge=0.0, le=2.0)
    debater_temperature: float = Field(default=0.7, ge=0.0, le=2.0)
    max_tokens: int = Field(default=1000, ge=1, description="Maximum tokens to generate")
    top_p: float = Field(default=1.0, ge=0.0, le=1.0, description="Nucleus sampling parameter")

    def temperature_for(self, role_tag: str) -> float:
        """Temperature for a role tag such as ``critic_explore`` or ``actor_3``."""
        if role_tag.startswith("critic"):
            return self.critic_temperature
        if role_tag.startswith("assessor"):
            return self.assessor_temperature
        if role_tag.startswith("debater"):
            return self.debater_temperature
        return self.actor_temperature


class ProcessingConfig(BaseModel):
    """Call scheduling and retry configuration."""

    max_retries: int = Field(default=3, ge=0, description="Transport retries per call")
    retry_backoff_seconds: float = Field(
        default=1.0, ge=0.0, description="Base delay of the exponential retry backoff"
    )
    timeout_seconds: int = Field(default=120, ge=1, description="Request timeout in seconds")
    parallelism: int = Field(default=8, ge=1, description="Maximum in-flight model calls")
    trial_concurrency: int = Field(default=1, ge=1, description="Episodes run concurrently by a batch")
    show_progress: bool = Field(default=True, description="Show a progress bar for batches")


class LoopConfig(BaseModel):
    """Default iteration limits of the decision loop."""

    if_limit: int = Field(default=3, ge=1, description="Internal feedback iterations IF")
    ef_limit: int = Field(default=3, ge=1, description="External feedback iterations EF")
    grammar_reask_limit: int = Field(default=3, ge=1, description="Re-asks after unparseable structured replies")
    debate_rounds: int = Field(default=2, ge=1, description="Debate rounds K")
    grid_memory_window: int = Field(default=5, ge=1, description="Memory window L for grid runs")
    decentralized_agent_warning: int = Field(
        default=20, ge=1, description="Warn when decentralized runs have this many agents"
    )


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: str = Field(default="INFO", description="Log level (DEBUG, INFO, WARNING, ERROR)")
    file_path: Optional[str] = Field(default=None, description="Log file path")
    format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log format string",
    )
    console: bool = Field(default=True, description="Log to standard error")


class Settings(BaseModel):
    """Global settings loaded from ``config.json``."""

    llm_providers: Dict[str, ProviderConfig] = Field(
        default_factory=dict, description="Chat-completion endpoint configurations"
    )
    generation: GenerationConfig = Field(default_factory=GenerationConfig)
    processing: ProcessingConfig = Field(default_factory=ProcessingConfig)
    loop: LoopConfig = Field(default_factory=LoopConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @classmethod
    def load(cls, config_path: Optional[str] = None) -> "Settings":
        """Load settings from the first existing config file, else defaults.

        An explicitly requested path that cannot be read raises; default
        locations that fail to parse are skipped with a warning.
        """
        if config_path:
            with open(config_path, "r", encoding="utf-8") as f:
                data = json.load(f)
            logger.info(f"Loaded configuration from: {config_path}")
            return cls(**data)

        for path in DEFAULT_CONFIG_PATHS:
            path = os.path.expanduser(path)
            if not os.path.exists(path):
                continue
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = json.load(f)
                logger.info(f"Loaded configuration from: {path}")
                return cls(**data)
            except Exception as e:
                logger.warning(f"Failed to load config from {path}: {e}")

        logger.debug("No configuration file found, using default settings")
        return cls()

    def get_provider_config(self, provider_name: Optional[str] = None) -> ProviderConfig:
        """Provider config by name; the first configured one (or defaults) otherwise."""
        if provider_name:
            if provider_name not in self.llm_providers:
                raise KeyError(f"Unknown provider: {provider_name}")
            return self.llm_providers[provider_name]
        if self.llm_providers:
            return next(iter(self.llm_providers.values()))
        return ProviderConfig()
