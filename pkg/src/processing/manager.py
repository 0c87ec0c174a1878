"""Backend manager: builds the model backend a run asks for."""

import logging
from typing import Dict, Iterable, Mapping, Optional, Type

from llm_coordinator.config import Settings
from llm_coordinator.llm.base import BaseLLMBackend, ChatExchange
from llm_coordinator.llm.openai_provider import OpenAIBackend
from llm_coordinator.llm.replay import ReplayBackend
from llm_coordinator.llm.scripted import ScriptedBackend

logger = logging.getLogger(__name__)

BACKEND_KINDS = ("http", "scripted", "replay")


class BackendManager:
    """Creates backends by kind; live ones from the configured providers."""

    def __init__(self, settings: Settings):
        """Initialize the backend manager.

        Args:
            settings: Application settings containing provider configurations
        """
        self.settings = settings
        self.provider_classes: Dict[str, Type[OpenAIBackend]] = {
            "openai": OpenAIBackend,
        }

    def get_available_providers(self) -> list:
        """Get list of configured provider names."""
        return list(self.settings.llm_providers.keys())

    def create_http(self, provider: Optional[str] = None) -> BaseLLMBackend:
        """Live backend for a configured provider (the first one by default).

        Raises:
            KeyError: unknown provider name
            ValueError: unsupported provider type
        """
        config = self.settings.get_provider_config(provider)
        provider_class = self.provider_classes.get(config.type)
        if provider_class is None:
            logger.error(f"Unknown provider type '{config.type}' for provider '{provider}'")
            raise ValueError(f"Unknown provider type: {config.type}")
        name = provider or next(iter(self.settings.llm_providers), config.type)
        backend = provider_class(config, name=name, timeout_seconds=self.settings.processing.timeout_seconds)
        logger.info(f"Using provider '{name}' with model '{config.get_model()}'")
        return backend

    def create(
        self,
        kind: str,
        provider: Optional[str] = None,
        overrides: Optional[Mapping[str, Iterable[str]]] = None,
        exchanges: Optional[Iterable[ChatExchange]] = None,
    ) -> BaseLLMBackend:
        """Backend of ``kind``: ``http``, ``scripted`` or ``replay``.

        Args:
            kind: Backend kind
            provider: Provider name for ``http``
            overrides: Canned responses per role tag for ``scripted``
            exchanges: Recorded exchanges for ``replay``
        """
        if kind == "http":
            return self.create_http(provider)
        if kind == "scripted":
            return ScriptedBackend(overrides)
        if kind == "replay":
            if exchanges is None:
                raise ValueError("the replay backend needs recorded exchanges")
            return ReplayBackend(exchanges)
        raise ValueError(f"Unknown backend kind: {kind} (expected one of {', '.join(BACKEND_KINDS)})")
