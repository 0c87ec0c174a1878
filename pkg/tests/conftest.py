"""Pytest configuration and fixtures for LLM Coordinator tests."""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Callable, Dict, Generator, Iterable, Optional

import pytest

from llm_coordinator.config.settings import (
    LoggingConfig,
    LoopConfig,
    ProcessingConfig,
    ProviderConfig,
    RateLimitConfig,
    Settings,
)
from llm_coordinator.environments import GaussianSqueezeEnvironment, GsConfig
from llm_coordinator.importers import load_scenario
from llm_coordinator.llm.gateway import LLMGateway
from llm_coordinator.llm.scripted import ScriptedBackend
from llm_coordinator.utils.logging_setup import HANDLER_MARK

FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def test_settings() -> Settings:
    """Test configuration settings."""
    return Settings(
        llm_providers={
            "test_provider": ProviderConfig(
                type="openai",
                api_key="test-key",
                base_url="http://localhost:9999/v1",
                model="test-model",
                context_limit=8192,
                rate_limit=RateLimitConfig(requests_per_minute=10),
            )
        },
        processing=ProcessingConfig(
            max_retries=0,
            retry_backoff_seconds=0.0,
            timeout_seconds=30,
            show_progress=False,
        ),
        loop=LoopConfig(),
        logging=LoggingConfig(level="WARNING"),
    )


@pytest.fixture
def temp_config_file() -> Generator[str, None, None]:
    """Temporary configuration file."""
    config = {
        "llm_providers": {
            "test": {
                "type": "openai",
                "api_key": "test-key",
                "model": "test-model",
                "context_limit": 4096,
            }
        },
        "processing": {
            "max_retries": 0,
            "retry_backoff_seconds": 0.0,
            "show_progress": False,
        },
        "loop": {"if_limit": 2, "ef_limit": 2},
        "logging": {"level": "WARNING"},
    }

    with tempfile.NamedTemporaryFile(mode="w", suffix=".json", delete=False) as f:
        json.dump(config, f)
        temp_path = f.name

    yield temp_path

    os.unlink(temp_path)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture
def scenario_path() -> Callable[[str], str]:
    """Path of a scenario file under ``tests/fixtures/scenarios``."""

    def _path(name: str) -> str:
        return str(FIXTURES_DIR / "scenarios" / name)

    return _path


@pytest.fixture
def gs_env() -> GaussianSqueezeEnvironment:
    """Three agents, optimum at sum 15."""
    return GaussianSqueezeEnvironment(GsConfig(n_agents=3, mu=14.0, sigma=5.0))


@pytest.fixture
def easy_env(scenario_path):
    """1x2 Easy grid: object_red_0 in cell (0,0), its target in cell (0,1)."""
    return load_scenario(scenario_path("easy_1x2.yaml"))


@pytest.fixture
def hard_env(scenario_path):
    """2x2 Hard grid with a red object on the centre corner."""
    return load_scenario(scenario_path("hard_2x2.yaml"))


@pytest.fixture
def make_gateway(test_settings: Settings) -> Callable[..., LLMGateway]:
    """Gateway over a scripted backend with optional canned responses."""

    def _make(
        overrides: Optional[Dict[str, Iterable[str]]] = None, context_limit: int = 8192
    ) -> LLMGateway:
        return LLMGateway(
            ScriptedBackend(overrides),
            test_settings.generation,
            test_settings.processing,
            context_limit=context_limit,
            seed=7,
        )

    return _make


@pytest.fixture(autouse=True)
def setup_test_environment(monkeypatch):
    """Setup common test environment variables."""
    monkeypatch.setenv("TESTING", "true")
    monkeypatch.delenv("OPENAI_API_KEY", raising=False)
    monkeypatch.delenv("OPENAI_BASE_URL", raising=False)
    monkeypatch.delenv("OPENAI_MODEL", raising=False)


@pytest.fixture(autouse=True)
def reset_package_logging() -> Generator[None, None, None]:
    """Drop handlers the CLI installs; they point at CliRunner's closed streams."""
    yield
    for name in ("llm_coordinator", "processing"):
        package_logger = logging.getLogger(name)
        for handler in [h for h in package_logger.handlers if getattr(h, HANDLER_MARK, False)]:
            package_logger.removeHandler(handler)
        package_logger.setLevel(logging.NOTSET)


@pytest.fixture
def temp_output_dir() -> Generator[Path, None, None]:
    """Temporary output directory for file operations."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)
