"""Unit tests for configuration settings."""

import json

import pytest
from pydantic import ValidationError

from llm_coordinator.config.settings import (
    GenerationConfig,
    LoggingConfig,
    LoopConfig,
    ProcessingConfig,
    ProviderConfig,
    RateLimitConfig,
    Settings,
)


class TestSectionDefaults:
    """Defaults every run starts from when config.json is silent."""

    def test_loop_limits(self):
        loop = LoopConfig()

        assert (loop.if_limit, loop.ef_limit, loop.grammar_reask_limit) == (3, 3, 3)
        assert loop.debate_rounds == 2
        assert loop.grid_memory_window == 5
        assert loop.decentralized_agent_warning == 20

    def test_concurrency(self):
        processing = ProcessingConfig()

        assert processing.parallelism == 8
        assert processing.trial_concurrency == 1
        assert processing.max_retries == 3

    def test_provider_and_throttle(self):
        provider = ProviderConfig()

        assert provider.type == "openai"
        assert provider.context_limit == 8192
        assert provider.rate_limit == RateLimitConfig(requests_per_minute=60, requests_per_hour=1000)

    def test_logging_goes_to_console(self):
        logging_config = LoggingConfig()

        assert logging_config.console is True
        assert logging_config.file_path is None

    @pytest.mark.parametrize(
        "section,field",
        [
            (LoopConfig, "if_limit"),
            (LoopConfig, "ef_limit"),
            (LoopConfig, "debate_rounds"),
            (ProcessingConfig, "parallelism"),
            (ProcessingConfig, "trial_concurrency"),
            (RateLimitConfig, "requests_per_minute"),
            (ProviderConfig, "context_limit"),
            (GenerationConfig, "max_tokens"),
        ],
    )
    def test_counts_must_be_positive(self, section, field):
        with pytest.raises(ValidationError):
            section(**{field: 0})


class TestRoleTemperatures:
    @pytest.fixture
    def generation(self):
        return GenerationConfig(
            critic_temperature=0.9,
            assessor_temperature=0.1,
            actor_temperature=0.4,
            debater_temperature=0.6,
        )

    @pytest.mark.parametrize(
        "role_tag,expected",
        [
            ("critic_explore", 0.9),
            ("critic_exploit", 0.9),
            ("assessor", 0.1),
            ("assessor_revision", 0.1),
            ("debater_2", 0.6),
            ("actor_3", 0.4),
        ],
    )
    def test_temperature_for_role(self, generation, role_tag, expected):
        assert generation.temperature_for(role_tag) == expected

    def test_out_of_range_temperature(self):
        with pytest.raises(ValidationError):
            GenerationConfig(assessor_temperature=2.5)


class TestProviderEnvironmentFallback:
    """Empty endpoint fields fall back to the OPENAI_* variables."""

    def test_configured_values_win(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "env-key")
        provider = ProviderConfig(api_key="file-key", base_url="http://file/v1", model="file-model")

        assert provider.get_api_key() == "file-key"
        assert provider.get_base_url() == "http://file/v1"
        assert provider.get_model() == "file-model"

    def test_environment_fills_gaps(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "env-key")
        monkeypatch.setenv("OPENAI_BASE_URL", "http://env:1/v1")
        monkeypatch.setenv("OPENAI_MODEL", "env-model")

        provider = ProviderConfig()

        assert provider.get_api_key() == "env-key"
        assert provider.get_base_url() == "http://env:1/v1"
        assert provider.get_model() == "env-model"

    def test_unset_endpoint(self):
        assert ProviderConfig().get_api_key() == ""
        assert ProviderConfig().get_base_url() is None


class TestProviderLookup:
    def test_named_and_first(self):
        ollama = ProviderConfig(api_key="ollama", model="llama3")
        hosted = ProviderConfig(api_key="sk", model="gpt-4")
        settings = Settings(llm_providers={"local_ollama": ollama, "hosted": hosted})

        assert settings.get_provider_config("hosted") == hosted
        assert settings.get_provider_config() == ollama

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            Settings().get_provider_config("nonexistent")

    def test_defaults_without_providers(self):
        assert Settings().get_provider_config() == ProviderConfig()


class TestSettingsLoad:
    """Test the load class method."""

    def test_explicit_file(self, temp_config_file):
        settings = Settings.load(temp_config_file)

        assert settings.llm_providers["test"].context_limit == 4096
        assert (settings.loop.if_limit, settings.loop.ef_limit) == (2, 2)
        assert settings.loop.debate_rounds == 2
        assert settings.processing.show_progress is False

    def test_missing_explicit_file_raises(self, temp_output_dir):
        with pytest.raises(OSError):
            Settings.load(str(temp_output_dir / "missing.json"))

    def test_invalid_explicit_file_raises(self, temp_output_dir):
        path = temp_output_dir / "bad.json"
        path.write_text(json.dumps({"loop": {"if_limit": 0}}))

        with pytest.raises(ValidationError):
            Settings.load(str(path))

    def test_working_directory_file(self, temp_output_dir, monkeypatch):
        monkeypatch.chdir(temp_output_dir)
        (temp_output_dir / "config.json").write_text(json.dumps({"loop": {"ef_limit": 5}}))

        assert Settings.load().loop.ef_limit == 5

    def test_broken_default_file_is_skipped(self, temp_output_dir, monkeypatch):
        monkeypatch.chdir(temp_output_dir)
        monkeypatch.setenv("HOME", str(temp_output_dir))
        (temp_output_dir / "config.json").write_text("{not json")

        assert Settings.load() == Settings()

    def test_defaults_without_files(self, temp_output_dir, monkeypatch):
        monkeypatch.chdir(temp_output_dir)
        monkeypatch.setenv("HOME", str(temp_output_dir))

        assert Settings.load() == Settings()
