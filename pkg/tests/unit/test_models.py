"""Unit tests for run configurations and episode results."""

import pytest
from pydantic import ValidationError

from llm_coordinator.llm.base import TokenUsage
from processing.models import EpisodeResult, FailureReason, Method, RunConfig, parse_size


def make_result(**overrides) -> EpisodeResult:
    fields = dict(
        method="actor_critic",
        env="grid-easy",
        size="2x2",
        seed=11,
        trial=0,
        success=True,
        failure_reason=None,
        steps=4,
        internal_retries=1,
        external_notes=2,
        token_usage={"assessor": TokenUsage.of(30, 5), "critic_explore": TokenUsage.of(20, 4)},
        reward_trace=[0.0, 1.0],
        llm_calls=12,
        final_reward=1.0,
        transcript_path="runs/ep.jsonl",
    )
    fields.update(overrides)
    return EpisodeResult(**fields)


class TestParseSize:
    @pytest.mark.parametrize("text,expected", [("2x4", (2, 4)), (" 4X8 ", (4, 8)), ("1x1", (1, 1))])
    def test_valid(self, text, expected):
        assert parse_size(text) == expected

    @pytest.mark.parametrize("text", ["2", "2x", "x4", "2*4", "0x3", "two by four"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            parse_size(text)


class TestRunConfig:
    """Test run configuration validation."""

    def test_defaults(self):
        config = RunConfig()

        assert config.method is Method.ACTOR_CRITIC
        assert config.env == "gs"
        assert (config.if_limit, config.ef_limit, config.grammar_reask_limit) == (3, 3, 3)
        assert config.size_label == "n=3"
        assert not config.is_grid

    def test_grid_size_label(self):
        assert RunConfig(env="grid-hard", rows=2, cols=4).size_label == "2x4"

    def test_unknown_env_rejected(self):
        with pytest.raises(ValidationError):
            RunConfig(env="maze")

    def test_unknown_method_rejected(self):
        with pytest.raises(ValidationError):
            RunConfig(method="majority_vote")

    def test_scenario_file_only_for_grid(self):
        with pytest.raises(ValidationError):
            RunConfig(env="gs", scenario_path="scenario.yaml")

    @pytest.mark.parametrize("field", ["if_limit", "ef_limit", "grammar_reask_limit", "trials"])
    def test_limits_positive(self, field):
        with pytest.raises(ValidationError):
            RunConfig(**{field: 0})

    def test_frozen(self):
        config = RunConfig()
        with pytest.raises(ValidationError):
            config.seed = 3

    def test_record_round_trip(self):
        config = RunConfig(method=Method.DEBATE, env="grid-easy", rows=1, cols=2, seed=5)

        assert RunConfig.model_validate(config.to_record()) == config
        assert config.to_record()["method"] == "debate"

    def test_method_alias(self):
        """The long-form method name selects the actor-critic loop."""
        config = RunConfig(method="llamac")

        assert config.method is Method.ACTOR_CRITIC
        assert config.to_record()["method"] == "actor_critic"


class TestEpisodeResult:
    """Test the result record."""

    def test_success_matches_failure_reason(self):
        with pytest.raises(ValueError):
            make_result(success=False, failure_reason=None)
        with pytest.raises(ValueError):
            make_result(success=True, failure_reason=FailureReason.STEP_LIMIT)

    def test_feedback_is_internal_plus_external(self):
        assert make_result().feedback_count == 3

    def test_total_usage(self):
        assert make_result().total_usage == TokenUsage.of(50, 9)

    def test_record_fields(self):
        record = make_result(success=False, failure_reason=FailureReason.GRAMMAR_LIMIT).to_record()

        assert record["failure_reason"] == "GrammarLimit"
        assert record["feedback"] == 3
        assert list(record["token_usage"]) == ["assessor", "critic_explore"]
        assert record["token_usage"]["assessor"] == {
            "prompt_tokens": 30,
            "completion_tokens": 5,
            "total_tokens": 35,
        }

    def test_from_record_inverts_to_record(self):
        result = make_result(success=False, failure_reason=FailureReason.TRANSPORT, regret=0.25)
        assert EpisodeResult.from_record(result.to_record()) == result

    def test_comparable_ignores_transcript_path(self):
        assert make_result().comparable() == make_result(transcript_path=None).comparable()
        assert "transcript_path" not in make_result().comparable()
