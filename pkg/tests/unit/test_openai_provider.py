"""Unit tests for the OpenAI-compatible backend (client mocked)."""

from unittest.mock import AsyncMock, Mock

import httpx
import openai
import pytest

from llm_coordinator.config import ProviderConfig
from llm_coordinator.errors import TransportError
from llm_coordinator.llm import GenerationParams, OpenAIBackend, TokenUsage

MESSAGES = (("system", "You are the assessor."), ("user", "Check these proposals."))
PARAMS = GenerationParams(temperature=0.2, max_tokens=100, seed=3)


def completion(content, usage=None, reasoning=None):
    message = Mock(content=content, reasoning=reasoning)
    return Mock(
        choices=[Mock(message=message, finish_reason="stop")],
        usage=usage,
        model="test-model",
    )


@pytest.fixture
def backend():
    config = ProviderConfig(api_key="test-key", base_url="http://localhost:9999/v1", model="test-model")
    backend = OpenAIBackend(config, name="local")
    backend.client = Mock()
    backend.client.chat.completions.create = AsyncMock()
    return backend


class TestOpenAIBackend:
    """Test request building and response normalization."""

    def test_requires_api_key(self):
        with pytest.raises(ValueError):
            OpenAIBackend(ProviderConfig())

    def test_backend_id(self, backend):
        assert backend.backend_id == "local:test-model"
        assert backend.get_rate_limiter() is not None

    @pytest.mark.asyncio
    async def test_request_and_usage(self, backend):
        backend.client.chat.completions.create.return_value = completion(
            '{"verdict": {"pass": true, "issues": []}}', usage=Mock(prompt_tokens=40, completion_tokens=9)
        )

        response = await backend.complete("assessor", MESSAGES, PARAMS)

        request = backend.client.chat.completions.create.call_args.kwargs
        assert request["messages"][0] == {"role": "system", "content": "You are the assessor."}
        assert (request["temperature"], request["seed"]) == (0.2, 3)
        assert response.usage == TokenUsage.of(40, 9)
        assert response.metadata["finish_reason"] == "stop"

    @pytest.mark.asyncio
    async def test_missing_usage_is_estimated(self, backend):
        backend.client.chat.completions.create.return_value = completion("two words")

        response = await backend.complete("assessor", MESSAGES, PARAMS)

        assert response.usage == TokenUsage.of(7, 2)

    @pytest.mark.asyncio
    async def test_think_tags_split_off(self, backend):
        backend.client.chat.completions.create.return_value = completion("<think>sum 15</think>{}")

        response = await backend.complete("assessor", MESSAGES, PARAMS)

        assert response.content == "{}"
        assert response.thoughts == "sum 15"

    @pytest.mark.asyncio
    async def test_connection_error_is_transport(self, backend):
        request = httpx.Request("POST", "http://localhost:9999/v1/chat/completions")
        backend.client.chat.completions.create.side_effect = openai.APIConnectionError(request=request)

        with pytest.raises(TransportError):
            await backend.complete("assessor", MESSAGES, PARAMS)

    @pytest.mark.asyncio
    async def test_server_error_is_transport(self, backend):
        request = httpx.Request("POST", "http://localhost:9999/v1/chat/completions")
        error = openai.InternalServerError(
            "boom", response=httpx.Response(503, request=request), body=None
        )
        backend.client.chat.completions.create.side_effect = error

        with pytest.raises(TransportError):
            await backend.complete("assessor", MESSAGES, PARAMS)
