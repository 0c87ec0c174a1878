"""LLM Coordinator - actor-critic coordination of LLM agents on multi-agent decision tasks."""

__version__ = "0.1.0"
