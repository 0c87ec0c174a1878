"""Decision memory."""

from .decision_memory import (
    MAX_NOTES,
    DecisionMemory,
    render_memory,
    render_memory_grid,
    render_memory_gs,
    render_notes,
    summarize_memory_gs,
)

__all__ = [
    "MAX_NOTES",
    "DecisionMemory",
    "render_memory",
    "render_memory_grid",
    "render_memory_gs",
    "render_notes",
    "summarize_memory_gs",
]
