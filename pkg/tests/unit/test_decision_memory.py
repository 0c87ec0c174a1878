"""Unit tests for decision memory and its renderings."""

import pytest

from llm_coordinator.core.types import JointAction, TransitionRecord
from llm_coordinator.environments import CellPos, MoveToCell, NoOp, format_reward
from llm_coordinator.errors import OutOfOrderTransition, WrongEnvironment
from llm_coordinator.memory import (
    MAX_NOTES,
    DecisionMemory,
    render_memory,
    render_memory_grid,
    render_memory_gs,
    render_notes,
    summarize_memory_gs,
)


def play_gs(env, rounds):
    """Transitions for a list of per-round action lists."""
    state, _ = env.reset(0)
    records = []
    for actions in rounds:
        joint = JointAction.from_terms(dict(enumerate(actions)))
        outcome = env.step(state, joint)
        records.append(TransitionRecord(state, joint, outcome.rewards, outcome.next_state))
        state = outcome.next_state
    return records


class TestDecisionMemory:
    """Test windowing and ordering."""

    def test_window_keeps_latest(self, gs_env):
        """Only the last window_size transitions survive."""
        records = play_gs(gs_env, [[1, 1, 1], [2, 2, 2], [3, 3, 3]])
        memory = DecisionMemory(window_size=2)
        for record in records:
            memory = memory.push(record)

        assert len(memory) == 2
        assert memory.transitions == tuple(records[1:])
        assert memory.short_term == records[-1].next_state

    def test_push_returns_new_memory(self, gs_env):
        record = play_gs(gs_env, [[0, 0, 0]])[0]
        empty = DecisionMemory(window_size=3)

        assert len(empty.push(record)) == 1
        assert len(empty) == 0
        assert empty.short_term is None

    def test_out_of_order_push_rejected(self, gs_env):
        records = play_gs(gs_env, [[1, 1, 1], [2, 2, 2], [3, 3, 3]])
        memory = DecisionMemory(window_size=5).push(records[0])

        with pytest.raises(OutOfOrderTransition):
            memory.push(records[2])

    def test_invalid_window(self):
        with pytest.raises(ValueError):
            DecisionMemory(window_size=0)

    def test_notes_are_bounded(self):
        memory = DecisionMemory(window_size=1)
        for index in range(MAX_NOTES + 3):
            memory = memory.add_note(f"note {index}")

        assert len(memory.notes) == MAX_NOTES
        assert memory.notes[-1] == f"note {MAX_NOTES + 2}"
        assert memory.add_note("   ") is memory

    def test_render_notes(self):
        memory = DecisionMemory(window_size=1)
        assert render_notes(memory) == "(none)"
        assert render_notes(memory.add_note("keep sums near 15")) == "- keep sums near 15"


class TestGsRendering:
    """Test the gaussian squeeze memory format."""

    def test_render_format(self, gs_env):
        """Oldest round first, actions then the system reward."""
        records = play_gs(gs_env, [[1, 2, 3], [9, 6, 0]])
        memory = DecisionMemory(window_size=5).push(records[0]).push(records[1])

        first = format_reward(records[0].next_state.payload.history[-1].reward)
        second = format_reward(records[1].next_state.payload.history[-1].reward)
        assert render_memory_gs(memory) == (
            f"[{{action:[1,2,3], system_reward:[{first}]}}, "
            f"{{action:[9,6,0], system_reward:[{second}]}}]"
        )
        assert render_memory(memory, "gs") == render_memory_gs(memory)

    def test_render_empty(self):
        assert render_memory_gs(DecisionMemory(window_size=3)) == "[]"

    def test_summary(self, gs_env):
        records = play_gs(gs_env, [[1, 1, 1], [9, 6, 0]])
        memory = DecisionMemory(window_size=5).push(records[0]).push(records[1])

        summary = summarize_memory_gs(memory)
        assert summary.startswith("best sum so far: 15")
        assert summarize_memory_gs(DecisionMemory(window_size=1)) == "no rounds played yet"

    def test_wrong_environment(self, easy_env):
        state, _ = easy_env.reset(0)
        joint = JointAction.from_terms({0: NoOp(), 1: NoOp()})
        outcome = easy_env.step(state, joint)
        memory = DecisionMemory(window_size=1).push(
            TransitionRecord(state, joint, outcome.rewards, outcome.next_state)
        )

        with pytest.raises(WrongEnvironment):
            render_memory_gs(memory)
        with pytest.raises(WrongEnvironment):
            summarize_memory_gs(memory)


class TestGridRendering:
    """Test the grid memory format."""

    def test_render_lines(self, easy_env):
        state, _ = easy_env.reset(0)
        joint = JointAction.from_terms({0: MoveToCell("object_red_0", CellPos(0, 1)), 1: NoOp()})
        outcome = easy_env.step(state, joint)
        memory = DecisionMemory(window_size=5).push(
            TransitionRecord(state, joint, outcome.rewards, outcome.next_state)
        )

        lines = render_memory_grid(memory).splitlines()
        assert lines[0].startswith("memory (oldest first)")
        assert lines[1] == (
            "step 0 | [object_red_0@cell(0,0)] | "
            "{agent_0: move(object_red_0, cell(0,1)), agent_1: noop} | 0"
        )
        assert render_memory(memory, "grid-easy") == render_memory_grid(memory)

    def test_gs_transitions_rejected(self, gs_env):
        memory = DecisionMemory(window_size=1).push(play_gs(gs_env, [[0, 0, 0]])[0])
        with pytest.raises(WrongEnvironment):
            render_memory_grid(memory)
