"""Windowed decision memory and its prompt renderings."""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from ..core.types import EnvState, TransitionRecord
from ..environments.gaussian_squeeze import GsPayload, format_reward
from ..environments.grid_transport import GridPayload, format_grid_action
from ..errors import OutOfOrderTransition, WrongEnvironment

logger = logging.getLogger(__name__)

MAX_NOTES = 10
GRID_MEMORY_HEADER = "memory (oldest first): step | objects before | joint action | delivered"


@dataclass(frozen=True)
class DecisionMemory:
    """Most recent ``window_size`` transitions plus free-text experience notes.

    Instances are immutable; :meth:`push` and :meth:`add_note` return new
    memories.
    """

    window_size: int
    transitions: Tuple[TransitionRecord, ...] = ()
    notes: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if len(self.transitions) > self.window_size:
            raise ValueError("transitions exceed the memory window")

    def push(self, record: TransitionRecord) -> "DecisionMemory":
        if self.transitions:
            expected = self.transitions[-1].next_state.step_index
            if record.state.step_index != expected:
                raise OutOfOrderTransition(
                    f"Expected transition from step {expected}, got {record.state.step_index}"
                )
        transitions = (self.transitions + (record,))[-self.window_size:]
        return replace(self, transitions=transitions)

    def add_note(self, note: str) -> "DecisionMemory":
        note = note.strip()
        if not note:
            return self
        return replace(self, notes=(self.notes + (note,))[-MAX_NOTES:])

    @property
    def short_term(self) -> Optional[EnvState]:
        """Latest state seen by the memory, if any."""
        if not self.transitions:
            return None
        return self.transitions[-1].next_state

    def __len__(self) -> int:
        return len(self.transitions)


def render_memory_gs(memory: DecisionMemory) -> str:
    """``[{action:[4,7,9], system_reward:[12.3]}, ...]``, oldest round first."""
    entries = []
    for record in memory.transitions:
        payload = record.next_state.payload
        if not isinstance(payload, GsPayload):
            raise WrongEnvironment("render_memory_gs needs gaussian squeeze transitions")
        actions = ",".join(str(term) for term in record.joint_action.terms().values())
        reward = format_reward(payload.history[-1].reward)
        entries.append(f"{{action:[{actions}], system_reward:[{reward}]}}")
    return "[" + ", ".join(entries) + "]"


def summarize_memory_gs(memory: DecisionMemory) -> str:
    """Best sum seen so far with the mean action and reward over the window."""
    if not memory.transitions:
        return "no rounds played yet"
    records = []
    for record in memory.transitions:
        payload = record.next_state.payload
        if not isinstance(payload, GsPayload):
            raise WrongEnvironment("summarize_memory_gs needs gaussian squeeze transitions")
        records.append(payload.history[-1])
    best = max(records, key=lambda r: (r.reward, -r.sum_x))
    mean_action = sum(sum(r.actions) / len(r.actions) for r in records) / len(records)
    mean_reward = sum(r.reward for r in records) / len(records)
    return (
        f"best sum so far: {best.sum_x} (system_reward={format_reward(best.reward)}); "
        f"mean action: {mean_action:.3f}; mean system_reward: {mean_reward:.3f}"
    )


def _grid_objects(payload: GridPayload) -> str:
    return "[" + ", ".join(f"{o.object_id}@{o.position.render()}" for o in payload.objects) + "]"


def render_memory_grid(memory: DecisionMemory) -> str:
    """Header followed by one line per remembered step, oldest first."""
    lines = [GRID_MEMORY_HEADER]
    for record in memory.transitions:
        before, after = record.state.payload, record.next_state.payload
        if not isinstance(before, GridPayload) or not isinstance(after, GridPayload):
            raise WrongEnvironment("render_memory_grid needs grid transitions")
        actions = ", ".join(
            f"agent_{agent}: {format_grid_action(term)}"
            for agent, term in record.joint_action.terms().items()
        )
        delivered = len(after.delivered) - len(before.delivered)
        lines.append(
            f"step {record.state.step_index} | {_grid_objects(before)} | {{{actions}}} | {delivered}"
        )
    return "\n".join(lines)


def render_notes(memory: DecisionMemory) -> str:
    if not memory.notes:
        return "(none)"
    return "\n".join(f"- {note}" for note in memory.notes)


def render_memory(memory: DecisionMemory, env_name: str) -> str:
    """Environment-appropriate rendering of the trajectory window."""
    if env_name == "gs":
        return render_memory_gs(memory)
    return render_memory_grid(memory)
