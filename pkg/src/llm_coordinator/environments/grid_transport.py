"""Grid transportation environment (Easy: cell moves, Hard: corner lattice)."""

import logging
import re
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.environment import BaseEnvironment
from ..core.seeding import stream
from ..core.types import AgentId, EnvState, JointAction, Observation, StepOutcome
from ..errors import ConflictingJointAction, GrammarError, ScenarioError, UnknownObject

logger = logging.getLogger(__name__)

IDENTIFIER = r"[A-Za-z0-9_\-]+"
COLORS = ("red", "blue", "green", "yellow")


class GridMode(str, Enum):
    EASY = "easy"
    HARD = "hard"


class CellPos(NamedTuple):
    row: int
    col: int

    def render(self) -> str:
        return f"cell({self.row},{self.col})"


class CornerPos(NamedTuple):
    row: int
    col: int

    def render(self) -> str:
        return f"corner({self.row},{self.col})"


Position = Union[CellPos, CornerPos]


class ObjectSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    object_id: str = Field(pattern=rf"^{IDENTIFIER}$")
    color: str
    position: Tuple[int, int]


class TargetSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    target_id: str = Field(pattern=rf"^{IDENTIFIER}$")
    color: str
    cell: Tuple[int, int]


class GridConfig(BaseModel):
    """Grid instance: one agent per cell, typed objects and targets.

    Object positions are cells in Easy mode and corners of the
    ``(rows + 1) x (cols + 1)`` corner lattice in Hard mode. ``max_steps``
    defaults to ``10 * rows * cols`` (Easy) or ``15 * rows * cols`` (Hard).
    """

    model_config = ConfigDict(frozen=True)

    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    mode: GridMode = GridMode.EASY
    objects: Tuple[ObjectSpec, ...] = ()
    targets: Tuple[TargetSpec, ...] = ()
    max_steps: int = Field(ge=1)

    @model_validator(mode="before")
    @classmethod
    def _default_horizon(cls, values: Any) -> Any:
        if isinstance(values, dict) and values.get("max_steps") is None:
            values = dict(values)
            mode = GridMode(values.get("mode", GridMode.EASY))
            factor = 10 if mode is GridMode.EASY else 15
            values["max_steps"] = factor * int(values.get("rows", 1)) * int(values.get("cols", 1))
        return values

    @model_validator(mode="after")
    def _check_layout(self) -> "GridConfig":
        object_ids = [o.object_id for o in self.objects]
        target_ids = [t.target_id for t in self.targets]
        if len(set(object_ids)) != len(object_ids):
            raise ValueError("object ids must be unique")
        if len(set(target_ids)) != len(target_ids):
            raise ValueError("target ids must be unique")

        max_row, max_col = self.rows - 1, self.cols - 1
        if self.mode is GridMode.HARD:
            max_row, max_col = self.rows, self.cols
        for obj in self.objects:
            row, col = obj.position
            if not (0 <= row <= max_row and 0 <= col <= max_col):
                raise ValueError(f"object {obj.object_id} position {obj.position} out of bounds")
        for target in self.targets:
            row, col = target.cell
            if not (0 <= row < self.rows and 0 <= col < self.cols):
                raise ValueError(f"target {target.target_id} cell {target.cell} out of bounds")

        target_colors = {t.color for t in self.targets}
        for obj in self.objects:
            if obj.color not in target_colors:
                raise ValueError(f"object {obj.object_id} has no {obj.color} target")
        return self


# Actions ---------------------------------------------------------------


@dataclass(frozen=True)
class MoveToCell:
    object_id: str
    cell: CellPos


@dataclass(frozen=True)
class PlaceInTarget:
    object_id: str
    target_id: str


@dataclass(frozen=True)
class MoveToCorner:
    object_id: str
    corner: CornerPos


@dataclass(frozen=True)
class MoveToTarget:
    object_id: str
    target_id: str


@dataclass(frozen=True)
class NoOp:
    pass


GridAction = Union[MoveToCell, PlaceInTarget, MoveToCorner, MoveToTarget, NoOp]
DELIVERY_ACTIONS = (PlaceInTarget, MoveToTarget)

_MOVE_RE = re.compile(
    rf"^move\(\s*({IDENTIFIER})\s*,\s*(cell|corner|target)\(\s*([^()]*?)\s*\)\s*\)$"
)
_PAIR_RE = re.compile(r"^(\d+)\s*,\s*(\d+)$")


def format_grid_action(action: GridAction) -> str:
    """Wire term of a grid action."""
    if isinstance(action, NoOp):
        return "noop"
    if isinstance(action, MoveToCell):
        return f"move({action.object_id}, {action.cell.render()})"
    if isinstance(action, MoveToCorner):
        return f"move({action.object_id}, {action.corner.render()})"
    return f"move({action.object_id}, target({action.target_id}))"


def _sorted_actions(actions: Iterable[GridAction]) -> List[GridAction]:
    # noop last, everything else by wire text
    return sorted(actions, key=lambda a: (isinstance(a, NoOp), format_grid_action(a)))


# Conflicts -------------------------------------------------------------


class ConflictKind(str, Enum):
    SAME_OBJECT_MULTI_MOVE = "SameObjectMultiMove"
    DESTINATION_COLLISION = "DestinationCollision"


@dataclass(frozen=True)
class Conflict:
    kind: ConflictKind
    agents: Tuple[AgentId, ...]
    detail: str


# State -----------------------------------------------------------------


@dataclass(frozen=True)
class PlacedObject:
    object_id: str
    color: str
    position: Position


@dataclass(frozen=True)
class GridPayload:
    objects: Tuple[PlacedObject, ...]
    delivered: Tuple[str, ...] = ()

    def find(self, object_id: str) -> Optional[PlacedObject]:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        return None


@dataclass(frozen=True)
class GridObservation:
    agent: AgentId
    cell: CellPos
    objects: Tuple[PlacedObject, ...]
    targets: Tuple[TargetSpec, ...]
    legal_actions: Tuple[str, ...]


def cell_corners(cell: CellPos) -> Tuple[CornerPos, ...]:
    """The four lattice corners bounding ``cell``, in row-major order."""
    r, c = cell
    return (CornerPos(r, c), CornerPos(r, c + 1), CornerPos(r + 1, c), CornerPos(r + 1, c + 1))


def _l1(a: Tuple[int, int], b: Tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


class GridTransportEnvironment(BaseEnvironment):
    """Fixed agents, one per cell, cooperatively carry objects to targets."""

    has_goal = True

    def __init__(self, config: GridConfig):
        self.config = config
        self.mode = config.mode
        self.name = f"grid-{config.mode.value}"
        self._agents = tuple(AgentId(i) for i in range(config.rows * config.cols))
        self._targets = {t.target_id: t for t in config.targets}

    # Geometry ----------------------------------------------------------

    @property
    def agents(self) -> Tuple[AgentId, ...]:
        return self._agents

    @property
    def max_steps(self) -> int:
        return self.config.max_steps

    @property
    def size_label(self) -> str:
        return f"{self.config.rows}x{self.config.cols}"

    def agent_cell(self, agent: int) -> CellPos:
        agent_id = self.check_agent(agent)
        return CellPos(agent_id // self.config.cols, agent_id % self.config.cols)

    def agent_at(self, cell: Tuple[int, int]) -> AgentId:
        return AgentId(cell[0] * self.config.cols + cell[1])

    def agent_corners(self, agent: int) -> Tuple[CornerPos, ...]:
        return cell_corners(self.agent_cell(agent))

    def agents_touching(self, corner: CornerPos) -> Tuple[AgentId, ...]:
        """Agents whose cell has ``corner`` as one of its corners."""
        touching = []
        for dr in (-1, 0):
            for dc in (-1, 0):
                r, c = corner.row + dr, corner.col + dc
                if 0 <= r < self.config.rows and 0 <= c < self.config.cols:
                    touching.append(self.agent_at((r, c)))
        return tuple(sorted(touching))

    def _neighbors(self, cell: CellPos) -> List[CellPos]:
        result = []
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            r, c = cell.row + dr, cell.col + dc
            if 0 <= r < self.config.rows and 0 <= c < self.config.cols:
                result.append(CellPos(r, c))
        return result

    def _matching_targets(self, color: str) -> List[TargetSpec]:
        return [t for t in self.config.targets if t.color == color]

    # Episode -----------------------------------------------------------

    def reset(self, seed: int) -> Tuple[EnvState, Dict[AgentId, Observation]]:
        position_type = CellPos if self.mode is GridMode.EASY else CornerPos
        objects = tuple(
            PlacedObject(o.object_id, o.color, position_type(*o.position))
            for o in sorted(self.config.objects, key=lambda o: o.object_id)
        )
        state = self._make_state(0, GridPayload(objects=objects))
        return state, self.observe_all(state)

    def objects_at(self, payload: GridPayload, position: Position) -> List[PlacedObject]:
        return [o for o in payload.objects if o.position == position]

    def legal_actions(self, state: EnvState, agent: int) -> FrozenSet[GridAction]:
        agent_id = self.check_agent(agent)
        cell = self.agent_cell(agent_id)
        payload: GridPayload = state.payload
        actions: set = {NoOp()}
        cell_targets = [t for t in self.config.targets if tuple(t.cell) == cell]

        if self.mode is GridMode.EASY:
            for obj in self.objects_at(payload, cell):
                for neighbor in self._neighbors(cell):
                    actions.add(MoveToCell(obj.object_id, neighbor))
                for target in cell_targets:
                    if target.color == obj.color:
                        actions.add(PlaceInTarget(obj.object_id, target.target_id))
        else:
            corners = cell_corners(cell)
            for obj in payload.objects:
                if obj.position not in corners:
                    continue
                for corner in corners:
                    if corner != obj.position:
                        actions.add(MoveToCorner(obj.object_id, corner))
                for target in cell_targets:
                    if target.color == obj.color:
                        actions.add(MoveToTarget(obj.object_id, target.target_id))
        return frozenset(actions)

    def detect_conflicts(self, state: EnvState, joint: JointAction) -> List[Conflict]:
        """Every same-object and same-destination conflict of ``joint``.

        Purely syntactic over the joint action. Delivery destinations are
        outside the corner collision domain.
        """
        by_object: Dict[str, List[AgentId]] = defaultdict(list)
        by_corner: Dict[CornerPos, List[Tuple[AgentId, str]]] = defaultdict(list)
        for agent, agent_action in joint.actions.items():
            action = agent_action.action
            if isinstance(action, NoOp):
                continue
            by_object[action.object_id].append(agent)
            if isinstance(action, MoveToCorner):
                by_corner[action.corner].append((agent, action.object_id))

        conflicts: List[Conflict] = []
        for object_id in sorted(by_object):
            agents = by_object[object_id]
            if len(agents) >= 2:
                names = ", ".join(f"agent_{a}" for a in agents)
                conflicts.append(
                    Conflict(
                        ConflictKind.SAME_OBJECT_MULTI_MOVE,
                        tuple(agents),
                        f"{object_id} moved by {names}",
                    )
                )
        if self.mode is GridMode.HARD:
            for corner in sorted(by_corner):
                entries = by_corner[corner]
                if len({object_id for _, object_id in entries}) >= 2:
                    agents = tuple(agent for agent, _ in entries)
                    sent = ", ".join(f"{o} (agent_{a})" for a, o in entries)
                    conflicts.append(
                        Conflict(
                            ConflictKind.DESTINATION_COLLISION,
                            agents,
                            f"{corner.render()} receives {sent}",
                        )
                    )
        return conflicts

    def manhattan_to_target(self, state: EnvState, object_id: str) -> int:
        obj = state.payload.find(object_id)
        if obj is None:
            raise UnknownObject(object_id)
        return self._distance(obj.color, obj.position)

    def _distance(self, color: str, position: Position) -> int:
        targets = self._matching_targets(color)
        if self.mode is GridMode.EASY:
            return min(_l1(position, tuple(t.cell)) for t in targets)
        return min(
            _l1(position, corner) for t in targets for corner in cell_corners(CellPos(*t.cell))
        )

    def distance_change(self, state: EnvState, action: Any) -> Optional[Tuple[int, int]]:
        if not isinstance(action, (MoveToCell, MoveToCorner)):
            return None
        obj = state.payload.find(action.object_id)
        if obj is None:
            return None
        destination = action.cell if isinstance(action, MoveToCell) else action.corner
        return self._distance(obj.color, obj.position), self._distance(obj.color, destination)

    def describe_unavailable(self, state: EnvState, agent: int, action: Any) -> str:
        term = format_grid_action(action)
        if isinstance(action, NoOp):
            return f"{term} is always available"
        obj = state.payload.find(action.object_id)
        if obj is None:
            return f"{action.object_id} is not on the grid (delivered or unknown)"
        reach = (self.agent_cell(agent),) if self.mode is GridMode.EASY else self.agent_corners(agent)
        if obj.position not in reach:
            return f"{action.object_id} is at {obj.position.render()}, out of reach of agent_{agent}"
        return f"{term} is not a legal move for agent_{agent} from {obj.position.render()}"

    def sanitize_joint(
        self, state: EnvState, joint: JointAction
    ) -> Tuple[JointAction, List[AgentId]]:
        """Replace illegal actions by NoOp; returns the joint and the degraded agents."""
        degraded: List[AgentId] = []
        updates: Dict[AgentId, GridAction] = {}
        for agent, agent_action in joint.actions.items():
            if agent_action.action not in self.legal_actions(state, agent):
                degraded.append(agent)
                updates[agent] = NoOp()
        if not degraded:
            return joint, []
        return joint.replace(updates), degraded

    def step(self, state: EnvState, joint: JointAction) -> StepOutcome:
        self.check_joint_coverage(joint)
        conflicts = self.detect_conflicts(state, joint)
        if conflicts:
            raise ConflictingJointAction(conflicts)

        joint, degraded = self.sanitize_joint(state, joint)
        for agent in degraded:
            logger.warning(f"Illegal action for agent_{agent} degraded to noop at step {state.step_index}")

        payload: GridPayload = state.payload
        moves: Dict[str, Position] = {}
        delivered: List[str] = []
        for agent_action in joint.actions.values():
            action = agent_action.action
            if isinstance(action, MoveToCell):
                moves[action.object_id] = action.cell
            elif isinstance(action, MoveToCorner):
                moves[action.object_id] = action.corner
            elif isinstance(action, DELIVERY_ACTIONS):
                delivered.append(action.object_id)

        remaining = tuple(
            PlacedObject(o.object_id, o.color, moves.get(o.object_id, o.position))
            for o in payload.objects
            if o.object_id not in delivered
        )
        next_payload = GridPayload(
            objects=remaining, delivered=payload.delivered + tuple(sorted(delivered))
        )
        next_state = self._make_state(state.step_index + 1, next_payload)
        goal_reached = not remaining
        reward = float(len(delivered))
        return StepOutcome(
            next_state=next_state,
            rewards={agent: reward for agent in self.agents},
            done=goal_reached or next_state.step_index >= self.config.max_steps,
            goal_reached=goal_reached,
        )

    # Wire grammar ------------------------------------------------------

    def parse_action(self, agent: int, term: Any) -> GridAction:
        if not isinstance(term, str):
            raise GrammarError(f"action for agent_{agent} must be a string, got {term!r}")
        text = term.strip()
        if text.lower() == "noop":
            return NoOp()
        match = _MOVE_RE.match(text)
        if not match:
            raise GrammarError(f"unrecognised action for agent_{agent}: {term!r}")
        object_id, kind, argument = match.groups()

        if kind == "target":
            if not re.fullmatch(IDENTIFIER, argument):
                raise GrammarError(f"malformed target id for agent_{agent}: {argument!r}")
            if self.mode is GridMode.EASY:
                return PlaceInTarget(object_id, argument)
            return MoveToTarget(object_id, argument)

        pair = _PAIR_RE.match(argument)
        if not pair:
            raise GrammarError(f"malformed {kind} position for agent_{agent}: {argument!r}")
        row, col = int(pair.group(1)), int(pair.group(2))
        if kind == "cell":
            if self.mode is not GridMode.EASY:
                raise GrammarError(f"cell moves are not allowed in hard mode (agent_{agent})")
            return MoveToCell(object_id, CellPos(row, col))
        if self.mode is not GridMode.HARD:
            raise GrammarError(f"corner moves are not allowed in easy mode (agent_{agent})")
        return MoveToCorner(object_id, CornerPos(row, col))

    def format_action(self, action: Any) -> str:
        return format_grid_action(action)

    def action_grammar(self) -> str:
        if self.mode is GridMode.EASY:
            return (
                "Each agent's action is one string: \"noop\", "
                "\"move(<object_id>, cell(<row>,<col>))\" to push an object from the agent's "
                "cell to a horizontally or vertically adjacent cell, or "
                "\"move(<object_id>, target(<target_id>))\" to place an object into a "
                "same-colour target in the agent's cell."
            )
        return (
            "Each agent's action is one string: \"noop\", "
            "\"move(<object_id>, corner(<row>,<col>))\" to move an object lying on one of the "
            "agent's four cell corners to another of those corners, or "
            "\"move(<object_id>, target(<target_id>))\" to deliver it into a same-colour "
            "target inside the agent's cell. Two agents must never move the same object, "
            "and two different objects must never be moved to the same corner."
        )

    def fallback_action(self, state: EnvState, agent: int) -> GridAction:
        return NoOp()

    def reference_joint(self, state: EnvState) -> JointAction:
        return greedy_plan(self, state)

    def scenario_dict(self) -> Dict[str, Any]:
        return {"env": self.name, "grid": self.config.model_dump(mode="json")}

    # Rendering ---------------------------------------------------------

    def render_position(self, position: Position) -> str:
        return position.render()

    def state_summary(self, state: EnvState) -> str:
        """One-line summary of object positions, used by memory renderings."""
        payload: GridPayload = state.payload
        if not payload.objects:
            return "no objects remaining"
        placed = ", ".join(f"{o.object_id}@{o.position.render()}" for o in payload.objects)
        return f"{len(payload.objects)} remaining: {placed}"

    def _render_actions(self, actions: Iterable[GridAction]) -> str:
        return "[" + ", ".join(format_grid_action(a) for a in _sorted_actions(actions)) + "]"

    def render_state(self, step_index: int, payload: GridPayload) -> str:
        """Byte-stable text description of a state with per-agent actions."""
        state = EnvState(step_index=step_index, payload=payload, text="")
        lines = [
            f"environment: {self.name}",
            f"size: {self.size_label}",
            f"step: {step_index}/{self.config.max_steps}",
            "objects:",
        ]
        if payload.objects:
            lines.extend(
                f"object {o.object_id} color={o.color} at {o.position.render()} "
                f"distance={self._distance(o.color, o.position)}"
                for o in payload.objects
            )
        else:
            lines.append("(none)")
        lines.append("targets:")
        if self.config.targets:
            lines.extend(
                f"target {t.target_id} color={t.color} at {CellPos(*t.cell).render()}"
                for t in sorted(self.config.targets, key=lambda t: t.target_id)
            )
        else:
            lines.append("(none)")

        if self.mode is GridMode.EASY:
            lines.append("cells:")
            for agent in self.agents:
                cell = self.agent_cell(agent)
                lines.append(
                    f"cell ({cell.row},{cell.col}) agent_{agent}: "
                    f"objects=[{', '.join(o.object_id for o in self.objects_at(payload, cell))}] "
                    f"targets=[{', '.join(self._cell_target_ids(cell))}] "
                    f"actions={self._render_actions(self.legal_actions(state, agent))}"
                )
        else:
            lines.append("corners:")
            for r in range(self.config.rows + 1):
                for c in range(self.config.cols + 1):
                    corner = CornerPos(r, c)
                    held = [o.object_id for o in self.objects_at(payload, corner)]
                    touching = ", ".join(f"agent_{a}" for a in self.agents_touching(corner))
                    lines.append(f"corner ({r},{c}): objects=[{', '.join(held)}] agents=[{touching}]")
            lines.append("agents:")
            for agent in self.agents:
                cell = self.agent_cell(agent)
                corners = ", ".join(f"({k.row},{k.col})" for k in cell_corners(cell))
                lines.append(
                    f"agent_{agent} cell ({cell.row},{cell.col}) corners=[{corners}] "
                    f"targets=[{', '.join(self._cell_target_ids(cell))}] "
                    f"actions={self._render_actions(self.legal_actions(state, agent))}"
                )
        return "\n".join(lines)

    def _cell_target_ids(self, cell: CellPos) -> List[str]:
        return sorted(t.target_id for t in self.config.targets if tuple(t.cell) == cell)

    def observe(self, state: EnvState, agent: int) -> Observation:
        agent_id = self.check_agent(agent)
        cell = self.agent_cell(agent_id)
        payload: GridPayload = state.payload
        if self.mode is GridMode.EASY:
            visible = tuple(self.objects_at(payload, cell))
        else:
            corners = cell_corners(cell)
            visible = tuple(o for o in payload.objects if o.position in corners)
        targets = tuple(
            sorted(
                (t for t in self.config.targets if tuple(t.cell) == cell),
                key=lambda t: t.target_id,
            )
        )
        legal = tuple(format_grid_action(a) for a in _sorted_actions(self.legal_actions(state, agent_id)))

        lines = [f"agent_{agent_id} observation", f"cell: ({cell.row},{cell.col})"]
        if self.mode is GridMode.HARD:
            lines.append("corners: " + ", ".join(f"({k.row},{k.col})" for k in cell_corners(cell)))
        lines.append("visible objects:")
        lines.extend(
            f"object {o.object_id} color={o.color} at {o.position.render()} "
            f"distance={self._distance(o.color, o.position)}"
            for o in visible
        )
        if not visible:
            lines.append("(none)")
        lines.append("targets in cell: [" + ", ".join(f"{t.target_id} ({t.color})" for t in targets) + "]")
        lines.append("available actions: [" + ", ".join(legal) + "]")
        return Observation(
            agent=agent_id,
            payload=GridObservation(agent_id, cell, visible, targets, legal),
            text="\n".join(lines),
        )

    def _make_state(self, step_index: int, payload: GridPayload) -> EnvState:
        return EnvState(step_index=step_index, payload=payload, text=self.render_state(step_index, payload))


# Greedy planner ----------------------------------------------------------


def greedy_plan(
    env: GridTransportEnvironment, state: EnvState, reverse: bool = False
) -> JointAction:
    """Conflict-free, distance-decreasing joint action.

    Objects are served closest-first (or farthest-first with ``reverse``);
    each agent acts at most once and, in Hard mode, each destination corner
    is claimed at most once. Objects with no useful move wait.
    """
    payload: GridPayload = state.payload
    order = sorted(
        payload.objects,
        key=lambda o: (env._distance(o.color, o.position), o.object_id),
        reverse=reverse,
    )
    chosen: Dict[AgentId, GridAction] = {}
    claimed_corners: set = set()

    for obj in order:
        if env.mode is GridMode.EASY:
            agent = env.agent_at(obj.position)
            if agent in chosen:
                continue
            action = _easy_move(env, state, agent, obj)
            if action is not None:
                chosen[agent] = action
            continue

        candidates = []
        for agent in env.agents_touching(obj.position):
            if agent in chosen:
                continue
            for action in env.legal_actions(state, agent):
                if isinstance(action, MoveToTarget) and action.object_id == obj.object_id:
                    candidates.append((-100, action.target_id, agent, action))
                elif isinstance(action, MoveToCorner) and action.object_id == obj.object_id:
                    if action.corner in claimed_corners:
                        continue
                    old, new = env.distance_change(state, action)
                    if new < old:
                        candidates.append((new - old, str(action.corner), agent, action))
        if candidates:
            _, _, agent, action = min(candidates, key=lambda c: (c[0], c[1], c[2]))
            chosen[agent] = action
            if isinstance(action, MoveToCorner):
                claimed_corners.add(action.corner)

    terms = {agent: chosen.get(agent, NoOp()) for agent in env.agents}
    return JointAction.from_terms(terms)


def _easy_move(
    env: GridTransportEnvironment, state: EnvState, agent: AgentId, obj: PlacedObject
) -> Optional[GridAction]:
    legal = env.legal_actions(state, agent)
    deliveries = sorted(
        (a for a in legal if isinstance(a, PlaceInTarget) and a.object_id == obj.object_id),
        key=lambda a: a.target_id,
    )
    if deliveries:
        return deliveries[0]
    best = None
    for action in _sorted_actions(legal):
        if isinstance(action, MoveToCell) and action.object_id == obj.object_id:
            old, new = env.distance_change(state, action)
            if new < old and (best is None or new < best[0]):
                best = (new, action)
    return best[1] if best else None


# Scenario generation ---------------------------------------------------


def generate_scenario(
    rows: int,
    cols: int,
    mode: GridMode,
    seed: int,
    n_objects: Optional[int] = None,
    max_steps: Optional[int] = None,
    max_attempts: int = 100,
) -> GridConfig:
    """Seeded uniform placement of objects and same-colour targets.

    Instances where every object already sits at distance zero are rejected
    and redrawn.
    """
    mode = GridMode(mode)
    cells = rows * cols
    if n_objects is None:
        n_objects = max(1, cells // 2)
    if n_objects < 1:
        raise ScenarioError("a scenario needs at least one object")
    rng = stream(seed, f"grid-scenario-{mode.value}-{rows}x{cols}")

    for attempt in range(max_attempts):
        target_cells = rng.choice(cells, size=n_objects, replace=n_objects > cells)
        targets = []
        objects = []
        for index in range(n_objects):
            color = COLORS[index % len(COLORS)]
            number = index // len(COLORS)
            cell = divmod(int(target_cells[index]), cols)
            targets.append(TargetSpec(target_id=f"target_{color}_{number}", color=color, cell=cell))
            if mode is GridMode.EASY:
                position = (int(rng.integers(rows)), int(rng.integers(cols)))
            else:
                position = (int(rng.integers(rows + 1)), int(rng.integers(cols + 1)))
            objects.append(ObjectSpec(object_id=f"object_{color}_{number}", color=color, position=position))

        config = GridConfig(
            rows=rows,
            cols=cols,
            mode=mode,
            objects=tuple(objects),
            targets=tuple(targets),
            max_steps=max_steps,
        )
        env = GridTransportEnvironment(config)
        state, _ = env.reset(seed)
        if any(env.manhattan_to_target(state, o.object_id) > 0 for o in state.payload.objects):
            logger.debug(f"Generated {mode.value} {rows}x{cols} scenario after {attempt + 1} draw(s)")
            return config

    raise ScenarioError(f"could not generate an unsolved scenario in {max_attempts} attempts")
