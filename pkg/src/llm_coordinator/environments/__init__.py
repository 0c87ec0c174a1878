"""Benchmark environments."""

from .gaussian_squeeze import (
    GaussianSqueezeEnvironment,
    GsConfig,
    GsOptimum,
    GsPayload,
    GsRoundRecord,
    allocate_even,
    allocate_greedy,
    brute_force_optimum,
    format_reward,
    gaussian_squeeze,
    stationary_root,
)
from .grid_transport import (
    CellPos,
    Conflict,
    ConflictKind,
    CornerPos,
    GridAction,
    GridConfig,
    GridMode,
    GridPayload,
    GridTransportEnvironment,
    MoveToCell,
    MoveToCorner,
    MoveToTarget,
    NoOp,
    ObjectSpec,
    PlaceInTarget,
    PlacedObject,
    TargetSpec,
    format_grid_action,
    generate_scenario,
    greedy_plan,
)

ENVIRONMENT_NAMES = ("gs", "grid-easy", "grid-hard")

__all__ = [
    "ENVIRONMENT_NAMES",
    "CellPos",
    "Conflict",
    "ConflictKind",
    "CornerPos",
    "GaussianSqueezeEnvironment",
    "GridAction",
    "GridConfig",
    "GridMode",
    "GridPayload",
    "GridTransportEnvironment",
    "GsConfig",
    "GsOptimum",
    "GsPayload",
    "GsRoundRecord",
    "MoveToCell",
    "MoveToCorner",
    "MoveToTarget",
    "NoOp",
    "ObjectSpec",
    "PlaceInTarget",
    "PlacedObject",
    "TargetSpec",
    "allocate_even",
    "allocate_greedy",
    "brute_force_optimum",
    "format_grid_action",
    "format_reward",
    "gaussian_squeeze",
    "generate_scenario",
    "greedy_plan",
    "stationary_root",
]
