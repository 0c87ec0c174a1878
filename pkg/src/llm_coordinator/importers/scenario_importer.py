"""YAML scenario files and scenario dictionaries."""

import logging
import os
from typing import Any, Dict, Mapping

import yaml
from pydantic import ValidationError

from ..core.environment import BaseEnvironment
from ..environments import GaussianSqueezeEnvironment, GridConfig, GridTransportEnvironment, GsConfig
from ..errors import ScenarioError
from .base import BaseImporter

logger = logging.getLogger(__name__)

SCENARIO_EXTENSIONS = (".yaml", ".yml", ".json")


def environment_from_scenario(data: Mapping[str, Any]) -> BaseEnvironment:
    """Inverse of ``BaseEnvironment.scenario_dict``.

    Raises:
        ScenarioError: unknown environment or invalid parameters
    """
    if not isinstance(data, Mapping):
        raise ScenarioError("scenario must be a mapping")
    name = data.get("env")
    try:
        if name == "gs":
            return GaussianSqueezeEnvironment(GsConfig.model_validate(data.get("gs") or {}))
        if name in ("grid-easy", "grid-hard"):
            grid = dict(data.get("grid") or {})
            grid.setdefault("mode", name.split("-", 1)[1])
            config = GridConfig.model_validate(grid)
            if f"grid-{config.mode.value}" != name:
                raise ScenarioError(f"scenario env {name} does not match grid mode {config.mode.value}")
            return GridTransportEnvironment(config)
    except ValidationError as e:
        raise ScenarioError(f"invalid {name} scenario: {e}") from e
    raise ScenarioError(f"unknown scenario environment: {name!r}")


class ScenarioImporter(BaseImporter):
    """Reads scenario files (YAML; JSON is valid YAML too)."""

    def validate_source(self, source: str) -> bool:
        if not os.path.isfile(source):
            return False
        return source.lower().endswith(SCENARIO_EXTENSIONS)

    def extract_data(self, source: str) -> Dict[str, Any]:
        with open(source, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
        if not isinstance(data, dict):
            raise ScenarioError(f"{source}: scenario file must contain a mapping")
        return data

    def build(self, data: Dict[str, Any]) -> BaseEnvironment:
        return environment_from_scenario(data)


def load_scenario(path: str) -> BaseEnvironment:
    """Load a scenario file; raises ScenarioError with every problem found."""
    result = ScenarioImporter().import_data(path)
    if not result.success or result.environment is None:
        raise ScenarioError("; ".join(result.errors))
    logger.info(f"Loaded {result.environment.name} scenario from {path}")
    return result.environment


def dump_scenario(env: BaseEnvironment, path: str) -> None:
    """Write the environment's scenario in the file format read by :func:`load_scenario`."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(env.scenario_dict(), f, sort_keys=True)
