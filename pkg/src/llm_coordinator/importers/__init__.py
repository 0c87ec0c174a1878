"""Importers package initialization."""

from .base import BaseImporter, ImportResult
from .scenario_importer import ScenarioImporter, dump_scenario, environment_from_scenario, load_scenario

__all__ = [
    "BaseImporter",
    "ImportResult",
    "ScenarioImporter",
    "dump_scenario",
    "environment_from_scenario",
    "load_scenario",
]
