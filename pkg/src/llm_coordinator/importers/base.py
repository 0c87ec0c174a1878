"""Base importer interface."""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

from ..core.environment import BaseEnvironment


class ImportResult:
    """Result of an import operation."""

    def __init__(
        self,
        success: bool,
        environment: Optional[BaseEnvironment] = None,
        errors: Optional[List[str]] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        self.success = success
        self.environment = environment
        self.errors = errors or []
        self.metadata = metadata or {}

    def __repr__(self) -> str:
        name = self.environment.name if self.environment else None
        return f"<ImportResult(success={self.success}, environment={name!r})>"


class BaseImporter(ABC):
    """Abstract base class for environment importers."""

    @abstractmethod
    def validate_source(self, source: str) -> bool:
        """Validate if source is accessible and has a supported format.

        Args:
            source: Source path

        Returns:
            True if source is valid and accessible
        """

    @abstractmethod
    def extract_data(self, source: str) -> Dict[str, Any]:
        """Read the raw scenario description from source.

        Args:
            source: Source path

        Returns:
            Scenario mapping
        """

    @abstractmethod
    def build(self, data: Dict[str, Any]) -> BaseEnvironment:
        """Build an environment from an extracted scenario mapping."""

    def import_data(self, source: str) -> ImportResult:
        """Complete import process; never raises.

        Args:
            source: Source path

        Returns:
            Import result carrying the environment or the errors
        """
        if not self.validate_source(source):
            return ImportResult(success=False, errors=[f"Source validation failed: {source}"])

        try:
            data = self.extract_data(source)
        except Exception as e:
            return ImportResult(success=False, errors=[f"Data extraction failed: {str(e)}"])

        try:
            environment = self.build(data)
        except Exception as e:
            return ImportResult(success=False, errors=[f"Scenario is invalid: {str(e)}"])

        return ImportResult(
            success=True,
            environment=environment,
            metadata={"source": source, "scenario_hash": environment.scenario_hash()},
        )
