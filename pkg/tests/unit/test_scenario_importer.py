"""Unit tests for scenario files."""

import pytest

from llm_coordinator.environments import GaussianSqueezeEnvironment, GridTransportEnvironment
from llm_coordinator.errors import ScenarioError
from llm_coordinator.importers import (
    ScenarioImporter,
    dump_scenario,
    environment_from_scenario,
    load_scenario,
)


class TestScenarioImporter:
    """Test the importer workflow."""

    def test_import_grid(self, scenario_path):
        result = ScenarioImporter().import_data(scenario_path("easy_1x2.yaml"))

        assert result.success
        assert isinstance(result.environment, GridTransportEnvironment)
        assert result.environment.max_steps == 20
        assert result.metadata["scenario_hash"] == result.environment.scenario_hash()

    def test_import_gs(self, scenario_path):
        env = load_scenario(scenario_path("gs_3.yaml"))

        assert isinstance(env, GaussianSqueezeEnvironment)
        assert (env.config.mu, env.config.sigma) == (14.0, 5.0)

    def test_missing_file_is_reported(self, temp_output_dir):
        result = ScenarioImporter().import_data(str(temp_output_dir / "nope.yaml"))

        assert not result.success
        assert result.errors[0].startswith("Source validation failed")

    def test_wrong_extension(self, temp_output_dir):
        path = temp_output_dir / "scenario.txt"
        path.write_text("env: gs\n")

        assert not ScenarioImporter().validate_source(str(path))

    def test_invalid_scenario_never_raises(self, scenario_path):
        """Objects outside the grid are reported, not raised."""
        result = ScenarioImporter().import_data(scenario_path("broken.yaml"))

        assert not result.success
        assert result.errors[0].startswith("Scenario is invalid")

    def test_non_mapping_file(self, temp_output_dir):
        path = temp_output_dir / "list.yaml"
        path.write_text("- 1\n- 2\n")

        result = ScenarioImporter().import_data(str(path))

        assert result.errors[0].startswith("Data extraction failed")

    def test_load_scenario_raises(self, scenario_path):
        with pytest.raises(ScenarioError):
            load_scenario(scenario_path("broken.yaml"))


class TestScenarioDict:
    def test_unknown_environment(self):
        with pytest.raises(ScenarioError):
            environment_from_scenario({"env": "maze"})

    def test_mode_must_match_env(self, easy_env):
        data = easy_env.scenario_dict()
        data["env"] = "grid-hard"

        with pytest.raises(ScenarioError):
            environment_from_scenario(data)

    @pytest.mark.parametrize("name", ["easy_1x2.yaml", "hard_2x2.yaml", "gs_3.yaml"])
    def test_dump_then_load_keeps_hash(self, name, scenario_path, temp_output_dir):
        env = load_scenario(scenario_path(name))
        path = str(temp_output_dir / "copy" / name)

        dump_scenario(env, path)

        assert load_scenario(path).scenario_hash() == env.scenario_hash()
