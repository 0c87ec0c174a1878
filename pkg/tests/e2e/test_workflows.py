"""End-to-end tests: whole experiments with the scripted backend."""

import math
import os

import numpy as np
import pytest
from click.testing import CliRunner

from llm_coordinator.cli.main import cli
from llm_coordinator.core.seeding import derive_trial_seed
from llm_coordinator.environments import (
    GsConfig,
    brute_force_optimum,
    gaussian_squeeze,
    stationary_root,
)
from llm_coordinator.llm.scripted import ScriptedBackend
from processing import EpisodeEngine, Method, RunConfig, build_environment, run_batch

GRID_SIZES = [("grid-easy", 2, 2), ("grid-easy", 2, 4), ("grid-easy", 4, 8), ("grid-hard", 2, 2), ("grid-hard", 2, 4)]
GS_AGENTS = [3, 5, 10, 20, 50]
SEEDS = range(10)


def scripted_factory(config, trial, seed):
    return ScriptedBackend()


class TestObjectiveProperties:
    """Randomised checks of the gs objective and its brute-force optimum."""

    def test_matches_independent_evaluation(self):
        rng = np.random.default_rng(2024)
        xs = rng.uniform(0, 500, 1000)
        mus = rng.uniform(1, 300, 1000)
        sigmas = rng.uniform(0.1, 80, 1000)

        expected = xs * np.exp(-((xs - mus) ** 2) / sigmas**2)
        actual = np.array([gaussian_squeeze(x, m, s) for x, m, s in zip(xs, mus, sigmas)])

        np.testing.assert_allclose(actual, expected, rtol=1e-12, atol=1e-300)
        assert gaussian_squeeze(0, 7.5, 1.5) == 0.0
        assert gaussian_squeeze(7.5, 7.5, 1.5) == 7.5

    def test_argmax_near_stationary_root(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n_agents = int(rng.integers(1, 60))
            config = GsConfig(
                n_agents=n_agents,
                mu=float(rng.uniform(0.5, 9 * n_agents)),
                sigma=float(rng.uniform(0.5, 3 * n_agents)),
            )
            low, high = config.sum_range
            root = min(max(stationary_root(config.mu, config.sigma), low), high)

            assert abs(brute_force_optimum(config).x_star - root) <= 1


@pytest.mark.slow
class TestScriptedGreedyGrid:
    """The planner completes random grid scenarios without executed conflicts."""

    @pytest.mark.asyncio
    @pytest.mark.parametrize("env_name,rows,cols", GRID_SIZES)
    async def test_completes_every_seed(self, env_name, rows, cols, test_settings):
        config = RunConfig(method=Method.SCRIPTED_GREEDY, env=env_name, rows=rows, cols=cols, trials=len(SEEDS))

        report = await run_batch([config], test_settings, scripted_factory, show_progress=False)

        assert report.success_count == len(SEEDS)
        for result in report.results:
            assert result.llm_calls == 0
            if env_name == "grid-easy":
                env = build_environment(config, result.seed)
                state, _ = env.reset(result.seed)
                objects = state.payload.objects
                bound = sum(env.manhattan_to_target(state, o.object_id) for o in objects) + len(objects)
                assert result.steps <= bound

    @pytest.mark.asyncio
    async def test_adjacent_object_needs_no_feedback(self, test_settings, scenario_path):
        config = RunConfig(env="grid-easy", rows=1, cols=2, scenario_path=scenario_path("easy_1x2.yaml"))

        result = await EpisodeEngine(test_settings).run_episode(config, ScriptedBackend())

        assert result.success
        assert result.steps <= 2
        assert result.feedback_count == 0


@pytest.mark.slow
class TestActorCriticOnGs:
    """The actor-critic loop finds the gs optimum at oracle fidelity."""

    @pytest.mark.asyncio
    @pytest.mark.parametrize("agents", GS_AGENTS)
    async def test_final_reward_near_optimum(self, agents, test_settings):
        config = RunConfig(env="gs", agents=agents, rounds=20, trials=len(SEEDS))

        report = await run_batch([config], test_settings, scripted_factory, show_progress=False)

        for result in report.results:
            assert result.success
            assert result.regret <= 0.05
            assert result.llm_calls == 3 * 20

    @pytest.mark.asyncio
    @pytest.mark.parametrize("agents", [3, 10])
    async def test_only_exploit_never_beats_actor_critic(self, agents, test_settings):
        """Pure exploitation settles on a local value."""
        engine = EpisodeEngine(test_settings)
        for seed in (derive_trial_seed(0, k) for k in range(3)):
            base = dict(env="gs", agents=agents, rounds=20, seed=seed)
            actor_critic = await engine.run_episode(RunConfig(**base), ScriptedBackend())
            exploit = await engine.run_baseline(RunConfig(method=Method.ONLY_EXPLOIT, **base), ScriptedBackend())

            assert exploit.final_reward <= actor_critic.final_reward

    @pytest.mark.asyncio
    async def test_decentralized_calls_per_round(self, test_settings):
        config = RunConfig(method=Method.DECENTRALIZED, env="gs", agents=5, rounds=4)

        result = await EpisodeEngine(test_settings).run_baseline(config, ScriptedBackend())

        assert result.llm_calls == 5 * 4


class TestExperimentWorkflow:
    """Run, report and replay through the command line."""

    def test_run_report_replay(self, temp_config_file, temp_output_dir):
        runner = CliRunner()
        base = ["--config", temp_config_file, "--log-level", "ERROR"]
        record = str(temp_output_dir / "experiment")

        run = runner.invoke(
            cli, base + ["run", "--env", "grid-hard", "--size", "2x2", "--trials", "3", "--record", record]
        )
        assert run.exit_code == 0, run.output

        report = runner.invoke(cli, base + ["report", record])
        assert report.exit_code == 0
        assert "Summary" in report.output

        transcripts = sorted(f for f in os.listdir(record) if f.endswith(".jsonl"))
        assert len(transcripts) == 3
        for name in transcripts:
            replay = runner.invoke(cli, base + ["replay", os.path.join(record, name)])
            assert replay.exit_code == 0, replay.output

    def test_oracle_matches_brute_force(self, temp_config_file):
        result = CliRunner().invoke(cli, ["--config", temp_config_file, "oracle-gs", "--mu", "14", "--sigma", "5"])

        assert result.exit_code == 0
        assert "x* = 15" in result.output
        assert f"R* = {15 * math.exp(-1 / 25)!r}" in result.output
