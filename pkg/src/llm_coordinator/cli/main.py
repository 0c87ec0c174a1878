"""CLI interface for the LLM coordinator."""

import asyncio
import json
import os
from typing import Optional, Tuple

import click
from dotenv import load_dotenv
from pydantic import ValidationError

from processing import (
    BACKEND_KINDS,
    BackendManager,
    METHOD_ALIASES,
    EpisodeEngine,
    Method,
    RunConfig,
    parse_size,
    run_batch,
    transcript_name,
)

from ..config import Settings
from ..environments import GsConfig, allocate_greedy, brute_force_optimum
from ..errors import CoordinatorError, EmptyInput
from ..exporters import build_report, format_report
from ..llm.replay import ReplayBackend
from ..transcripts import load_transcript, stable_json_dumps
from ..utils import configure_logging

ENV_CHOICES = ["gs", "grid-easy", "grid-hard"]


@click.group()
@click.option("--config", "-c", type=click.Path(exists=True), help="Configuration file path")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    help="Override the configured log level",
)
@click.pass_context
def cli(ctx, config: Optional[str], log_level: Optional[str]):
    """LLM Coordinator - actor-critic coordination of LLM agents."""
    load_dotenv()
    ctx.ensure_object(dict)
    try:
        settings = Settings.load(config)
    except (OSError, ValueError) as e:
        raise click.UsageError(f"Invalid configuration file: {e}")
    configure_logging(settings.logging, log_level)
    ctx.obj["settings"] = settings


def _replay_source(replay_from: str, config: RunConfig, trial: int, seed: int) -> str:
    if os.path.isdir(replay_from):
        return os.path.join(replay_from, transcript_name(config, trial, seed))
    return replay_from


@cli.command()
@click.option("--env", "env_name", type=click.Choice(ENV_CHOICES), default="gs", help="Environment")
@click.option("--size", default="2x2", help="Grid size RxC")
@click.option("--agents", type=int, default=3, help="Number of gs agents")
@click.option(
    "--method",
    type=click.Choice([m.value for m in Method] + sorted(METHOD_ALIASES)),
    default=Method.ACTOR_CRITIC.value,
    help="Coordination method",
)
@click.option("--backend", type=click.Choice(BACKEND_KINDS), default="scripted", help="Model backend")
@click.option("--seed", type=int, default=0, help="Base seed")
@click.option("--trials", type=int, default=1, help="Number of trials")
@click.option("--record", type=click.Path(file_okay=False), help="Directory for transcripts and CSVs")
@click.option("--mu", type=float, help="gs peak location")
@click.option("--sigma", type=float, help="gs peak width")
@click.option("--rounds", type=int, default=20, help="gs decision rounds")
@click.option("--n-objects", type=int, help="Objects in generated grid scenarios")
@click.option("--if-limit", type=int, help="Internal feedback iteration limit")
@click.option("--ef-limit", type=int, help="External feedback iteration limit")
@click.option("--mem-window", type=int, help="Decision memory window")
@click.option("--max-steps", type=int, help="Episode horizon")
@click.option("--debate-rounds", type=int, help="Debate rounds before the judge decides")
@click.option("--scenario", type=click.Path(exists=True, dir_okay=False), help="Grid scenario file")
@click.option("--provider", "-p", help="Configured provider for the http backend")
@click.option(
    "--replay-from",
    type=click.Path(exists=True),
    help="Transcript file, or directory of recorded transcripts, for the replay backend",
)
@click.pass_context
def run(
    ctx,
    env_name: str,
    size: str,
    agents: int,
    method: str,
    backend: str,
    seed: int,
    trials: int,
    record: Optional[str],
    mu: Optional[float],
    sigma: Optional[float],
    rounds: int,
    n_objects: Optional[int],
    if_limit: Optional[int],
    ef_limit: Optional[int],
    mem_window: Optional[int],
    max_steps: Optional[int],
    debate_rounds: Optional[int],
    scenario: Optional[str],
    provider: Optional[str],
    replay_from: Optional[str],
):
    """Run a batch of episodes and print the summary table."""
    settings: Settings = ctx.obj["settings"]
    loop = settings.loop
    try:
        rows, cols = parse_size(size)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--size")

    try:
        config = RunConfig(
            method=method,
            env=env_name,
            agents=agents,
            rows=rows,
            cols=cols,
            n_objects=n_objects,
            mu=mu,
            sigma=sigma,
            rounds=rounds,
            max_steps=max_steps,
            if_limit=if_limit if if_limit is not None else loop.if_limit,
            ef_limit=ef_limit if ef_limit is not None else loop.ef_limit,
            mem_window=mem_window,
            grammar_reask_limit=loop.grammar_reask_limit,
            debate_rounds=debate_rounds if debate_rounds is not None else loop.debate_rounds,
            seed=seed,
            trials=trials,
            backend=backend,
            provider=provider,
            scenario_path=scenario,
        )
    except ValidationError as e:
        raise click.UsageError(f"Invalid run configuration:\n{e}")

    manager = BackendManager(settings)
    if backend == "replay" and not replay_from:
        raise click.UsageError("--backend replay needs --replay-from")
    if backend == "http":
        try:
            manager.create_http(provider)
        except (KeyError, ValueError) as e:
            raise click.UsageError(str(e))

    def backend_factory(run_config: RunConfig, trial: int, trial_seed: int):
        if run_config.backend == "replay":
            source = _replay_source(replay_from, run_config, trial, trial_seed)
            return ReplayBackend(load_transcript(source).exchanges)
        return manager.create(run_config.backend, provider=run_config.provider)

    click.echo(
        f"Running {trials} trial(s) of {config.method.value} on {env_name} {config.size_label}...",
        err=True,
    )
    try:
        report = asyncio.run(
            run_batch([config], settings, backend_factory, record, settings.processing.show_progress)
        )
    except (CoordinatorError, OSError) as e:
        raise click.ClickException(str(e))

    click.echo(format_report(report.trials, report.tokens), nl=False)
    if record:
        click.echo(f"Transcripts and tables written to {record}", err=True)


@cli.command()
@click.argument("transcript", type=click.Path(exists=True, dir_okay=False))
@click.option("--verify/--no-verify", default=True, help="Require the recorded result to be reproduced")
@click.option("--record", type=click.Path(dir_okay=False), help="Write the replayed transcript here")
@click.pass_context
def replay(ctx, transcript: str, verify: bool, record: Optional[str]):
    """Re-execute a recorded episode from its transcript."""
    engine = EpisodeEngine(ctx.obj["settings"])
    try:
        recorded = load_transcript(transcript)
        result = asyncio.run(engine.replay(recorded, transcript_path=record, verify=verify))
    except (CoordinatorError, OSError) as e:
        raise click.ClickException(f"{type(e).__name__}: {e}")
    click.echo(stable_json_dumps(result.comparable()))


@cli.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Also write the report here")
def report(paths: Tuple[str, ...], output: Optional[str]):
    """Summarize trial and token CSVs (files or record directories)."""
    try:
        text = build_report(list(paths))
    except EmptyInput as e:
        raise click.ClickException(str(e))
    click.echo(text, nl=False)
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text)


@cli.command(name="oracle-gs")
@click.option("--mu", type=float, required=True, help="Peak location")
@click.option("--sigma", type=float, required=True, help="Peak width")
@click.option("--agents", type=int, default=3, help="Number of agents")
@click.option("--action-min", type=int, default=0, help="Smallest per-agent action")
@click.option("--action-max", type=int, default=9, help="Largest per-agent action")
@click.option("--json", "as_json", is_flag=True, help="Print JSON instead of text")
def oracle_gs(mu: float, sigma: float, agents: int, action_min: int, action_max: int, as_json: bool):
    """Brute-force Gaussian-squeeze optimum and one allocation reaching it."""
    try:
        config = GsConfig(
            n_agents=agents, mu=mu, sigma=sigma, action_min=action_min, action_max=action_max
        )
    except ValidationError as e:
        raise click.UsageError(f"Invalid gs parameters:\n{e}")
    optimum = brute_force_optimum(config)
    allocation = allocate_greedy(optimum.x_star, agents, action_min, action_max)
    if as_json:
        click.echo(
            json.dumps(
                {"x_star": optimum.x_star, "r_star": optimum.r_star, "allocation": allocation},
                sort_keys=True,
            )
        )
        return
    click.echo(f"x* = {optimum.x_star}")
    click.echo(f"R* = {optimum.r_star!r}")
    click.echo(f"allocation = {allocation}")


def main():
    """Main entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
