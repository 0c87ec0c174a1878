"""Batch runner: many (config, trial) episodes with bounded concurrency."""

import asyncio
import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd
from tqdm import tqdm

from llm_coordinator.config import Settings
from llm_coordinator.core.seeding import derive_trial_seed
from llm_coordinator.exporters import ReportExporter, aggregate_frame, tokens_frame, trials_frame
from llm_coordinator.llm.base import BaseLLMBackend

from .engine import EpisodeEngine
from .models import EpisodeResult, RunConfig

logger = logging.getLogger(__name__)

BackendFactory = Callable[[RunConfig, int, int], BaseLLMBackend]


def transcript_name(config: RunConfig, trial: int, seed: int) -> str:
    return f"{config.method.value}_{config.env}_{config.size_label}_trial{trial:03d}_seed{seed}.jsonl"


@dataclass
class BatchReport:
    """Results of a batch in trial order, with their tables."""

    results: List[EpisodeResult] = field(default_factory=list)
    files: Dict[str, str] = field(default_factory=dict)

    @property
    def records(self) -> List[Dict]:
        return [r.to_record() for r in self.results]

    @property
    def trials(self) -> pd.DataFrame:
        return trials_frame(self.records)

    @property
    def tokens(self) -> pd.DataFrame:
        return tokens_frame(self.records)

    @property
    def aggregate(self) -> pd.DataFrame:
        return aggregate_frame(self.trials)

    @property
    def success_count(self) -> int:
        return sum(1 for r in self.results if r.success)


async def run_batch(
    configs: Sequence[RunConfig],
    settings: Settings,
    backend_factory: BackendFactory,
    record_dir: Optional[str] = None,
    show_progress: bool = True,
) -> BatchReport:
    """Run ``config.trials`` episodes per config.

    Trial ``k`` of a config uses the seed derived from (``config.seed``, ``k``),
    so results do not depend on scheduling. With ``record_dir`` every episode
    writes its transcript there, and the trial, token and aggregate CSVs are
    written next to them.

    Args:
        configs: Run configurations
        settings: Application settings; ``processing.trial_concurrency`` bounds parallel episodes
        backend_factory: Fresh backend per (config, trial, seed)
        record_dir: Output directory for transcripts and tables
        show_progress: Show a progress bar

    Returns:
        BatchReport with results in (config, trial) order
    """
    engine = EpisodeEngine(settings)
    semaphore = asyncio.Semaphore(settings.processing.trial_concurrency)
    jobs = [(config, trial) for config in configs for trial in range(config.trials)]
    if record_dir:
        os.makedirs(record_dir, exist_ok=True)

    progress = tqdm(total=len(jobs), desc="episodes", unit="ep", disable=not show_progress)

    async def run_job(config: RunConfig, trial: int) -> EpisodeResult:
        seed = derive_trial_seed(config.seed, trial)
        path = os.path.join(record_dir, transcript_name(config, trial, seed)) if record_dir else None
        async with semaphore:
            result = await engine.run_episode(
                config,
                backend_factory(config, trial, seed),
                trial=trial,
                seed=seed,
                transcript_path=path,
            )
        progress.update(1)
        return result

    logger.info(f"Running {len(jobs)} episode(s), {settings.processing.trial_concurrency} at a time")
    try:
        results = await asyncio.gather(*(run_job(config, trial) for config, trial in jobs))
    finally:
        progress.close()

    report = BatchReport(results=list(results))
    if record_dir and report.results:
        report.files = ReportExporter(record_dir).export(report.records)
    logger.info(f"Batch done: {report.success_count}/{len(report.results)} successful")
    return report
