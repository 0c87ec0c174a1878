"""Episode engine: the decision loop, the failure taxonomy and transcripts."""

import logging
import math
from typing import Any, Dict, Iterable, List, Optional

from llm_coordinator.config import Settings
from llm_coordinator.core.environment import BaseEnvironment
from llm_coordinator.core.types import TransitionRecord, agent_key
from llm_coordinator.environments import (
    GaussianSqueezeEnvironment,
    GridTransportEnvironment,
    GsConfig,
    brute_force_optimum,
    generate_scenario,
)
from llm_coordinator.errors import (
    ContextLengthExceeded,
    GrammarLimitExceeded,
    InternalFeedbackExhausted,
    ReplayDivergence,
    ScenarioError,
    TransportError,
)
from llm_coordinator.importers import environment_from_scenario, load_scenario
from llm_coordinator.llm.base import BaseLLMBackend, ChatExchange, TokenUsage
from llm_coordinator.llm.gateway import LLMGateway
from llm_coordinator.llm.replay import ReplayBackend
from llm_coordinator.memory import DecisionMemory
from llm_coordinator.transcripts import Transcript, TranscriptWriter

from .baselines import build_policy
from .models import BASELINE_METHODS, EpisodeResult, FailureReason, Method, RunConfig

logger = logging.getLogger(__name__)

FAILURES = (
    (GrammarLimitExceeded, FailureReason.GRAMMAR_LIMIT),
    (ContextLengthExceeded, FailureReason.CONTEXT_LENGTH),
    (InternalFeedbackExhausted, FailureReason.INTERNAL_EXHAUSTED),
    (TransportError, FailureReason.TRANSPORT),
)


def build_environment(config: RunConfig, seed: int) -> BaseEnvironment:
    """Environment instance of a run; grid scenarios are drawn from ``seed``."""
    if config.env == "gs":
        gs = GsConfig(
            n_agents=config.agents,
            mu=config.mu,
            sigma=config.sigma,
            max_rounds=config.rounds,
        )
        return GaussianSqueezeEnvironment(gs)
    if config.scenario_path:
        env = load_scenario(config.scenario_path)
        if env.name != config.env:
            raise ScenarioError(f"scenario is a {env.name} instance, run asks for {config.env}")
        return env
    grid = generate_scenario(
        config.rows,
        config.cols,
        config.env.split("-", 1)[1],
        seed,
        n_objects=config.n_objects,
    )
    return GridTransportEnvironment(grid)


def memory_window(config: RunConfig, settings: Settings, env: BaseEnvironment) -> int:
    if config.mem_window is not None:
        return config.mem_window
    if env.name == "gs":
        return env.max_steps
    return settings.loop.grid_memory_window


class EpisodeEngine:
    """Runs single episodes against a backend."""

    def __init__(self, settings: Optional[Settings] = None):
        """Initialize the engine.

        Args:
            settings: Application settings (generation, processing and loop sections)
        """
        self.settings = settings or Settings()

    def _context_limit(self, config: RunConfig) -> int:
        try:
            return self.settings.get_provider_config(config.provider).context_limit
        except KeyError:
            logger.warning(f"Unknown provider '{config.provider}', using the default context limit")
            return self.settings.get_provider_config().context_limit

    async def run_episode(
        self,
        config: RunConfig,
        backend: BaseLLMBackend,
        trial: int = 0,
        seed: Optional[int] = None,
        transcript_path: Optional[str] = None,
        env: Optional[BaseEnvironment] = None,
    ) -> EpisodeResult:
        """Run one episode; failures end up in the result, never as exceptions.

        Args:
            config: Run configuration
            backend: Model backend answering every call of the episode
            trial: Trial index within the batch
            seed: Episode seed (``config.seed`` when omitted)
            transcript_path: JSONL file to record to; in memory only when omitted
            env: Prebuilt environment (replay); built from ``config`` otherwise

        Returns:
            EpisodeResult of the episode
        """
        seed = config.seed if seed is None else seed
        env = env or build_environment(config, seed)
        horizon = config.max_steps if config.max_steps is not None else env.max_steps
        writer = TranscriptWriter(transcript_path)
        gateway = LLMGateway(
            backend,
            self.settings.generation,
            self.settings.processing,
            context_limit=self._context_limit(config),
            recorder=writer,
            seed=seed,
        )
        current_step = 0

        def on_event(kind: str, **data: Any) -> None:
            writer.record_event(kind, step=current_step, after_seq=gateway.started, **data)

        policy = build_policy(env, gateway, config, self.settings.loop, on_event)
        memory = DecisionMemory(window_size=memory_window(config, self.settings, env))
        reward_trace: List[float] = []
        counts = {"internal_retries": 0, "external_notes": 0, "fallbacks": 0}
        failure: Optional[FailureReason] = None
        goal_reached = False
        steps = 0

        logger.info(
            f"Episode start: {config.method.value} on {env.name} {env.size_label}, "
            f"seed {seed}, trial {trial}, horizon {horizon}"
        )
        try:
            writer.write_header(config.to_record(), env.scenario_dict(), env.scenario_hash(), seed, trial)
            state, observations = env.reset(seed)
            try:
                while steps < horizon:
                    current_step = state.step_index
                    on_event("step_start")
                    decision = await policy.decide(state, observations, memory)
                    counts["internal_retries"] += decision.internal_retries
                    counts["external_notes"] += decision.external_notes
                    counts["fallbacks"] += len(decision.fallbacks)
                    for note in decision.notes:
                        memory = memory.add_note(note)

                    on_event("execute")
                    outcome = env.step(state, decision.joint)
                    writer.record_transition(
                        step=state.step_index,
                        state_text=state.text,
                        actions=env.format_joint(decision.joint),
                        rewards={agent_key(a): r for a, r in outcome.rewards.items()},
                        next_state_text=outcome.next_state.text,
                    )
                    memory = memory.push(
                        TransitionRecord(state, decision.joint, outcome.rewards, outcome.next_state)
                    )
                    reward_trace.append(float(next(iter(outcome.rewards.values()))))
                    steps += 1
                    state = outcome.next_state
                    observations = env.observe_all(state)
                    if outcome.done:
                        goal_reached = outcome.goal_reached
                        break
            except tuple(cls for cls, _ in FAILURES) as e:
                failure = next(reason for cls, reason in FAILURES if isinstance(e, cls))
                logger.error(f"Episode failed at step {state.step_index} ({failure.value}): {e}")
                on_event("failure", reason=failure.value, detail=str(e))

            if failure is None and env.has_goal and not goal_reached:
                failure = FailureReason.STEP_LIMIT
            if failure is None and not env.has_goal and steps == 0:
                failure = FailureReason.STEP_LIMIT

            final_reward, regret = self._final_reward(env, reward_trace)
            result = EpisodeResult(
                method=config.method.value,
                env=env.name,
                size=env.size_label,
                seed=seed,
                trial=trial,
                success=failure is None,
                failure_reason=failure,
                steps=steps,
                token_usage=dict(gateway.ledger.by_role()),
                reward_trace=reward_trace,
                llm_calls=gateway.call_count,
                final_reward=final_reward,
                regret=regret,
                transcript_path=transcript_path,
                **counts,
            )
            writer.write_result(result.to_record())
        finally:
            writer.close()

        logger.info(
            f"Episode end: success={result.success} steps={result.steps} "
            f"feedback={result.feedback_count} calls={result.llm_calls}"
        )
        return result

    @staticmethod
    def _final_reward(env: BaseEnvironment, reward_trace: List[float]):
        """gs: last round's reward and its regret; grid: objects delivered."""
        if not reward_trace:
            return None, None
        if isinstance(env, GaussianSqueezeEnvironment):
            final = reward_trace[-1]
            optimum = brute_force_optimum(env.config)
            if optimum.r_star <= 0 or not math.isfinite(optimum.r_star):
                return final, None
            return final, (optimum.r_star - final) / optimum.r_star
        return float(sum(reward_trace)), None

    async def replay(
        self,
        transcript: Transcript,
        transcript_path: Optional[str] = None,
        verify: bool = True,
    ) -> EpisodeResult:
        """Re-execute a recorded episode against its own recorded responses.

        Raises:
            ReplayDivergence: a prompt differs from the record, a recorded
                exchange is left over, or (with ``verify``) the result differs
        """
        header = transcript.header
        config = RunConfig.model_validate(header["run_config"])
        env = environment_from_scenario(header["scenario"])
        if env.scenario_hash() != header["scenario_hash"]:
            raise ReplayDivergence("scenario hash of the transcript does not match its scenario")
        backend = ReplayBackend(transcript.exchanges)
        result = await self.run_episode(
            config,
            backend,
            trial=header["trial"],
            seed=header["seed"],
            transcript_path=transcript_path,
            env=env,
        )
        if backend.remaining:
            raise ReplayDivergence(f"{backend.remaining} recorded exchange(s) were never requested")
        if verify:
            recorded = dict(transcript.result)
            recorded.pop("transcript_path", None)
            if result.comparable() != recorded:
                raise ReplayDivergence("replayed result differs from the recorded result")
        logger.info(f"Replayed {len(transcript.exchanges)} exchange(s), result identical")
        return result

    async def run_baseline(self, config: RunConfig, backend: BaseLLMBackend, **kwargs: Any) -> EpisodeResult:
        """Same loop as :meth:`run_episode`, restricted to the baseline methods."""
        if Method(config.method) not in BASELINE_METHODS:
            raise ValueError(f"{config.method.value} is not a baseline method")
        return await self.run_episode(config, backend, **kwargs)


def token_usage_from_exchanges(exchanges: Iterable[ChatExchange]) -> Dict[str, TokenUsage]:
    """Per-role fold over exchanges; equals the gateway ledger of the run."""
    totals: Dict[str, TokenUsage] = {}
    for exchange in exchanges:
        totals[exchange.role_tag] = totals.get(exchange.role_tag, TokenUsage()) + exchange.usage
    return dict(sorted(totals.items()))
