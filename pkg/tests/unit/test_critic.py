"""Unit tests for the central critic."""

import pytest

from llm_coordinator.agents import (
    AssessorIssue,
    CentralCritic,
    CriticPreference,
    GrammarIssue,
    InternalFeedbackState,
    Proposal,
    ScrutinyVerdict,
)
from llm_coordinator.core.types import JointAction
from llm_coordinator.environments import CornerPos, MoveToCorner, NoOp
from llm_coordinator.errors import GrammarLimitExceeded, InternalFeedbackExhausted
from llm_coordinator.memory import DecisionMemory

GARBAGE = "I would rather not say."
PASS_WITHOUT_SUGGESTIONS = '{"verdict": {"pass": true, "issues": []}, "feedback": "fine"}'
ASSESSOR_REJECTS = '{"verdict": {"pass": false, "issues": ["sum too low"]}, "feedback": "raise the sum"}'


@pytest.fixture
def memory():
    return DecisionMemory(window_size=5)


def make_critic(env, gateway, reask_limit=3):
    return CentralCritic(env, gateway, grammar_reask_limit=reask_limit)


class TestCriticRecords:
    """Test invariants of the critic's records."""

    def test_proposal_needs_joint_or_error(self):
        with pytest.raises(ValueError):
            Proposal(CriticPreference.EXPLORE, None)

    def test_verdict_passes_without_issues_only(self):
        with pytest.raises(ValueError):
            ScrutinyVerdict(passed=True, issues=(AssessorIssue("bad"),))
        with pytest.raises(ValueError):
            ScrutinyVerdict(passed=False)

    def test_internal_state_limit(self):
        state = InternalFeedbackState(limit=1)
        state.advance()
        with pytest.raises(ValueError):
            state.advance()
        with pytest.raises(ValueError):
            InternalFeedbackState(limit=0)

    def test_role_tags(self):
        assert CriticPreference.EXPLORE.role_tag == "critic_explore"
        assert CriticPreference.EXPLOIT.role_tag == "critic_exploit"
        assert CriticPreference.EXPLORE.clause != CriticPreference.EXPLOIT.clause


class TestProposals:
    """Test the proposer calls."""

    @pytest.mark.asyncio
    async def test_prompt_carries_preference_clause(self, gs_env, make_gateway, memory):
        critic = make_critic(gs_env, make_gateway())
        state, _ = gs_env.reset(0)

        messages, context = critic.proposal_request(CriticPreference.EXPLOIT, state, memory)

        assert CriticPreference.EXPLOIT.clause in messages[0][1]
        assert context["preference"] == "exploit"
        assert "Feedback on your previous proposal:\n(none)" in messages[1][1]

    @pytest.mark.asyncio
    async def test_valid_proposal(self, gs_env, make_gateway, memory):
        critic = make_critic(gs_env, make_gateway())
        state, _ = gs_env.reset(0)

        proposal = await critic.propose(CriticPreference.EXPLORE, state, memory)

        assert proposal.valid
        assert proposal.joint.terms() == {0: 1, 1: 1, 2: 1}
        assert proposal.exchange.role_tag == "critic_explore"

    @pytest.mark.asyncio
    async def test_grammar_error_kept_in_proposal(self, gs_env, make_gateway, memory):
        critic = make_critic(gs_env, make_gateway({"critic_explore": [GARBAGE]}))
        state, _ = gs_env.reset(0)

        proposal = await critic.propose(CriticPreference.EXPLORE, state, memory)

        assert not proposal.valid
        assert proposal.grammar_error.reason == "no structured action_map block found"

    @pytest.mark.asyncio
    async def test_out_of_range_action_is_grammar_error(self, gs_env, make_gateway, memory):
        reply = '{"actions": {"agent_0": 12, "agent_1": 0, "agent_2": 0}}'
        critic = make_critic(gs_env, make_gateway({"critic_exploit": [reply]}))
        state, _ = gs_env.reset(0)

        proposal = await critic.propose(CriticPreference.EXPLOIT, state, memory)

        assert proposal.grammar_error is not None
        assert "out of range" in proposal.grammar_error.reason


class TestScrutiny:
    """Test veracity scrutiny."""

    @pytest.mark.asyncio
    async def test_grammar_issue_fails_verdict(self, gs_env, make_gateway, memory):
        critic = make_critic(gs_env, make_gateway({"critic_explore": [GARBAGE]}))
        state, _ = gs_env.reset(0)
        proposals = [
            await critic.propose(CriticPreference.EXPLORE, state, memory),
            await critic.propose(CriticPreference.EXPLOIT, state, memory),
        ]

        verdict = await critic.veracity_scrutiny(state, memory, proposals)

        assert not verdict.passed
        assert [type(i) for i in verdict.issues] == [GrammarIssue]
        assert verdict.suggestions is None

    @pytest.mark.asyncio
    async def test_assessor_can_reject(self, gs_env, make_gateway, memory):
        critic = make_critic(gs_env, make_gateway({"assessor": [ASSESSOR_REJECTS]}))
        state, _ = gs_env.reset(0)
        proposals = [
            await critic.propose(CriticPreference.EXPLORE, state, memory),
            await critic.propose(CriticPreference.EXPLOIT, state, memory),
        ]

        verdict = await critic.veracity_scrutiny(state, memory, proposals)

        assert not verdict.passed
        assert [i.describe() for i in verdict.issues] == ["[assessor] sum too low"]
        assert verdict.feedback == "raise the sum"

    @pytest.mark.asyncio
    async def test_unreadable_verdict_leaves_checks_in_charge(self, gs_env, make_gateway, memory):
        """An unparseable assessor reply neither passes nor fails anything by itself."""
        critic = make_critic(gs_env, make_gateway({"assessor": [GARBAGE]}))
        state, _ = gs_env.reset(0)
        proposals = [
            await critic.propose(CriticPreference.EXPLORE, state, memory),
            await critic.propose(CriticPreference.EXPLOIT, state, memory),
        ]

        verdict = await critic.veracity_scrutiny(state, memory, proposals)

        assert verdict.passed
        assert verdict.suggestions is None

    @pytest.mark.asyncio
    async def test_needs_two_proposals(self, gs_env, make_gateway, memory):
        critic = make_critic(gs_env, make_gateway())
        state, _ = gs_env.reset(0)
        with pytest.raises(ValueError):
            await critic.veracity_scrutiny(state, memory, [])

    def test_conflicting_proposal_detected(self, hard_env, make_gateway):
        critic = make_critic(hard_env, make_gateway())
        state, _ = hard_env.reset(0)
        joint = JointAction.from_terms(
            {
                0: MoveToCorner("object_red_0", CornerPos(0, 1)),
                1: MoveToCorner("object_red_0", CornerPos(0, 2)),
                2: NoOp(),
                3: NoOp(),
            }
        )

        issues = critic.deterministic_checks(state, [Proposal(CriticPreference.EXPLORE, joint)])

        assert len(issues) == 1
        assert issues[0].describe().startswith("[conflict] explore proposal: SameObjectMultiMove")


class TestInternalFeedbackLoop:
    """Test the propose, scrutinise and correct loop."""

    @pytest.mark.asyncio
    async def test_clean_iteration_costs_three_calls(self, gs_env, make_gateway, memory):
        gateway = make_gateway()
        critic = make_critic(gs_env, gateway)
        state, _ = gs_env.reset(0)

        outcome = await critic.internal_feedback_loop(state, memory, limit=3)

        assert outcome.approved
        assert outcome.retries == 0
        assert gateway.call_count == 3
        assert {a: s.action.action for a, s in outcome.suggestions.items()} == {0: 1, 1: 1, 2: 1}
        assert len(outcome.state.dialogue) == 3

    @pytest.mark.asyncio
    async def test_grammar_failure_triggers_retry(self, gs_env, make_gateway, memory):
        """One unparseable proposal costs one more full iteration."""
        gateway = make_gateway({"critic_explore": [GARBAGE]})
        critic = make_critic(gs_env, gateway)
        state, _ = gs_env.reset(0)

        outcome = await critic.internal_feedback_loop(state, memory, limit=3)

        assert outcome.approved
        assert outcome.retries == 1
        assert gateway.call_count == 6
        assert outcome.state.feedback.startswith("Scrutiny failed at iteration 1:")

    @pytest.mark.asyncio
    async def test_exhaustion_uses_last_valid_proposal(self, gs_env, make_gateway, memory):
        gateway = make_gateway({"critic_explore": [GARBAGE]})
        critic = make_critic(gs_env, gateway)
        state, _ = gs_env.reset(0)

        outcome = await critic.internal_feedback_loop(state, memory, limit=1)

        assert not outcome.approved
        assert outcome.retries == 1
        assert {a: s.action.action for a, s in outcome.suggestions.items()} == {0: 1, 1: 1, 2: 1}

    @pytest.mark.asyncio
    async def test_exhaustion_without_valid_proposal(self, gs_env, make_gateway, memory):
        gateway = make_gateway({"critic_explore": [GARBAGE], "critic_exploit": [GARBAGE]})
        critic = make_critic(gs_env, gateway)
        state, _ = gs_env.reset(0)

        with pytest.raises(InternalFeedbackExhausted) as exc_info:
            await critic.internal_feedback_loop(state, memory, limit=1)
        assert exc_info.value.iterations == 1

    @pytest.mark.asyncio
    async def test_missing_suggestions_trigger_correction_call(self, gs_env, make_gateway, memory):
        gateway = make_gateway({"assessor": [PASS_WITHOUT_SUGGESTIONS]})
        critic = make_critic(gs_env, gateway)
        state, _ = gs_env.reset(0)

        outcome = await critic.internal_feedback_loop(state, memory, limit=3)

        assert outcome.approved
        assert gateway.call_count == 4
        assert [e.role_tag for e in gateway.exchanges].count("assessor") == 2

    @pytest.mark.asyncio
    async def test_correction_gives_up_after_reask_limit(self, gs_env, make_gateway, memory):
        gateway = make_gateway({"assessor": [PASS_WITHOUT_SUGGESTIONS, GARBAGE, GARBAGE]})
        critic = make_critic(gs_env, gateway, reask_limit=2)
        state, _ = gs_env.reset(0)

        with pytest.raises(GrammarLimitExceeded) as exc_info:
            await critic.internal_feedback_loop(state, memory, limit=3)
        assert exc_info.value.role_tag == "assessor"
        assert exc_info.value.attempts == 2

    @pytest.mark.asyncio
    async def test_events_emitted(self, gs_env, make_gateway, memory):
        events = []
        critic = CentralCritic(gs_env, make_gateway(), on_event=lambda kind, **data: events.append(kind))
        state, _ = gs_env.reset(0)

        await critic.internal_feedback_loop(state, memory, limit=2)

        assert events == ["internal_iteration", "scrutiny"]
