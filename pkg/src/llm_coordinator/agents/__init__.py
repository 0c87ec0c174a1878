"""Critic and actor roles."""

from .actor import (
    ActorTeam,
    AvailabilityCheck,
    ConfirmationResult,
    Decision,
    DistanceCheck,
    ExternalFeedbackOutcome,
    degrade_conflicts,
    generate_feedback,
    plan_confirmation,
)
from .critic import (
    ASSESSOR_ROLE,
    AssessorIssue,
    CentralCritic,
    ConflictIssue,
    CriticPreference,
    GrammarIssue,
    InternalFeedbackOutcome,
    InternalFeedbackState,
    Proposal,
    ScrutinyVerdict,
)
from .messages import FeedbackNote, Suggestion, SuggestionMap, joint_from_suggestions, suggestions_from_joint
from .prompting import ask_structured, output_format, parse_agent_terms

__all__ = [
    "ASSESSOR_ROLE",
    "ActorTeam",
    "AssessorIssue",
    "AvailabilityCheck",
    "CentralCritic",
    "ConfirmationResult",
    "ConflictIssue",
    "CriticPreference",
    "Decision",
    "DistanceCheck",
    "ExternalFeedbackOutcome",
    "FeedbackNote",
    "GrammarIssue",
    "InternalFeedbackOutcome",
    "InternalFeedbackState",
    "Proposal",
    "ScrutinyVerdict",
    "Suggestion",
    "SuggestionMap",
    "ask_structured",
    "degrade_conflicts",
    "generate_feedback",
    "joint_from_suggestions",
    "output_format",
    "parse_agent_terms",
    "plan_confirmation",
    "suggestions_from_joint",
]
