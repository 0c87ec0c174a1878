"""Exception hierarchy for LLM Coordinator."""

from typing import Any, List, Optional, Tuple


class CoordinatorError(Exception):
    """Base class for all coordinator errors."""


class ScenarioError(CoordinatorError):
    """Scenario file or environment configuration is invalid."""


class IllegalAction(CoordinatorError):
    """An action is well-formed but not legal in the current state."""

    def __init__(self, agent: int, reason: str):
        super().__init__(f"agent_{agent}: {reason}")
        self.agent = agent
        self.reason = reason


class UnknownAgent(CoordinatorError):
    """Agent id is not part of the episode."""

    def __init__(self, agent: Any):
        super().__init__(f"Unknown agent: {agent}")
        self.agent = agent


class UnknownObject(CoordinatorError):
    """Object id is not present (or already delivered)."""

    def __init__(self, object_id: str):
        super().__init__(f"Unknown object: {object_id}")
        self.object_id = object_id


class NonPositiveSigma(CoordinatorError, ValueError):
    """Gaussian squeeze called with sigma <= 0."""


class ConflictingJointAction(CoordinatorError):
    """A joint action with conflicts reached environment execution."""

    def __init__(self, conflicts: List[Any]):
        details = "; ".join(getattr(c, "detail", str(c)) for c in conflicts)
        super().__init__(f"Joint action has conflicts: {details}")
        self.conflicts = conflicts


class OutOfOrderTransition(CoordinatorError):
    """Transition pushed into memory does not follow the last one."""


class WrongEnvironment(CoordinatorError):
    """Rendering requested for transitions of another environment."""


class GrammarError(CoordinatorError):
    """Model output does not conform to the structured grammar."""

    def __init__(self, reason: str, span: Optional[Tuple[int, int]] = None):
        super().__init__(reason)
        self.reason = reason
        self.span = span

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrammarError):
            return NotImplemented
        return self.reason == other.reason and self.span == other.span

    def __hash__(self) -> int:
        return hash((self.reason, self.span))

    def __repr__(self) -> str:
        return f"<GrammarError(reason='{self.reason}', span={self.span})>"


class UnboundPlaceholder(CoordinatorError):
    """Prompt template instantiated without all placeholders bound."""

    def __init__(self, template: str, names: List[str]):
        super().__init__(f"Template '{template}' has unbound placeholders: {', '.join(names)}")
        self.template = template
        self.names = names


class ContextLengthExceeded(CoordinatorError):
    """Prompt is larger than the configured context limit."""

    def __init__(self, role_tag: str, prompt_tokens: int, limit: int):
        super().__init__(
            f"Prompt for {role_tag} has ~{prompt_tokens} tokens, limit is {limit}"
        )
        self.role_tag = role_tag
        self.prompt_tokens = prompt_tokens
        self.limit = limit


class TransportError(CoordinatorError):
    """Backend could not be reached or returned a transport-level failure."""


class GrammarLimitExceeded(CoordinatorError):
    """Grammar re-ask budget exhausted for a structured call."""

    def __init__(self, role_tag: str, attempts: int, last_error: GrammarError):
        super().__init__(
            f"{role_tag}: output grammar still invalid after {attempts} attempts "
            f"({last_error.reason})"
        )
        self.role_tag = role_tag
        self.attempts = attempts
        self.last_error = last_error


class InternalFeedbackExhausted(CoordinatorError):
    """Internal feedback loop ran out of iterations without a usable proposal."""

    def __init__(self, iterations: int):
        super().__init__(f"Internal feedback exhausted after {iterations} iterations")
        self.iterations = iterations


class VersionMismatch(CoordinatorError):
    """Transcript was written with an incompatible grammar or schema version."""


class TranscriptTruncated(CoordinatorError):
    """Transcript ends before its closing result record."""


class ReplayDivergence(CoordinatorError):
    """Replayed episode requested an exchange the transcript does not contain."""


class EmptyInput(CoordinatorError):
    """Report requested without any input rows."""
