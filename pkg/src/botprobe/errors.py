"""Exception hierarchy shared by all botprobe modules."""
from __future__ import annotations


class BotProbeError(Exception):
    """Base class for every error raised by botprobe."""

    #: short machine-readable code, stable across releases (used by the CLI/API)
    code = "error"


class SchemaError(BotProbeError):
    """A document does not parse as its documented schema.

    ``path`` points at the offending field (e.g. ``dialogs[2].messages[0].text``)
    or carries a line number for raw parse failures.
    """

    code = "schema"

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ValidationError(BotProbeError):
    """A structurally well-formed document violates a semantic invariant."""

    code = "validation"

    def __init__(self, message: str, findings=None):
        super().__init__(message)
        self.findings = list(findings or [])


class UnknownAdaptorError(BotProbeError):
    code = "unknown_adaptor"


class AdaptorError(BotProbeError):
    """Wraps a platform-format failure inside an adaptor."""

    code = "adaptor"


class UnknownNodeError(BotProbeError):
    code = "unknown_node"


class UnknownActError(BotProbeError):
    code = "unknown_act"


class NoMessagesError(BotProbeError):
    """Success-message inference on a dialog with nothing to label."""

    code = "no_messages"


class NeedsReviewError(BotProbeError):
    """Simulation or goal generation attempted while acts await human review."""

    code = "needs_review"

    def __init__(self, pending: dict[str, list[str]]):
        detail = "; ".join(f"{d}: {', '.join(acts)}" for d, acts in sorted(pending.items()))
        super().__init__(f"dialog acts pending review: {detail}")
        self.pending = pending


class MissingOntologyValueError(BotProbeError):
    code = "missing_ontology_value"


class EmptyUtteranceError(BotProbeError):
    code = "empty_utterance"


class ProviderUnavailableError(BotProbeError):
    code = "provider_unavailable"


class ScorerUnavailableError(BotProbeError):
    code = "scorer_unavailable"


class LengthMismatchError(BotProbeError):
    code = "length_mismatch"


class RuleMissingError(BotProbeError):
    """A matched dialog act has no response rule registered."""

    code = "rule_missing"


class TemplateMissingError(BotProbeError):
    code = "template_missing"


class PlaceholderUnfilledError(BotProbeError):
    code = "placeholder_unfilled"


class ConnectorError(BotProbeError):
    """Wraps a transport failure while talking to a bot."""

    code = "connector"


class SessionClosedError(BotProbeError):
    code = "session_closed"


class ProfileInvalidError(BotProbeError):
    code = "profile_invalid"


class EmptySessionError(BotProbeError):
    code = "empty_session"


class UnknownLabelError(BotProbeError):
    code = "unknown_label"


class MissingProvenanceError(BotProbeError):
    code = "missing_provenance"


class UnknownSuggestionError(BotProbeError):
    code = "unknown_suggestion"


class NotFoundError(BotProbeError):
    code = "not_found"


class VersionConflictError(BotProbeError):
    """Concurrent map revision against a stale base version."""

    code = "version_conflict"
