"""Exception types shared across the service."""


class CoscribeError(Exception):
    """Base class for all service errors."""


class ProtocolViolation(CoscribeError):
    """An edit or message referenced state the server has never seen."""


class DanglingAnchorError(CoscribeError):
    """Anchor endpoint identifier never existed in the document."""


class AnnotationClosedError(CoscribeError):
    """Attempted to stage text on an approved or deleted annotation."""


class UnknownDocumentError(CoscribeError):
    """No document for the given id or join code."""


class UnknownAgentError(CoscribeError):
    pass


class UnknownTaskError(CoscribeError):
    pass


class UnknownThreadError(CoscribeError):
    pass


class HandleTakenError(CoscribeError):
    """Agent handle already in use within the document."""


class ValidationError(CoscribeError):
    """Caller-supplied input violated an operation precondition."""


class ThreadResolvedError(CoscribeError):
    """New messages are not accepted on a resolved thread."""


class AlreadyConsumedError(CoscribeError):
    """Suggestion was already consumed; carries the prior action."""

    def __init__(self, action: str, by: str):
        super().__init__(f"suggestion already consumed ({action} by {by})")
        self.action = action
        self.by = by


class SpanVanishedError(CoscribeError):
    """The anchored span was deleted concurrently; replace is impossible."""


class GatewayError(CoscribeError):
    """Transport-level model failure after retries."""


class SchemaParseError(CoscribeError):
    """Model output failed schema validation after the format-reminder retry."""


class RenderError(CoscribeError):
    """Prompt template rendering failed; lists the missing placeholder names."""

    def __init__(self, template_id: str, missing: list[str]):
        super().__init__(f"template {template_id!r} missing bindings: {', '.join(missing)}")
        self.template_id = template_id
        self.missing = missing


class MockScriptError(CoscribeError):
    """No mock rule matched a request; the mock never fabricates output."""


class SuggestionUnavailableError(CoscribeError):
    """CV suggestion generation failed at the gateway."""


class SnapshotCorruptError(CoscribeError):
    """Persisted blob cannot be decoded; nothing was partially loaded."""


class DocumentNotFoundError(CoscribeError):
    pass
