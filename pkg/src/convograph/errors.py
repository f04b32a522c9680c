"""Exception types shared across the engine."""


class ConvographError(Exception):
    """Base class for engine errors."""


class PersistenceError(ConvographError):
    """Snapshot could not be written or read back."""


class CorruptSnapshotError(PersistenceError):
    """A stored snapshot exists but cannot be decoded."""

    def __init__(self, session_id: str, reason: str):
        super().__init__(f"corrupt snapshot for session {session_id!r}: {reason}")
        self.session_id = session_id


class MalformedInputError(ConvographError):
    """Input violates a structural precondition (e.g. empty ASR hypothesis)."""


class IngestError(ConvographError):
    """A fixture file row failed validation."""

    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no


class GraphLoadError(ConvographError):
    """A dialogue graph document violates the format or its invariants."""


class TemplateLoadError(ConvographError):
    """A response template document violates the format."""


class RenderError(ConvographError):
    """A template placeholder could not be resolved from the context."""

    def __init__(self, key: str):
        super().__init__(f"unresolved placeholder {key!r}")
        self.key = key


class CorruptedSessionError(ConvographError):
    """Dialogue cursor points at a state that no longer exists."""
