"""Exception types shared across the package.

Every error the service layer maps to an HTTP status or error code lives
here, so handlers can translate by class without importing half the package.
"""

from __future__ import annotations


class GroupRagError(Exception):
    """Base class for all domain errors."""


# --- not found ---------------------------------------------------------


class NotFoundError(GroupRagError):
    """Base for lookups that missed."""


class CollectionNotFound(NotFoundError):
    pass


class ParentNotFound(NotFoundError):
    pass


class PrincipalNotFound(NotFoundError):
    pass


class DocumentNotFound(NotFoundError):
    pass


class BlobNotFound(NotFoundError):
    pass


class ArxivNotFound(NotFoundError):
    """The arXiv API returned an empty feed for the requested id."""


# --- conflicts ---------------------------------------------------------


class ConflictError(GroupRagError):
    """Base for uniqueness / structural conflicts."""


class DuplicateSiblingName(ConflictError):
    pass


class CycleDetected(ConflictError):
    pass


class DuplicateContentInCollection(ConflictError):
    pass


class DuplicateToolName(ConflictError):
    pass


# --- authorization -----------------------------------------------------


class PermissionDenied(GroupRagError):
    pass


class Unauthorized(GroupRagError):
    pass


# --- validation --------------------------------------------------------


class InvalidArgument(GroupRagError):
    """A precondition on a plain argument was violated (maps to HTTP 400)."""


class InvalidPolicy(InvalidArgument):
    pass


class InvalidArxivId(InvalidArgument):
    pass


class InvalidParameterDeclaration(InvalidArgument):
    pass


class InvalidMessage(InvalidArgument):
    pass


class InvalidConversation(InvalidArgument):
    pass


class DimensionMismatch(InvalidArgument):
    pass


class ZeroVector(InvalidArgument):
    pass


class EmbedderMismatch(InvalidArgument):
    pass


class EmptyScope(InvalidArgument):
    pass


# --- tool argument validation ------------------------------------------


class ToolArgumentError(GroupRagError):
    """Base for tool-call argument rejections."""


class MalformedJson(ToolArgumentError):
    pass


class MissingRequired(ToolArgumentError):
    def __init__(self, field: str):
        super().__init__(f"missing required field: {field}")
        self.field = field


class TypeMismatch(ToolArgumentError):
    def __init__(self, field: str, expected: str, got: str):
        super().__init__(f"field {field}: expected {expected}, got {got}")
        self.field = field
        self.expected = expected
        self.got = got


class UnknownField(ToolArgumentError):
    def __init__(self, field: str):
        super().__init__(f"unknown field: {field}")
        self.field = field


class UnknownTool(GroupRagError):
    pass


# --- providers ---------------------------------------------------------


class ProviderError(GroupRagError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"provider returned status {status}: {body[:200]}")
        self.status = status
        self.body = body


class ProviderTimeout(GroupRagError):
    pass


class EncodingUnsupported(GroupRagError):
    """The provider wire format cannot express this message."""


# --- agent -------------------------------------------------------------


class ConcurrentTurn(GroupRagError):
    pass


# --- ingestion ---------------------------------------------------------


class UnsupportedKind(GroupRagError):
    pass


class ExtractionFailed(GroupRagError):
    pass


class EmbeddingFailed(GroupRagError):
    pass


class NetworkError(GroupRagError):
    pass


class MalformedResponse(GroupRagError):
    pass


# --- blob storage ------------------------------------------------------


class BackendUnavailable(GroupRagError):
    pass


class IntegrityError(GroupRagError):
    """Stored bytes no longer match their content address."""


# --- service -----------------------------------------------------------


class ConfigError(GroupRagError):
    def __init__(self, field: str, message: str | None = None):
        super().__init__(message or f"missing required config field: {field}")
        self.field = field
