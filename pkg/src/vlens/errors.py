"""Exception types shared across the package.

Every error carries a stable ``code`` string used on the wire (the HTTP
API returns ``{"error": <code>}``) and by the CLI for exit-code mapping.
"""

from __future__ import annotations


class VlensError(Exception):
    """Base class for all domain errors. ``code`` is the wire name."""

    code = "Error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# --- graph construction / lookup -------------------------------------------

class GraphError(VlensError):
    code = "GraphError"


class DuplicateIdError(GraphError):
    code = "DuplicateId"


class DuplicateRelationshipError(GraphError):
    code = "DuplicateRelationship"


class DanglingEndpointError(GraphError):
    code = "DanglingEndpoint"


class CompositionCycleError(GraphError):
    code = "CompositionCycle"


class UnknownItemError(GraphError):
    code = "UnknownItem"


class NoItemsOfKindError(GraphError):
    code = "NoItemsOfKind"


# --- XML ingestion ----------------------------------------------------------

class MalformedXmlError(VlensError):
    code = "MalformedXml"

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"malformed XML at line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SchemaViolationError(VlensError):
    code = "SchemaViolation"

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class GraphInvalidError(VlensError):
    """Document parsed cleanly but the resulting graph is invalid."""

    code = "GraphInvalid"

    def __init__(self, cause: GraphError):
        super().__init__(f"graph invalid: {cause.message}")
        self.cause = cause


# --- viewpoints and queries --------------------------------------------------

class UnknownAttributeInFilterError(VlensError):
    code = "UnknownAttributeInFilter"


class InvalidQueryError(VlensError):
    code = "InvalidQuery"


class EmptyDomainWarning(UserWarning):
    """Filter selected no items; the viewpoint is still usable."""


# --- transitions -------------------------------------------------------------

class NotInIntersectionError(VlensError):
    """Anchor item cannot seed an entrance query; fall back to translate()."""

    code = "NotInIntersection"


# --- sessions ----------------------------------------------------------------

class UnknownActorError(VlensError):
    code = "UnknownActor"


class UnknownViewpointError(VlensError):
    code = "UnknownViewpoint"


class UnknownSessionError(VlensError):
    code = "UnknownSession"


class AnchorNotInLastResultError(VlensError):
    code = "AnchorNotInLastResult"


class NoQuerySubmittedError(VlensError):
    """A transition needs a previous query to carry over; none exists yet."""

    code = "NoQuerySubmitted"


# --- catalog persistence -----------------------------------------------------

class CatalogIoError(VlensError):
    code = "IoError"
