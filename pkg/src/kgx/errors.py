"""Exception hierarchy. Every error carries a stable machine-readable code."""

from __future__ import annotations


class KgxError(Exception):
    """Base class for all engine errors."""

    code = "INTERNAL"

    @property
    def message(self) -> str:
        return str(self)


# -- graph store --------------------------------------------------------------

class DuplicateIdError(KgxError):
    code = "DUPLICATE_ID"


class UnknownLabelError(KgxError):
    code = "UNKNOWN_LABEL"


class UnknownEdgeTypeError(KgxError):
    code = "UNKNOWN_EDGE_TYPE"


class MissingEndpointError(KgxError):
    code = "MISSING_ENDPOINT"


class LabelConstraintError(KgxError):
    code = "LABEL_CONSTRAINT"


class UnknownNodeError(KgxError):
    code = "UNKNOWN_NODE"


class DepthExceededError(KgxError):
    code = "DEPTH_EXCEEDED"


class StoreFrozenError(KgxError):
    code = "STORE_FROZEN"


class SnapshotFormatError(KgxError):
    code = "SNAPSHOT_FORMAT"


# -- query language ------------------------------------------------------------
# The four published codes of the query surface: SYNTAX, UNBOUND, SCHEMA, BUDGET.

class QuerySyntaxError(KgxError):
    code = "SYNTAX"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnboundVariableError(KgxError):
    code = "UNBOUND"


class QuerySchemaError(KgxError):
    code = "SCHEMA"


class QueryBudgetError(KgxError):
    code = "BUDGET"


# -- retrieval -----------------------------------------------------------------

class UnknownChunkError(KgxError):
    code = "UNKNOWN_CHUNK"


class EmptyIndexError(KgxError):
    code = "EMPTY_INDEX"


class ZeroContentError(KgxError):
    code = "ZERO_CONTENT"


class ProviderError(KgxError):
    code = "PROVIDER"


class RerankerUnavailableError(KgxError):
    code = "RERANKER_UNAVAILABLE"


# -- ingest --------------------------------------------------------------------

class EmptyContentError(KgxError):
    code = "EMPTY_CONTENT"


class CycleDetectedError(KgxError):
    code = "THESAURUS_CYCLE"


class FileUnreadableError(KgxError):
    code = "FILE_UNREADABLE"


class AllRecordsInvalidError(KgxError):
    code = "ALL_RECORDS_INVALID"


class StoreNotEmptyError(KgxError):
    code = "STORE_NOT_EMPTY"


# -- tools & agent ---------------------------------------------------------------

class ArgSchemaError(KgxError):
    code = "ARG_SCHEMA"


class UnknownToolError(KgxError):
    code = "UNKNOWN_TOOL"


class NoRelevantPublicationsError(KgxError):
    code = "NO_RELEVANT_PUBLICATIONS"


class PolicyTimeoutError(KgxError):
    code = "POLICY_TIMEOUT"


class MalformedActionError(KgxError):
    code = "MALFORMED_ACTION"


# -- gateway ---------------------------------------------------------------------

class ConfigError(KgxError):
    code = "CONFIG"

    def __init__(self, key: str, message: str):
        super().__init__(f"invalid config key '{key}': {message}")
        self.key = key
