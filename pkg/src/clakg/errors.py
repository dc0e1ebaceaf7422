"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` so the HTTP layer
can mirror module errors into API error bodies without string matching.
"""


class ClakgError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


# --- graph store -----------------------------------------------------------

class EmptyPayload(ClakgError):
    code = "empty_payload"


class UnknownNode(ClakgError):
    code = "unknown_node"


class SchemaViolation(ClakgError):
    code = "schema_violation"


class DuplicateIdEdge(ClakgError):
    code = "duplicate_id_edge"


class WrongKind(ClakgError):
    code = "wrong_kind"


class FormatError(ClakgError):
    """Malformed input file. ``line`` is 1-based when known."""

    code = "format_error"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# --- ingest ----------------------------------------------------------------

class DuplicateArticleNumber(FormatError):
    code = "duplicate_article_number"


class MissingField(FormatError):
    code = "missing_field"


class BadDate(FormatError):
    code = "bad_date"


# --- embedding training ----------------------------------------------------

class ShapeMismatch(ClakgError):
    code = "shape_mismatch"


class SaturatedGraph(ClakgError):
    code = "saturated_graph"


class EmptyBatch(ClakgError):
    code = "empty_batch"


class SingleClass(ClakgError):
    code = "single_class"


class ConfigInvalid(ClakgError):
    code = "config_invalid"


class NonFiniteLoss(ClakgError):
    code = "non_finite_loss"

    def __init__(self, epoch):
        self.epoch = epoch
        super().__init__(f"loss became non-finite at epoch {epoch}")


class DimensionMismatch(ClakgError):
    code = "dimension_mismatch"


# --- retrieval -------------------------------------------------------------

class ZeroVector(ClakgError):
    code = "zero_vector"


class EmptyKeySet(ClakgError):
    code = "empty_key_set"


class MissingEmbedding(ClakgError):
    code = "missing_embedding"

    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"no embedding for node {node_id}")


# --- LLM gateway -----------------------------------------------------------

class GatewayError(ClakgError):
    code = "gateway_error"


class GatewayTimeout(GatewayError):
    code = "gateway_timeout"


class TransportError(GatewayError):
    code = "gateway_transport"

    def __init__(self, message, attempts=None):
        self.attempts = attempts
        if attempts is not None:
            message = f"{message} (after {attempts} attempts)"
        super().__init__(message)


class AuthMissing(GatewayError):
    code = "auth_missing"


class ScriptExhausted(GatewayError):
    code = "script_exhausted"


class NoArticleFound(ClakgError):
    code = "no_article_found"


class NoCandidates(ClakgError):
    code = "no_candidates"


# --- pipeline --------------------------------------------------------------

class UnknownSession(ClakgError):
    code = "unknown_session"


class UnknownArticle(ClakgError):
    code = "unknown_article"

    def __init__(self, numbers):
        self.numbers = list(numbers)
        super().__init__(f"unknown article number(s): {', '.join(self.numbers)}")


# --- evaluation ------------------------------------------------------------

class TooFewRecords(ClakgError):
    code = "too_few_records"


class EmptyIndex(ClakgError):
    code = "empty_index"
