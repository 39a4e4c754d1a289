"""Exception hierarchy shared across the resqa package."""


class ResqaError(Exception):
    """Base class for all resqa errors."""


# --- corpus ingestion ---


class SchemaError(ResqaError):
    """A corpus record or payload does not conform to its schema."""


class DateRangeError(ResqaError):
    """A document date falls outside the configured corpus window."""


class DuplicateIdError(ResqaError):
    """Two records in one corpus share a doc_id."""


class UnparsablePdfError(ResqaError):
    """Uploaded bytes are not a readable PDF (corrupt or encrypted)."""


class EmptyDocumentError(ResqaError):
    """A document contains no extractable text / no sentences."""


class UploadTimeoutError(ResqaError):
    """PDF parsing exceeded the configured real-time budget."""


# --- embedding gateway ---


class ProviderUnavailable(ResqaError):
    """Provider transport failed after bounded retries."""


class ProviderTimeout(ResqaError):
    """Provider did not answer within the configured deadline."""


class DimensionMismatch(ResqaError):
    """Vector dimensions disagree (between vectors or with the provider handshake)."""


class PartialBatchError(ResqaError):
    """Some batch items failed to embed.

    ``failed_indices`` records which input positions have no vector.
    """

    def __init__(self, message: str, failed_indices: list[int]):
        super().__init__(message)
        self.failed_indices = failed_indices


# --- vector index ---


class ZeroVectorError(ResqaError):
    """Cosine similarity is undefined for an all-zero vector."""


class EmptyIndexError(ResqaError):
    """Query issued against an index with no documents."""


class CorruptIndexError(ResqaError):
    """Index file has a bad magic, bad checksum, or truncated payload."""


class VersionError(ResqaError):
    """Index file was written by a newer format version."""


# --- answer generation ---


class BudgetTooSmall(ResqaError):
    """Prompt budget cannot fit the query plus a single context block."""


class ContextOverflow(ResqaError):
    """Generation provider reported the prompt exceeded its context."""


# --- evaluation harness ---


class ValidationError(ResqaError):
    """A rating sheet fails validation; ``key`` names the offending field."""

    def __init__(self, key: str, message: str | None = None):
        super().__init__(message or f"invalid rating field: {key}")
        self.key = key


class CountError(ResqaError):
    """Test set does not contain the expected number of questions."""


# --- analytics ---


class EmptyInputError(ResqaError):
    """Operation requires at least one input element."""
