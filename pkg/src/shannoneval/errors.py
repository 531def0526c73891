"""Exception hierarchy.

Every error raised on purpose by this package derives from ShannonEvalError,
so callers can catch one base class at CLI / harness boundaries and still
distinguish the specific failure for exit codes and per-pair error records.
"""


class ShannonEvalError(Exception):
    """Base class for all errors raised by shannoneval."""


class EmptyDocument(ShannonEvalError):
    """Document text is empty or whitespace-only, or has no sentences."""


class EmptySummary(ShannonEvalError):
    """Summary has no words where at least one is required."""


class EmptyContinuation(ShannonEvalError):
    """A scoring request carried an empty (or whitespace-only) continuation."""


class EmptyCorpus(ShannonEvalError):
    """Tried to train the reference backend on an empty corpus."""


class BackendUnavailable(ShannonEvalError):
    """Remote backend unreachable, or kept failing past the retry budget."""


class ProtocolError(ShannonEvalError):
    """Remote backend answered, but the response violates the wire contract."""


class GreedyUnsupported(ShannonEvalError):
    """Backend cannot produce greedy-match flags needed by BLANC-Shannon."""


class DegenerateNormalization(ShannonEvalError):
    """|I(D) - I(D|D)| fell below epsilon; the Shannon Score is undefined.

    Raised instead of returning inf/NaN so a backend that ignores prompts
    cannot silently corrupt correlation studies.
    """


class UndefinedCorrelation(ShannonEvalError):
    """A correlation was requested on a series with an all-tied side."""


class IncompleteGrid(ShannonEvalError):
    """The (system, document) score grid has holes.

    ``missing`` lists the absent (system_id, doc_id[, metric]) cells.
    """

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class SchemaError(ShannonEvalError):
    """A dataset / score file line does not match its declared schema."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class IntegrityError(ShannonEvalError):
    """Dataset is schema-valid but internally inconsistent (dangling ids,
    conflicting duplicate documents, entries unusable for the requested run).
    """


class NeedTwoDocuments(ShannonEvalError):
    """Baseline validation needs >= 2 documents to build wrong-summary pairs."""


class AbortBatch(ShannonEvalError):
    """Too many consecutive backend failures; the batch run stopped early."""


class ConfigMismatch(ShannonEvalError):
    """An existing score file was produced under a different configuration."""
