"""Dataset ingestion, batch scoring, validation runs, and report tables."""

from .batch import (
    BatchResult,
    ScoreTable,
    config_hash,
    read_score_file,
    run_metrics,
)
from .dataset import FORMATS, PAIRS_SYSTEM_ID, EvalDataset, EvalEntry, load_dataset
from .tables import LEVELS, ReportTable, bias_table, correlation_table
from .validation import (
    VARIANTS,
    SeparationStats,
    ValidationReport,
    baseline_validation,
    derangement,
    shuffle_words,
)

__all__ = [
    "BatchResult",
    "EvalDataset",
    "EvalEntry",
    "FORMATS",
    "LEVELS",
    "PAIRS_SYSTEM_ID",
    "ReportTable",
    "ScoreTable",
    "SeparationStats",
    "VARIANTS",
    "ValidationReport",
    "baseline_validation",
    "bias_table",
    "config_hash",
    "correlation_table",
    "derangement",
    "load_dataset",
    "read_score_file",
    "run_metrics",
    "shuffle_words",
]
