"""Reference-free summary evaluation from language-model surprisal.

The toolkit scores how much a summary helps a token-scoring backend
predict its source document: Shannon score, information difference, and
the greedy-accuracy boost, plus the evaluation apparatus around them
(correlation statistics, dataset harness, bias analysis, token-level
heatmaps).
"""

from . import errors
from .backends import (
    Backend,
    NGramConfig,
    ReferenceBackend,
    RemoteBackend,
    ScoreRequest,
    TokenScores,
    UniformBackend,
    remote_backend,
    train_ngram,
)
from .correlation import (
    METHODS,
    correlate,
    kendall_tau_b,
    pearson_r,
    spearman_rho,
    system_means,
)
from .harness import (
    EvalDataset,
    EvalEntry,
    ScoreTable,
    ValidationReport,
    baseline_validation,
    bias_table,
    config_hash,
    correlation_table,
    load_dataset,
    read_score_file,
    run_metrics,
)
from .heatmap import HeatmapSpec, percentile_anchor, render_heatmap
from .metrics import (
    GIVEN_DOCUMENT,
    GIVEN_SUMMARY,
    METRICS,
    UNCONDITIONAL,
    InfoProfile,
    MetricResult,
    ScoringConfig,
    blanc_shannon,
    document_info,
    evaluate,
    information_difference,
    shannon_score,
)
from .textproc import (
    Document,
    Fragment,
    Sentence,
    SummaryStats,
    SummaryText,
    extractive_fragments,
    split_sentences,
    summary_stats,
    word_tokens,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "Document",
    "EvalDataset",
    "EvalEntry",
    "Fragment",
    "GIVEN_DOCUMENT",
    "GIVEN_SUMMARY",
    "HeatmapSpec",
    "InfoProfile",
    "METHODS",
    "METRICS",
    "MetricResult",
    "NGramConfig",
    "ReferenceBackend",
    "RemoteBackend",
    "ScoreRequest",
    "ScoreTable",
    "ScoringConfig",
    "Sentence",
    "SummaryStats",
    "SummaryText",
    "TokenScores",
    "UNCONDITIONAL",
    "UniformBackend",
    "ValidationReport",
    "baseline_validation",
    "bias_table",
    "blanc_shannon",
    "config_hash",
    "correlate",
    "correlation_table",
    "document_info",
    "errors",
    "evaluate",
    "extractive_fragments",
    "information_difference",
    "kendall_tau_b",
    "load_dataset",
    "pearson_r",
    "percentile_anchor",
    "read_score_file",
    "remote_backend",
    "render_heatmap",
    "run_metrics",
    "shannon_score",
    "spearman_rho",
    "split_sentences",
    "summary_stats",
    "system_means",
    "train_ngram",
    "word_tokens",
    "__version__",
]
