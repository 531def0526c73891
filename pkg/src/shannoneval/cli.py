"""Command-line surface: score, batch, validate, correlate, bias, viz,
train-ngram.

Every command is a thin wrapper over the library operations, reproducible
from its flag set plus input files.  Machine-readable payloads go to
standard output; diagnostics and log lines go to standard error.  Exit
codes are a scripting contract:

  0  success
  1  unexpected internal error
  2  usage error (bad flags, unknown formats)
  3  input error (unreadable/invalid files, empty documents, bad grids)
  4  degenerate normalization (backend ignores its prompt)
  5  backend unavailable
  6  protocol violation by a remote backend
  7  batch aborted after consecutive backend failures
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import traceback
from pathlib import Path

from .backends import (
    NGramConfig,
    ReferenceBackend,
    RemoteBackend,
    UniformBackend,
    train_ngram,
)
from .errors import (
    AbortBatch,
    BackendUnavailable,
    DegenerateNormalization,
    ProtocolError,
    ShannonEvalError,
)
from .harness import (
    baseline_validation,
    bias_table,
    correlation_table,
    load_dataset,
    read_score_file,
    run_metrics,
)
from .harness.batch import config_hash
from .heatmap import HeatmapSpec, render_heatmap
from .metrics import (
    GIVEN_DOCUMENT,
    GIVEN_SUMMARY,
    METRICS,
    UNCONDITIONAL,
    ScoringConfig,
    evaluate,
)
from .textproc import Document, SummaryText

log = logging.getLogger("shannoneval.cli")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_DEGENERATE = 4
EXIT_BACKEND = 5
EXIT_PROTOCOL = 6
EXIT_ABORT = 7

ENDPOINT_ENV = "SHANNONEVAL_ENDPOINT"

SCENARIO_LABELS = {
    UNCONDITIONAL: "I(D)",
    GIVEN_SUMMARY: "I(D|S)",
    GIVEN_DOCUMENT: "I(D|D)",
}


def _parse_k(value: str) -> int | None:
    if value == "all":
        return None
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--k takes an integer or 'all', got {value!r}")
    if k < 0:
        raise argparse.ArgumentTypeError(f"--k must be >= 0, got {k}")
    return k


def _parse_metrics(value: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in value.split(",") if part.strip())
    unknown = [n for n in names if n not in METRICS]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown metrics {unknown}; choose from {', '.join(METRICS)}"
        )
    return tuple(m for m in METRICS if m in names)


def _backend_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("backend")
    group.add_argument(
        "--backend",
        choices=("ngram", "remote", "uniform"),
        default="ngram",
        help="token scorer: self-trained reference n-gram model, remote "
        "inference server, or the uniform null model (default: ngram)",
    )
    group.add_argument(
        "--endpoint",
        default=None,
        help=f"remote server base URL (or set {ENDPOINT_ENV})",
    )
    group.add_argument(
        "--model",
        default=None,
        help="path to a saved n-gram model; without it the model is "
        "trained on the input documents",
    )
    group.add_argument("--ngram-order", type=int, default=2)
    group.add_argument("--alpha", type=float, default=1.0, help="add-alpha smoothing")
    group.add_argument(
        "--cache-weight", type=float, default=0.5, help="dynamic-cache mix weight"
    )
    group.add_argument(
        "--cache-order", type=int, default=2, choices=(1, 2), help="cache n-gram order"
    )
    group.add_argument("--context-limit", type=int, default=1024)
    group.add_argument("--timeout", type=float, default=60.0)
    group.add_argument("--retries", type=int, default=2)


def _scoring_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("scoring")
    group.add_argument(
        "--k",
        type=_parse_k,
        default=0,
        help="upstream sentences kept in the prompt, or 'all' (default: 0)",
    )
    group.add_argument(
        "--separator", default="\n", help="separator between helper and prompt"
    )
    group.add_argument(
        "--epsilon", type=float, default=1e-9, help="degeneracy threshold in nats"
    )
    group.add_argument(
        "--metrics",
        type=_parse_metrics,
        default=METRICS,
        help="comma-separated subset of shannon,infodiff,blanc",
    )


def _output_flags(parser: argparse.ArgumentParser, default_format: str = "json") -> None:
    parser.add_argument(
        "--format", choices=("json", "text"), default=default_format
    )
    parser.add_argument("--out", default=None, help="output path (default: stdout)")


def _scoring_config(args) -> ScoringConfig:
    return ScoringConfig(
        k_upstream=args.k,
        helper_separator=args.separator,
        degeneracy_epsilon=args.epsilon,
        want_greedy="blanc" in args.metrics,
    )


def _ngram_config(args) -> NGramConfig:
    return NGramConfig(
        order=args.ngram_order,
        smoothing_alpha=args.alpha,
        cache_weight=args.cache_weight,
        cache_order=args.cache_order,
    )


class UsageError(Exception):
    pass


def _build_backend(args, corpus: list[str]):
    """Resolve the backend selection; corpus feeds self-training."""
    if args.backend == "remote":
        endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise UsageError(
                f"--backend remote needs --endpoint or {ENDPOINT_ENV}"
            )
        return RemoteBackend(endpoint, timeout=args.timeout, retries=args.retries)
    if args.backend == "uniform":
        return UniformBackend()
    if args.model:
        return ReferenceBackend.load(args.model)
    if not corpus:
        raise UsageError("--backend ngram needs --model or input documents")
    return train_ngram(corpus, _ngram_config(args), context_limit=args.context_limit)


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")


def _json_payload(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_score(args) -> int:
    doc_path = Path(args.document)
    sum_path = Path(args.summary)
    doc_text = doc_path.read_text(encoding="utf-8")
    sum_text = sum_path.read_text(encoding="utf-8")
    doc = Document.from_text(doc_path.stem, doc_text)
    summary = SummaryText(id=sum_path.stem, system_id="cli", text=sum_text)
    backend = _build_backend(args, corpus=[doc_text])
    config = _scoring_config(args)
    digest = config_hash(config, backend)
    log.info("config_hash: %s", digest)

    result = evaluate(doc, summary, config, backend, metrics=args.metrics)
    values: dict[str, float | None] = {}
    if "shannon" in args.metrics:
        values["shannon"] = result.shannon_score
    if "infodiff" in args.metrics:
        values["infodiff"] = result.info_diff
    if "blanc" in args.metrics:
        values["blanc"] = result.blanc_shannon
    payload = {
        "doc_id": doc.id,
        "summary_id": summary.id,
        "model_id": backend.model_id,
        "config_hash": digest,
        "metrics": values,
    }
    degenerate = "shannon" in args.metrics and result.shannon_score is None
    if degenerate:
        payload["error"] = (
            "DegenerateNormalization: the backend gains nothing from its "
            "prompt; shannon_score is undefined"
        )
    _emit(_json_payload(payload), args.out)
    if degenerate:
        print("error: degenerate normalization (see payload)", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _dataset_corpus(dataset) -> list[str]:
    return [doc.text for doc in dataset.documents.values()]


def cmd_batch(args) -> int:
    dataset = load_dataset(args.dataset, format=args.dataset_format)
    backend = _build_backend(args, corpus=_dataset_corpus(dataset))
    config = _scoring_config(args)
    digest = config_hash(config, backend)
    log.info("config_hash: %s", digest)
    result = run_metrics(
        dataset,
        config,
        backend,
        args.metrics,
        score_path=args.scores,
        concurrency=args.concurrency,
        failure_limit=args.failure_limit,
    )
    n_errors = sum(len(v) for v in result.table.errors.values())
    payload = {
        "score_file": str(result.score_path),
        "config_hash": digest,
        "model_id": backend.model_id,
        "scored_pairs": result.scored_pairs,
        "skipped_pairs": result.skipped_pairs,
        "error_records": n_errors,
    }
    _emit(_json_payload(payload), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    dataset = load_dataset(args.dataset, format=args.dataset_format)
    pairs = []
    for entry in dataset.entries:
        ref = dataset.ref_summaries.get(entry.doc_id, entry.summary_text)
        pairs.append((dataset.documents[entry.doc_id], ref))
    backend = _build_backend(args, corpus=_dataset_corpus(dataset))
    config = _scoring_config(args)
    digest = config_hash(config, backend)
    log.info("config_hash: %s", digest)
    report = baseline_validation(
        pairs, config, backend, seed=args.seed, metrics=args.metrics
    )
    payload = report.to_payload()
    payload["config_hash"] = digest
    payload["model_id"] = backend.model_id
    if args.format == "json":
        _emit(_json_payload(payload), args.out)
    else:
        _emit(_render_validation(payload), args.out)
    return EXIT_OK


def _render_validation(payload: dict) -> str:
    out = [f"baseline validation (seed {payload['seed']})"]
    out.append(f"# model: {payload['model_id']}")
    out.append(f"# config_hash: {payload['config_hash']}")
    for metric in payload["metrics"]:
        stats = payload["separation"][metric]
        out.append("")
        out.append(f"{metric}: n={stats['n_docs']}")
        out.append(
            f"  mean original={stats['mean_original']:.4f} "
            f"shuffled={stats['mean_shuffled']:.4f} wrong={stats['mean_wrong']:.4f}"
        )
        out.append(
            f"  min margin vs wrong={stats['min_margin_wrong']:.4f} "
            f"vs shuffled={stats['min_margin_shuffled']:.4f}"
        )
        out.append(
            f"  violations: wrong>=original {stats['violations_wrong']}, "
            f"shuffled>=original {stats['violations_shuffled']}"
        )
    return "\n".join(out) + "\n"


def _table_command(args, build) -> int:
    dataset = load_dataset(args.dataset, format=args.dataset_format)
    table = read_score_file(args.scores)
    report = build(dataset, table)
    if args.format == "json":
        _emit(_json_payload(report.to_payload()), args.out)
    else:
        _emit(report.render_text(), args.out)
    return EXIT_OK


def cmd_correlate(args) -> int:
    return _table_command(
        args,
        lambda dataset, table: correlation_table(
            dataset, table, level=args.level, method=args.method
        ),
    )


def cmd_bias(args) -> int:
    return _table_command(
        args,
        lambda dataset, table: bias_table(dataset, table, method=args.method),
    )


def cmd_viz(args) -> int:
    doc_path = Path(args.document)
    sum_path = Path(args.summary)
    doc_text = doc_path.read_text(encoding="utf-8")
    sum_text = sum_path.read_text(encoding="utf-8")
    doc = Document.from_text(doc_path.stem, doc_text)
    summary = SummaryText(id=sum_path.stem, system_id="cli", text=sum_text)
    backend = _build_backend(args, corpus=[doc_text])
    config = _scoring_config(args)
    result = evaluate(doc, summary, config, backend, metrics=args.metrics)
    scenarios = []
    for scenario in (UNCONDITIONAL, GIVEN_SUMMARY, GIVEN_DOCUMENT):
        if scenario in result.profiles:
            scenarios.append((SCENARIO_LABELS[scenario], result.profiles[scenario]))
    metric_values: dict[str, float | None] = {"info_diff": result.info_diff}
    if "shannon" in args.metrics:
        metric_values["shannon_score"] = result.shannon_score
    if "blanc" in args.metrics:
        metric_values["blanc_shannon"] = result.blanc_shannon
    spec = HeatmapSpec(
        doc_id=doc.id,
        scenarios=tuple(scenarios),
        anchor=args.anchor,
        metrics=metric_values,
    )
    _emit(render_heatmap(spec), args.out)
    return EXIT_OK


def cmd_train_ngram(args) -> int:
    corpus: list[str] = []
    if args.dataset:
        dataset = load_dataset(args.dataset, format=args.dataset_format)
        corpus.extend(_dataset_corpus(dataset))
    for path in args.texts:
        corpus.append(Path(path).read_text(encoding="utf-8"))
    backend = train_ngram(corpus, _ngram_config(args), context_limit=args.context_limit)
    backend.save(args.out)
    payload = {
        "model_id": backend.model_id,
        "vocab_size": len(backend.vocab),
        "documents": len(corpus),
        "out": args.out,
    }
    sys.stdout.write(_json_payload(payload))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shannoneval",
        description="Reference-free summary evaluation from token surprisal.",
    )
    parser.add_argument("--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="evaluate one document/summary pair")
    p.add_argument("document", help="document text file")
    p.add_argument("summary", help="summary text file")
    _backend_flags(p)
    _scoring_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("batch", help="score a dataset into a resumable file")
    p.add_argument("--dataset", required=True)
    p.add_argument(
        "--dataset-format",
        choices=("summeval-jsonl", "pairs-jsonl"),
        default="summeval-jsonl",
    )
    p.add_argument("--scores", required=True, help="score journal path (JSONL)")
    p.add_argument("--concurrency", type=int, default=1)
    p.add_argument(
        "--failure-limit",
        type=int,
        default=5,
        help="abort after this many consecutive backend failures",
    )
    _backend_flags(p)
    _scoring_flags(p)
    p.add_argument("--out", default=None, help="summary payload path")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("validate", help="original vs shuffled vs wrong summaries")
    p.add_argument("--dataset", required=True)
    p.add_argument(
        "--dataset-format",
        choices=("summeval-jsonl", "pairs-jsonl"),
        default="pairs-jsonl",
    )
    p.add_argument("--seed", type=int, default=0)
    _backend_flags(p)
    _scoring_flags(p)
    _output_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("correlate", help="correlate metrics with human ratings")
    p.add_argument("--dataset", required=True)
    p.add_argument(
        "--dataset-format",
        choices=("summeval-jsonl", "pairs-jsonl"),
        default="summeval-jsonl",
    )
    p.add_argument("--scores", required=True)
    p.add_argument("--level", choices=("system", "summary"), default="system")
    p.add_argument(
        "--method",
        choices=("kendall-tau-b", "spearman", "pearson"),
        default="kendall-tau-b",
    )
    _output_flags(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("bias", help="correlate metrics with summary statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument(
        "--dataset-format",
        choices=("summeval-jsonl", "pairs-jsonl"),
        default="summeval-jsonl",
    )
    p.add_argument("--scores", required=True)
    p.add_argument(
        "--method",
        choices=("kendall-tau-b", "spearman", "pearson"),
        default="kendall-tau-b",
    )
    _output_flags(p)
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("viz", help="render a token-information heatmap")
    p.add_argument("document")
    p.add_argument("summary")
    p.add_argument("--anchor", type=float, default=None, help="saturation anchor, nats")
    _backend_flags(p)
    _scoring_flags(p)
    p.add_argument("--out", default=None, help="HTML output path")
    p.set_defaults(func=cmd_viz)

    p = sub.add_parser("train-ngram", help="train and save a reference model")
    p.add_argument("texts", nargs="*", help="document text files")
    p.add_argument("--dataset", default=None, help="also pull documents from a dataset")
    p.add_argument(
        "--dataset-format",
        choices=("summeval-jsonl", "pairs-jsonl"),
        default="pairs-jsonl",
    )
    p.add_argument("--ngram-order", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--cache-weight", type=float, default=0.5)
    p.add_argument("--cache-order", type=int, default=2, choices=(1, 2))
    p.add_argument("--context-limit", type=int, default=1024)
    p.add_argument("--out", required=True, help="model file path")
    p.set_defaults(func=cmd_train_ngram)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateNormalization as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except BackendUnavailable as exc:
        print(f"error: backend unavailable: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except ProtocolError as exc:
        print(f"error: protocol violation: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except AbortBatch as exc:
        print(f"error: batch aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except ShannonEvalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
