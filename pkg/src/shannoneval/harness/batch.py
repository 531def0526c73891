"""Resumable batch metric computation over an evaluation dataset.

Scores are persisted to an append-only JSONL journal, one record per
(doc_id, system_id, metric).  Interrupted runs pick up where they stopped;
records carry a hash of the effective scoring configuration so a journal
can never silently mix incompatible runs.  Pairs are scored concurrently
but written by the submitting thread in submission order, which makes the
journal bitwise-stable across concurrency levels for a deterministic
backend.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..backends.base import Backend
from ..errors import (
    AbortBatch,
    BackendUnavailable,
    ConfigMismatch,
    ProtocolError,
    SchemaError,
    ShannonEvalError,
)
from ..metrics import METRICS, ScoringConfig, evaluate
from ..textproc import SummaryText
from .dataset import EvalDataset, EvalEntry

log = logging.getLogger("shannoneval.batch")

# Error classes worth retrying on resume: the backend, not the pair, failed.
TRANSIENT_ERRORS = ("BackendUnavailable", "ProtocolError")

_RECORD_FIELDS = ("doc_id", "system_id", "metric", "config_hash")


def config_hash(config: ScoringConfig, backend: Backend | str) -> str:
    """Short stable digest of everything that determines surprisal values."""
    model_id = backend if isinstance(backend, str) else backend.model_id
    payload = {
        "format": 1,
        "k_upstream": config.k_upstream,
        "helper_separator": config.helper_separator,
        "degeneracy_epsilon": config.degeneracy_epsilon,
        "model_id": model_id,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class ScoreTable:
    """Parsed journal: last record per key wins."""

    values: dict[tuple[str, str], dict[str, float]] = field(hash=False)
    errors: dict[tuple[str, str], dict[str, str]] = field(hash=False)
    config_hash: str | None = None

    def metric_values(self, metric: str) -> dict[tuple[str, str], float]:
        return {
            key: metrics[metric]
            for key, metrics in self.values.items()
            if metric in metrics
        }

    @property
    def metrics(self) -> tuple[str, ...]:
        seen = {m for metrics in self.values.values() for m in metrics}
        seen.update(m for metrics in self.errors.values() for m in metrics)
        return tuple(m for m in METRICS if m in seen) + tuple(
            sorted(seen - set(METRICS))
        )


def _parse_record(line: str, line_number: int) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON ({exc.msg})", line_number=line_number)
    if not isinstance(record, dict):
        raise SchemaError("score record must be a JSON object", line_number=line_number)
    for name in _RECORD_FIELDS:
        if not isinstance(record.get(name), str):
            raise SchemaError(
                f"score record missing string field {name!r}", line_number=line_number
            )
    has_value = isinstance(record.get("value"), (int, float)) and not isinstance(
        record.get("value"), bool
    )
    has_error = isinstance(record.get("error"), str)
    if has_value == has_error:
        raise SchemaError(
            "score record needs exactly one of 'value' and 'error'",
            line_number=line_number,
        )
    return record


def _recover_journal(path: Path) -> list[dict]:
    """Parse the journal, dropping a torn trailing line left by a crash.

    Only an unparseable final line counts as torn: truncating a JSON object
    always breaks its syntax, so a line that parses but fails validation is
    corruption, not a crash artifact, and raises.
    """
    raw = path.read_bytes().decode("utf-8")
    records = []
    offset = 0
    lines = raw.split("\n")
    for i, line in enumerate(lines, start=1):
        if line == "" and i == len(lines):
            break
        is_tail = i >= len(lines) - 1 and all(rest == "" for rest in lines[i:])
        try:
            json.loads(line)
        except json.JSONDecodeError:
            if is_tail:
                log.warning("dropping torn trailing record at %s:%d", path, i)
                with open(path, "r+", encoding="utf-8") as fh:
                    fh.truncate(offset)
                break
        records.append(_parse_record(line, i))
        offset += len(line.encode("utf-8")) + 1
    return records


def read_score_file(path: str | Path, expect_hash: str | None = None) -> ScoreTable:
    """Load a score journal into a last-record-wins table."""
    path = Path(path)
    records = _recover_journal(path)
    seen_hash = None
    values: dict[tuple[str, str], dict[str, float]] = {}
    errors: dict[tuple[str, str], dict[str, str]] = {}
    for record in records:
        seen_hash = record["config_hash"]
        if expect_hash is not None and seen_hash != expect_hash:
            raise ConfigMismatch(
                f"score file {path} was produced under config {seen_hash}, "
                f"current config is {expect_hash}"
            )
        key = (record["doc_id"], record["system_id"])
        metric = record["metric"]
        if "value" in record:
            values.setdefault(key, {})[metric] = float(record["value"])
            errors.get(key, {}).pop(metric, None)
        else:
            errors.setdefault(key, {})[metric] = record["error"]
            values.get(key, {}).pop(metric, None)
    values = {k: v for k, v in values.items() if v}
    errors = {k: v for k, v in errors.items() if v}
    return ScoreTable(values=values, errors=errors, config_hash=seen_hash)


@dataclass(frozen=True)
class BatchResult:
    table: ScoreTable
    scored_pairs: int
    skipped_pairs: int
    score_path: Path


def _pair_records(
    entry: EvalEntry,
    dataset: EvalDataset,
    config: ScoringConfig,
    backend: Backend,
    metrics: tuple[str, ...],
    digest: str,
) -> list[dict]:
    doc = dataset.documents[entry.doc_id]
    summary = SummaryText(
        id=f"{entry.doc_id}/{entry.system_id}",
        system_id=entry.system_id,
        text=entry.summary_text,
    )
    base = {"doc_id": entry.doc_id, "system_id": entry.system_id, "config_hash": digest}
    try:
        result = evaluate(doc, summary, config, backend, metrics=metrics)
    except (BackendUnavailable, ProtocolError):
        raise
    except ShannonEvalError as exc:
        message = f"{type(exc).__name__}: {exc}"
        return [dict(base, metric=m, error=message) for m in metrics]
    records = []
    for metric in metrics:
        if metric == "shannon":
            if result.shannon_score is None:
                records.append(
                    dict(
                        base,
                        metric=metric,
                        error="DegenerateNormalization: |I(D) - I(D|D)| < "
                        f"{config.degeneracy_epsilon:.1e}",
                    )
                )
            else:
                records.append(dict(base, metric=metric, value=result.shannon_score))
        elif metric == "infodiff":
            records.append(dict(base, metric=metric, value=result.info_diff))
        elif metric == "blanc":
            records.append(dict(base, metric=metric, value=result.blanc_shannon))
    return records


def _write_records(fh, records: list[dict]) -> None:
    for record in records:
        fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
    fh.flush()


def run_metrics(
    dataset: EvalDataset,
    config: ScoringConfig,
    backend: Backend,
    metrics: tuple[str, ...] = METRICS,
    *,
    score_path: str | Path,
    concurrency: int = 1,
    failure_limit: int = 5,
) -> BatchResult:
    """Score every dataset entry, persisting to ``score_path`` as we go.

    Per-pair evaluation problems (degenerate normalization, unsupported
    greedy flags) become error records and the batch continues.  Backend
    failures are recorded too, but retried on the next run; more than
    ``failure_limit`` consecutive ones abort the batch.
    """
    metrics = tuple(m for m in METRICS if m in metrics)
    if not metrics:
        raise ValueError("no known metrics requested")
    if concurrency < 1:
        raise ValueError(f"concurrency must be >= 1, got {concurrency}")
    score_path = Path(score_path)
    digest = config_hash(config, backend)

    done: set[tuple[str, str, str]] = set()
    if score_path.exists():
        table = read_score_file(score_path, expect_hash=digest)
        for key, per_metric in table.values.items():
            done.update((key[0], key[1], m) for m in per_metric)
        for key, per_metric in table.errors.items():
            for metric, message in per_metric.items():
                if not message.startswith(TRANSIENT_ERRORS):
                    done.add((key[0], key[1], metric))

    pending: list[tuple[EvalEntry, tuple[str, ...]]] = []
    skipped = 0
    for entry in dataset.entries:
        missing = tuple(
            m for m in metrics if (entry.doc_id, entry.system_id, m) not in done
        )
        if missing:
            pending.append((entry, missing))
        else:
            skipped += 1
    log.info(
        "batch: %d pairs pending, %d already scored (config %s)",
        len(pending),
        skipped,
        digest,
    )

    # A crash can leave a complete final record without its newline; appending
    # straight after it would fuse two records onto one line.
    needs_newline = False
    if score_path.exists() and score_path.stat().st_size > 0:
        with open(score_path, "rb") as check:
            check.seek(-1, 2)
            needs_newline = check.read(1) != b"\n"

    scored = 0
    consecutive_failures = 0
    if pending:
        pool = ThreadPoolExecutor(max_workers=concurrency)
        try:
            with open(score_path, "a", encoding="utf-8", newline="\n") as fh:
                if needs_newline:
                    fh.write("\n")
                futures = [
                    pool.submit(
                        _pair_records, entry, dataset, config, backend, missing, digest
                    )
                    for entry, missing in pending
                ]
                for (entry, missing), future in zip(pending, futures):
                    try:
                        records = future.result()
                    except (BackendUnavailable, ProtocolError) as exc:
                        message = f"{type(exc).__name__}: {exc}"
                        records = [
                            {
                                "doc_id": entry.doc_id,
                                "system_id": entry.system_id,
                                "metric": m,
                                "error": message,
                                "config_hash": digest,
                            }
                            for m in missing
                        ]
                        _write_records(fh, records)
                        consecutive_failures += 1
                        if consecutive_failures > failure_limit:
                            raise AbortBatch(
                                f"{consecutive_failures} consecutive backend "
                                f"failures, last: {message}"
                            )
                        continue
                    _write_records(fh, records)
                    consecutive_failures = 0
                    scored += 1
        finally:
            pool.shutdown(wait=False, cancel_futures=True)

    if score_path.exists():
        table = read_score_file(score_path, expect_hash=digest)
    else:
        table = ScoreTable(values={}, errors={}, config_hash=digest)
    return BatchResult(
        table=table, scored_pairs=scored, skipped_pairs=skipped, score_path=score_path
    )
