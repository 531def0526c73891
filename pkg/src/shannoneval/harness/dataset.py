"""JSONL dataset ingestion for benchmark-style and bare-pairs corpora."""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import EmptyDocument, IntegrityError, SchemaError
from ..textproc import Document

FORMATS = ("summeval-jsonl", "pairs-jsonl")

# System id attached to bare-pairs entries, which carry none of their own.
PAIRS_SYSTEM_ID = "system"


@dataclass(frozen=True)
class EvalEntry:
    doc_id: str
    system_id: str
    summary_text: str
    annotations: dict[str, tuple[float, ...]] = field(default_factory=dict, hash=False)

    @property
    def key(self) -> tuple[str, str]:
        return (self.doc_id, self.system_id)

    def mean_rating(self, dimension: str) -> float:
        ratings = self.annotations[dimension]
        return sum(ratings) / len(ratings)


@dataclass(frozen=True)
class EvalDataset:
    documents: dict[str, Document] = field(hash=False)
    entries: tuple[EvalEntry, ...] = ()
    dimensions: tuple[str, ...] = ()
    # doc_id -> reference summary, present only for rows that declared one.
    ref_summaries: dict[str, str] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        for entry in self.entries:
            if entry.doc_id not in self.documents:
                raise IntegrityError(
                    f"entry ({entry.doc_id!r}, {entry.system_id!r}) references "
                    "an unknown document"
                )

    @property
    def grid(self) -> tuple[tuple[str, str], ...]:
        return tuple(entry.key for entry in self.entries)

    @property
    def system_ids(self) -> tuple[str, ...]:
        return tuple(sorted({e.system_id for e in self.entries}))


def _require(record: dict, key: str, kind, line_number: int):
    if key not in record:
        raise SchemaError(f"missing required field {key!r}", line_number=line_number)
    value = record[key]
    if kind is str and not isinstance(value, str):
        raise SchemaError(
            f"field {key!r} must be a string, got {type(value).__name__}",
            line_number=line_number,
        )
    return value


def _parse_lines(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON ({exc.msg})", line_number=i)
        if not isinstance(record, dict):
            raise SchemaError("each line must be a JSON object", line_number=i)
        yield i, record


def _parse_annotations(record: dict, line_number: int) -> dict[str, tuple[float, ...]]:
    raw = record.get("annotations", {})
    if not isinstance(raw, dict):
        raise SchemaError("'annotations' must be an object", line_number=line_number)
    out = {}
    for dim, ratings in raw.items():
        if not isinstance(ratings, list) or not ratings:
            raise SchemaError(
                f"annotation {dim!r} must be a non-empty list", line_number=line_number
            )
        for r in ratings:
            if not isinstance(r, numbers.Real) or isinstance(r, bool):
                raise SchemaError(
                    f"annotation {dim!r} contains a non-numeric rating",
                    line_number=line_number,
                )
        out[dim] = tuple(float(r) for r in ratings)
    return out


def _make_document(
    doc_id: str, record: dict, line_number: int, documents: dict[str, Document]
) -> None:
    """Register the document text carried on this line.

    Lines after the first for a doc_id may omit the text; carrying a
    conflicting text is an integrity violation.
    """
    if "document" not in record:
        return
    text = _require(record, "document", str, line_number)
    sentences = record.get("sentences")
    if sentences is not None:
        if not isinstance(sentences, list) or not all(
            isinstance(s, str) for s in sentences
        ):
            raise SchemaError(
                "'sentences' must be a list of strings", line_number=line_number
            )
    if doc_id in documents:
        if documents[doc_id].text != text:
            raise IntegrityError(
                f"document {doc_id!r} redefined with different text "
                f"(line {line_number})"
            )
        return
    try:
        if sentences:
            documents[doc_id] = Document.with_sentences(doc_id, text, sentences)
        else:
            documents[doc_id] = Document.from_text(doc_id, text)
    except EmptyDocument as exc:
        raise SchemaError(f"document {doc_id!r}: {exc}", line_number=line_number)
    except IntegrityError as exc:
        raise IntegrityError(f"document {doc_id!r} (line {line_number}): {exc}")


def load_dataset(path: str | Path, format: str = "summeval-jsonl") -> EvalDataset:
    """Load a JSONL dataset.

    summeval-jsonl lines carry {doc_id, system_id, document, summary,
    annotations}; pairs-jsonl lines carry {doc_id, document, summary} with
    an optional ref_summary for validation runs.  Schema problems raise
    SchemaError with the offending line number; cross-line inconsistencies
    raise IntegrityError.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown dataset format {format!r}; choose from {FORMATS}")
    path = Path(path)
    documents: dict[str, Document] = {}
    entries: list[EvalEntry] = []
    ref_summaries: dict[str, str] = {}
    seen_keys: dict[tuple[str, str], int] = {}
    pending_docs: dict[str, int] = {}

    for line_number, record in _parse_lines(path):
        doc_id = _require(record, "doc_id", str, line_number)
        _make_document(doc_id, record, line_number, documents)
        if doc_id not in documents:
            pending_docs.setdefault(doc_id, line_number)

        if format == "summeval-jsonl":
            system_id = _require(record, "system_id", str, line_number)
            summary = _require(record, "summary", str, line_number)
            annotations = _parse_annotations(record, line_number)
        else:
            system_id = PAIRS_SYSTEM_ID
            if "ref_summary" in record:
                ref = _require(record, "ref_summary", str, line_number)
                ref_summaries[doc_id] = ref
            if "summary" not in record and "ref_summary" not in record:
                raise SchemaError(
                    "pairs line needs 'summary' or 'ref_summary'",
                    line_number=line_number,
                )
            summary = record.get("summary")
            if summary is None:
                summary = ref_summaries[doc_id]
            elif not isinstance(summary, str):
                raise SchemaError(
                    f"field 'summary' must be a string, got {type(summary).__name__}",
                    line_number=line_number,
                )
            annotations = {}

        key = (doc_id, system_id)
        if key in seen_keys:
            raise IntegrityError(
                f"duplicate entry for ({doc_id!r}, {system_id!r}): "
                f"lines {seen_keys[key]} and {line_number}"
            )
        seen_keys[key] = line_number
        entries.append(
            EvalEntry(
                doc_id=doc_id,
                system_id=system_id,
                summary_text=summary,
                annotations=annotations,
            )
        )

    dangling = sorted(d for d in pending_docs if d not in documents)
    if dangling:
        first = dangling[0]
        raise IntegrityError(
            f"doc_id {first!r} (line {pending_docs[first]}) never carries "
            "document text"
        )
    dimensions = tuple(sorted({dim for e in entries for dim in e.annotations}))
    return EvalDataset(
        documents=documents,
        entries=tuple(entries),
        dimensions=dimensions,
        ref_summaries=ref_summaries,
    )
