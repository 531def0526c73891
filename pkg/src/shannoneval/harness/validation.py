"""Sanity-check experiment: real summaries should beat corrupted ones.

For every document with a reference summary we score three helpers under
identical config: the reference itself, the reference with its words
shuffled, and the reference summary of a different document.  A usable
metric should rank the original first on (nearly) every document.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..backends.base import Backend
from ..errors import NeedTwoDocuments
from ..metrics import METRICS, ScoringConfig, evaluate
from ..textproc import Document

VARIANTS = ("original", "shuffled", "wrong")


@dataclass(frozen=True)
class SeparationStats:
    """How cleanly the original summary beats its corrupted variants."""

    n_docs: int
    min_margin_wrong: float  # min over docs of original - wrong
    min_margin_shuffled: float
    violations_wrong: int  # docs where original <= wrong
    violations_shuffled: int
    mean_original: float
    mean_shuffled: float
    mean_wrong: float


@dataclass(frozen=True)
class ValidationReport:
    seed: int
    metrics: tuple[str, ...]
    doc_ids: tuple[str, ...]
    # metric -> doc_id -> (original, shuffled, wrong); None marks a
    # degenerate value for that variant.
    triples: dict[str, dict[str, tuple[float | None, ...]]] = field(hash=False)
    separation: dict[str, SeparationStats] = field(hash=False)
    wrong_source: dict[str, str] = field(hash=False)  # doc_id -> donor doc_id

    def to_payload(self) -> dict:
        return {
            "seed": self.seed,
            "metrics": list(self.metrics),
            "doc_ids": list(self.doc_ids),
            "triples": {
                metric: {doc_id: list(t) for doc_id, t in per_doc.items()}
                for metric, per_doc in self.triples.items()
            },
            "separation": {
                metric: vars(stats).copy()
                for metric, stats in self.separation.items()
            },
            "wrong_source": dict(self.wrong_source),
        }


def shuffle_words(text: str, rng: random.Random) -> str:
    """Uniformly permute whitespace-separated words, punctuation attached."""
    words = text.split()
    shuffled = words[:]
    rng.shuffle(shuffled)
    return " ".join(shuffled)


def derangement(n: int, rng: random.Random) -> list[int]:
    """A seeded fixed-point-free permutation of range(n).

    Sattolo's algorithm yields a uniformly random single cycle; every cycle
    of length n >= 2 is a derangement.
    """
    if n < 2:
        raise NeedTwoDocuments(f"derangement needs n >= 2, got {n}")
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.randrange(i)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def _pick_value(metric: str, result) -> float | None:
    if metric == "shannon":
        return result.shannon_score
    if metric == "infodiff":
        return result.info_diff
    return result.blanc_shannon


def baseline_validation(
    pairs: list[tuple[Document, str]],
    config: ScoringConfig,
    backend: Backend,
    seed: int,
    metrics: tuple[str, ...] = METRICS,
) -> ValidationReport:
    """Run the three-way comparison over (document, reference summary) pairs.

    The word shuffle and the wrong-summary assignment both come from one
    RNG seeded with ``seed``, so a fixed seed reproduces the report
    exactly.  Fewer than two documents cannot support the wrong-summary
    variant and raise NeedTwoDocuments.
    """
    metrics = tuple(m for m in METRICS if m in metrics)
    if not metrics:
        raise ValueError("no known metrics requested")
    if len(pairs) < 2:
        raise NeedTwoDocuments(
            f"baseline validation needs >= 2 documents, got {len(pairs)}"
        )
    ids = [doc.id for doc, _ in pairs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate document ids in validation input")

    rng = random.Random(seed)
    donor = derangement(len(pairs), rng)
    shuffled_refs = [shuffle_words(ref, rng) for _, ref in pairs]

    triples: dict[str, dict[str, tuple[float | None, ...]]] = {
        m: {} for m in metrics
    }
    wrong_source: dict[str, str] = {}
    for i, (doc, ref) in enumerate(pairs):
        wrong_ref = pairs[donor[i]][1]
        wrong_source[doc.id] = ids[donor[i]]
        helpers = {
            "original": ref,
            "shuffled": shuffled_refs[i],
            "wrong": wrong_ref,
        }
        per_variant = {}
        for variant in VARIANTS:
            result = evaluate(doc, helpers[variant], config, backend, metrics=metrics)
            per_variant[variant] = result
        for metric in metrics:
            triples[metric][doc.id] = tuple(
                _pick_value(metric, per_variant[v]) for v in VARIANTS
            )

    separation = {
        metric: _separation(per_doc) for metric, per_doc in triples.items()
    }
    return ValidationReport(
        seed=seed,
        metrics=metrics,
        doc_ids=tuple(ids),
        triples=triples,
        separation=separation,
        wrong_source=wrong_source,
    )


def _separation(per_doc: dict[str, tuple[float | None, ...]]) -> SeparationStats:
    complete = [t for t in per_doc.values() if all(v is not None for v in t)]
    if not complete:
        return SeparationStats(
            n_docs=0,
            min_margin_wrong=float("nan"),
            min_margin_shuffled=float("nan"),
            violations_wrong=0,
            violations_shuffled=0,
            mean_original=float("nan"),
            mean_shuffled=float("nan"),
            mean_wrong=float("nan"),
        )
    originals = [t[0] for t in complete]
    shuffleds = [t[1] for t in complete]
    wrongs = [t[2] for t in complete]
    return SeparationStats(
        n_docs=len(complete),
        min_margin_wrong=min(o - w for o, w in zip(originals, wrongs)),
        min_margin_shuffled=min(o - s for o, s in zip(originals, shuffleds)),
        violations_wrong=sum(1 for o, w in zip(originals, wrongs) if o <= w),
        violations_shuffled=sum(1 for o, s in zip(originals, shuffleds) if o <= s),
        mean_original=sum(originals) / len(originals),
        mean_shuffled=sum(shuffleds) / len(shuffleds),
        mean_wrong=sum(wrongs) / len(wrongs),
    )
