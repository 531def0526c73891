"""Shared test utilities: synthetic corpora and independent oracles.

The oracles here recompute expected values through deliberately different
machinery (plain dicts, O(n^2) loops, counting-based ranks) so the tested
implementations cannot be "verified" against themselves.  Final arithmetic
expressions mirror the published formulas, which also makes exact float
comparison legitimate where both sides are built from integers.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

from shannoneval.backends.ngram import BOS, EOS, UNK, tokenize

# ---------------------------------------------------------------------------
# synthetic corpora


TOPIC_WORDS = {
    "finance": "shares market index traders rally profits dividend earnings",
    "weather": "storm rain flood coast winds forecast pressure humidity",
    "sport": "team match season coach goal defense striker tournament",
    "science": "theory particle experiment data resonance laboratory sensor",
    "politics": "senate ballot reform coalition mandate debate veto quorum",
    "travel": "airline resort luggage itinerary passport customs terminal",
}

_FILLER = "the of a to and in on for with at".split()


def sentence(rng: random.Random, words: list[str], n_words: int) -> str:
    parts = []
    for i in range(n_words):
        pool = words if (i % 2 == 0) else words + _FILLER
        parts.append(rng.choice(pool))
    text = " ".join(parts)
    return text[0].upper() + text[1:] + "."


def synthetic_doc(rng: random.Random, words: list[str], n_sentences: int) -> str:
    return " ".join(
        sentence(rng, words, rng.randrange(6, 11)) for _ in range(n_sentences)
    )


def random_docs(n_docs: int, seed: int, n_sentences: int = 4) -> list[str]:
    """Documents drawing from all topics at once (shared vocabulary)."""
    rng = random.Random(seed)
    vocab = [w for words in TOPIC_WORDS.values() for w in words.split()]
    return [synthetic_doc(rng, vocab, n_sentences) for _ in range(n_docs)]


def topic_docs_with_refs(
    n_docs: int, seed: int, n_sentences: int = 4
) -> list[tuple[str, str, str]]:
    """(doc_id, document, reference summary) triples, one topic per doc.

    Each document uses only its own topic vocabulary (plus filler), and the
    reference summary is a verbatim extract, so summary bigrams occur in the
    document and topic vocabularies are disjoint across topics.
    """
    rng = random.Random(seed)
    names = list(TOPIC_WORDS)
    out = []
    for i in range(n_docs):
        topic = names[i % len(names)]
        words = TOPIC_WORDS[topic].split()
        doc = synthetic_doc(rng, words, n_sentences)
        first_words = doc.split()[: rng.randrange(8, 13)]
        ref = " ".join(first_words)
        out.append((f"{topic}-{i}", doc, ref))
    return out


def write_pairs_jsonl(path: Path, triples, with_ref: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, doc, ref in triples:
            record = {"doc_id": doc_id, "document": doc}
            if with_ref:
                record["ref_summary"] = ref
            else:
                record["summary"] = ref
            fh.write(json.dumps(record) + "\n")


def write_summeval_jsonl(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


# ---------------------------------------------------------------------------
# n-gram backend oracle (dict-based; shares only the tokenizer)


def oracle_ngram_counts(corpus: list[str], order: int):
    vocab = [BOS, EOS, UNK] + sorted({w for d in corpus for w in tokenize(d)})
    ids = {w: i for i, w in enumerate(vocab)}
    counts: dict[tuple[int, ...], dict[int, int]] = {}
    for doc in corpus:
        seq = [ids[BOS]] * (order - 1) + [ids[w] for w in tokenize(doc)] + [ids[EOS]]
        for t in range(order - 1, len(seq)):
            ctx = tuple(seq[t - order + 1 : t])
            row = counts.setdefault(ctx, {})
            row[seq[t]] = row.get(seq[t], 0) + 1
    return vocab, ids, counts


def oracle_score(
    corpus: list[str],
    prompt: str,
    continuation: str,
    order: int = 2,
    alpha: float = 1.0,
    lam: float = 0.5,
    cache_order: int = 2,
    context_limit: int = 1024,
    want_greedy: bool = False,
):
    """Independent reimplementation of the reference model's scoring rule.

    Returns (tokens, surprisals, greedy).  Uses dict-of-dict counting and a
    replayed cache; the arithmetic mirrors the definition
    p = lam * (cache_count+1)/(cache_total+V) + (1-lam) * (c+alpha)/(total+alpha*V).
    """
    vocab, ids, counts = oracle_ngram_counts(corpus, order)
    V = len(vocab)
    unk = ids[UNK]

    cont_tokens = tokenize(continuation)
    cont = [ids.get(w, unk) for w in cont_tokens]
    prom = [ids.get(w, unk) for w in tokenize(prompt)]
    budget = context_limit - len(cont)
    if len(prom) > budget:
        prom = prom[-budget:] if budget > 0 else []

    history = list(prom)
    surprisals = []
    greedy = []
    for t, x_true in enumerate(cont):
        ctx = tuple(([ids[BOS]] * (order - 1) + history)[-(order - 1) :]) if order > 1 else ()

        def prob(x: int) -> float:
            row = counts.get(ctx, {})
            total = sum(row.values())
            p = (row.get(x, 0) + alpha) / (total + alpha * V)
            if lam > 0.0:
                if cache_order == 1:
                    cache_ctx = history
                    cc = cache_ctx.count(x)
                    c_den = float(len(cache_ctx) + V)
                else:
                    seq = [ids[BOS]] + history
                    prev = seq[-1]
                    cc = sum(
                        1
                        for a, b in zip(seq, seq[1:])
                        if a == prev and b == x
                    )
                    c_den = float(
                        sum(1 for a in seq[:-1] if a == prev) + V
                    )
                p = lam * ((cc + 1.0) / c_den) + (1.0 - lam) * p
            return p

        p_true = prob(x_true)
        s = -math.log(p_true)
        surprisals.append(s if s > 0.0 else 0.0)
        if want_greedy:
            best_x, best_p = 0, prob(0)
            for x in range(1, V):
                px = prob(x)
                if px > best_p:
                    best_p = px
                    best_x = x
            greedy.append(best_x == x_true)
        history.append(x_true)

    return cont_tokens, surprisals, greedy


# ---------------------------------------------------------------------------
# extractive fragment oracle (maximize-then-tiebreak, no greedy scan state)


def oracle_fragments(doc_words: list[str], sum_words: list[str]):
    """All maximal greedy fragments, computed by explicit argmax per spec:
    at each summary position take the longest contiguous shared span,
    breaking ties toward the earliest document position."""
    out = []
    i = 0
    while i < len(sum_words):
        candidates = []
        for j in range(len(doc_words)):
            length = 0
            while (
                i + length < len(sum_words)
                and j + length < len(doc_words)
                and doc_words[j + length] == sum_words[i + length]
            ):
                length += 1
            if length > 0:
                candidates.append((length, j))
        if not candidates:
            i += 1
            continue
        best_len = max(length for length, _ in candidates)
        best_j = min(j for length, j in candidates if length == best_len)
        out.append((best_j, i, best_len))
        i += best_len
    return out


# ---------------------------------------------------------------------------
# correlation oracles


def oracle_kendall(xs, ys) -> float:
    n = len(xs)
    concordant = discordant = tied_x = tied_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (xs[i] > xs[j]) - (xs[i] < xs[j])
            dy = (ys[i] > ys[j]) - (ys[i] < ys[j])
            if dx == 0:
                tied_x += 1
            if dy == 0:
                tied_y += 1
            if dx * dy > 0:
                concordant += 1
            elif dx * dy < 0:
                discordant += 1
    n0 = n * (n - 1) // 2
    if n0 == tied_x or n0 == tied_y:
        raise ZeroDivisionError("degenerate series")
    return (concordant - discordant) / math.sqrt((n0 - tied_x) * (n0 - tied_y))


def oracle_midranks(values) -> list[float]:
    out = []
    for v in values:
        below = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        out.append(below + (equal + 1) / 2)
    return out


def oracle_pearson(xs, ys) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sxx = syy = 0.0
    for a, b in zip(xs, ys):
        sxy += (a - mx) * (b - my)
        sxx += (a - mx) * (a - mx)
        syy += (b - my) * (b - my)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroDivisionError("degenerate series")
    return sxy / math.sqrt(sxx * syy)


def oracle_spearman(xs, ys) -> float:
    return oracle_pearson(oracle_midranks(xs), oracle_midranks(ys))


# ---------------------------------------------------------------------------
# golden heatmap fixture (shared by the test and the regeneration script)

GOLDEN_CORPUS = [
    "The tide pools held small crabs. Gulls circled the wet rocks. "
    "A child counted shells near the water.",
    "The observatory dome opened at dusk. The telescope tracked a comet. "
    "Astronomers logged its position all night.",
    "Fresh bread cooled on the rack. The baker dusted flour from the bench. "
    "Customers lined up before sunrise.",
]

GOLDEN_DOC = GOLDEN_CORPUS[1]
GOLDEN_SUMMARY = "The telescope tracked a comet at dusk."


def golden_heatmap_spec():
    """Deterministic heatmap over a fixed corpus; used for the byte-exact
    golden test and by tests/regen_golden.py."""
    from shannoneval.backends import NGramConfig, ReferenceBackend
    from shannoneval.heatmap import HeatmapSpec
    from shannoneval.metrics import ScoringConfig, evaluate
    from shannoneval.textproc import Document

    backend = ReferenceBackend.train(GOLDEN_CORPUS, NGramConfig())
    doc = Document.from_text("observatory", GOLDEN_DOC)
    result = evaluate(doc, GOLDEN_SUMMARY, ScoringConfig(), backend)
    labels = {
        "unconditional": "I(D)",
        "given_summary": "I(D|S)",
        "given_document": "I(D|D)",
    }
    scenarios = tuple(
        (labels[name], profile) for name, profile in result.profiles.items()
    )
    return HeatmapSpec(
        doc_id=doc.id,
        scenarios=scenarios,
        metrics={
            "shannon": result.shannon_score,
            "infodiff": result.info_diff,
            "blanc": result.blanc_shannon,
        },
    )
