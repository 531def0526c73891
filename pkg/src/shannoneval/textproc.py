"""Text normalization, sentence segmentation, word tokens, and the
extractive-fragment summary statistics used by the bias analysis.

Everything here is a deterministic pure function: no models, no locale
dependence, no randomness.  Callers that do not trust the rule-based
sentence splitter can supply pre-segmented sentences instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _kernels
from .errors import EmptyDocument, EmptySummary, IntegrityError

# Sentence-final punctuation and the closing quotes/brackets that may follow
# it before the inter-sentence whitespace.
_TERMINALS = ".!?"
_CLOSERS = "\"')]}”’»›"

# Fixed abbreviation list: a trailing "." on one of these never ends a
# sentence.  The list is frozen on purpose; segmentation must be reproducible
# across runs and platforms.
_ABBREVIATIONS = frozenset(
    {
        "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "Sr.", "Jr.", "St.", "Mt.",
        "Capt.", "Col.", "Gen.", "Lt.", "Sgt.", "Maj.", "Rev.", "Hon.",
        "Pres.", "Gov.", "Sen.", "Rep.", "Supt.", "Det.",
        "vs.", "etc.", "e.g.", "i.e.", "cf.", "al.", "approx.",
        "Inc.", "Ltd.", "Corp.", "Co.", "Bros.", "No.", "Nos.",
        "U.S.", "U.K.", "U.N.", "E.U.", "D.C.", "a.m.", "p.m.",
        "Jan.", "Feb.", "Mar.", "Apr.", "Jun.", "Jul.", "Aug.", "Sep.",
        "Sept.", "Oct.", "Nov.", "Dec.",
        "Mon.", "Tue.", "Wed.", "Thu.", "Fri.", "Sat.", "Sun.",
        "Ave.", "Blvd.", "Rd.", "Ln.",
        "Fig.", "Figs.", "Eq.", "Eqs.", "Ch.", "Sec.", "Vol.", "pp.",
    }
)

# Characters stripped from word edges by word_tokens.  Symbols that commonly
# carry meaning glued to a word (%, $, #, &, +, =, @) are kept.
_STRIP_CHARS = ".,;:!?\"'`()[]{}<>«»‹›“”‘’„‚…·•—–―-_/\\|~*^"


@dataclass(frozen=True)
class Sentence:
    """Character span [start, end) into the owning document's text."""

    start: int
    end: int

    def text_in(self, document_text: str) -> str:
        return document_text[self.start : self.end]


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    sentences: tuple[Sentence, ...]

    @classmethod
    def from_text(cls, doc_id: str, text: str) -> "Document":
        return cls(id=doc_id, text=text, sentences=tuple(split_sentences(text)))

    @classmethod
    def with_sentences(cls, doc_id: str, text: str, sentences: list[str]) -> "Document":
        """Build a document whose segmentation was supplied by the caller.

        Each provided sentence must occur in ``text`` in order; we locate it
        to recover character spans so that upstream-context windows keep the
        original inter-sentence whitespace.
        """
        spans = []
        cursor = 0
        for i, raw in enumerate(sentences):
            stripped = raw.strip()
            if not stripped:
                raise IntegrityError(f"pre-split sentence {i} is empty")
            at = text.find(stripped, cursor)
            if at < 0:
                raise IntegrityError(
                    f"pre-split sentence {i} not found in document text: {stripped[:60]!r}"
                )
            spans.append(Sentence(at, at + len(stripped)))
            cursor = at + len(stripped)
        if not spans:
            raise EmptyDocument("no sentences supplied")
        return cls(id=doc_id, text=text, sentences=tuple(spans))

    def sentence_texts(self) -> list[str]:
        return [s.text_in(self.text) for s in self.sentences]


@dataclass(frozen=True)
class SummaryText:
    id: str
    system_id: str
    text: str  # may be empty: the degenerate summary is a legal input


@dataclass(frozen=True)
class Fragment:
    """A maximal shared word span found by greedy matching."""

    doc_start: int
    sum_start: int
    length: int


@dataclass(frozen=True)
class SummaryStats:
    length: int
    compression: float
    coverage: float
    density: float
    novel_n: dict[int, float] = field(hash=False)
    repeat_n: dict[int, float] = field(hash=False)

    def as_row(self) -> dict[str, float]:
        row = {
            "length": float(self.length),
            "compression": self.compression,
            "coverage": self.coverage,
            "density": self.density,
        }
        for n in sorted(self.novel_n):
            row[f"novel_{n}"] = self.novel_n[n]
        for n in sorted(self.repeat_n):
            row[f"repeat_{n}"] = self.repeat_n[n]
        return row


def _is_hard_break(text: str, start: int, end: int) -> bool:
    # Whitespace run containing at least two newlines == paragraph break.
    return text.count("\n", start, end) >= 2


def _abbreviation_at(text: str, period_index: int) -> bool:
    """True when the word whose last char is text[period_index] == '.' is a
    known abbreviation (leading opening punctuation ignored)."""
    j = period_index
    while j > 0 and not text[j - 1].isspace():
        j -= 1
    token = text[j : period_index + 1].lstrip("([{\"'«‹“‘")
    return token in _ABBREVIATIONS


def split_sentences(text: str) -> list[Sentence]:
    """Split text into sentence spans with a fixed rule set.

    A boundary happens after ``. ! ?`` (plus any closing quotes/brackets)
    when followed by whitespace and an uppercase letter or digit, unless the
    period belongs to a listed abbreviation.  A blank line always splits.
    Spans exclude surrounding whitespace and cover every non-whitespace
    character, so joining spans with the original gaps reproduces the input.
    """
    if not text or not text.strip():
        raise EmptyDocument("document text is empty or whitespace-only")

    cuts = []  # index where a new sentence's scan region begins
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if ch in _TERMINALS:
            j = i + 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k > j and k < n and (text[k].isupper() or text[k].isdigit()):
                if not (ch == "." and _abbreviation_at(text, i)):
                    cuts.append(j)
            i = j
        elif ch.isspace():
            j = i
            while j < n and text[j].isspace():
                j += 1
            if _is_hard_break(text, i, j):
                cuts.append(i)
            i = j
        else:
            i += 1

    bounds = sorted(set(cuts))
    spans: list[Sentence] = []
    region_start = 0
    for cut in bounds + [n]:
        seg = text[region_start:cut]
        lead = len(seg) - len(seg.lstrip())
        start = region_start + lead
        end = region_start + len(seg.rstrip())
        if end > start:
            spans.append(Sentence(start, end))
        region_start = cut
    if not spans:
        raise EmptyDocument("document text is empty or whitespace-only")
    return spans


def word_tokens(text: str) -> list[str]:
    """Lowercased whitespace words with edge punctuation stripped.

    Interior punctuation stays ("u.s." -> "u.s"); tokens that strip to
    nothing are dropped.
    """
    out = []
    for raw in text.lower().split():
        word = raw.strip(_STRIP_CHARS)
        if word:
            out.append(word)
    return out


def extractive_fragments(doc_words: list[str], sum_words: list[str]) -> list[Fragment]:
    """Greedy left-to-right longest-match fragments between two word lists.

    At each summary position the longest contiguous match anywhere in the
    document wins; ties go to the earliest document position; an unmatched
    word advances the cursor without emitting a fragment.
    """
    if not doc_words or not sum_words:
        return []
    ids: dict[str, int] = {}
    doc_ids = [ids.setdefault(w, len(ids)) for w in doc_words]
    sum_ids = [ids.setdefault(w, len(ids)) for w in sum_words]
    rows = _kernels.match_fragments(doc_ids, sum_ids)
    return [Fragment(int(d), int(s), int(l)) for d, s, l in rows]


def _ngrams(words: list[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(words[i : i + n]) for i in range(len(words) - n + 1)]


def summary_stats(doc: Document, summary: SummaryText) -> SummaryStats:
    """The Grusky-style statistics: length, compression, extractive coverage
    and density, novel-n and repeat-n for n in {1,2,3}.

    novel_n uses distinct n-grams (set semantics); repeat_n is based on
    occurrence counts: 1 - distinct/occurrences.  When the summary has fewer
    than n words both are reported as 0.0.
    """
    doc_words = word_tokens(doc.text)
    sum_words = word_tokens(summary.text)
    if not sum_words:
        raise EmptySummary(f"summary {summary.id!r} has no words")

    fragments = extractive_fragments(doc_words, sum_words)
    total = sum(f.length for f in fragments)
    coverage = total / len(sum_words)
    density = sum(f.length * f.length for f in fragments) / len(sum_words)

    novel: dict[int, float] = {}
    repeat: dict[int, float] = {}
    for n in (1, 2, 3):
        sum_ngrams = _ngrams(sum_words, n)
        if not sum_ngrams:
            novel[n] = 0.0
            repeat[n] = 0.0
            continue
        distinct = set(sum_ngrams)
        doc_set = set(_ngrams(doc_words, n))
        novel[n] = len(distinct - doc_set) / len(distinct)
        repeat[n] = 1.0 - len(distinct) / len(sum_ngrams)

    return SummaryStats(
        length=len(sum_words),
        compression=len(doc_words) / len(sum_words),
        coverage=coverage,
        density=density,
        novel_n=novel,
        repeat_n=repeat,
    )
