"""Document information metrics.

I(D) is the total surprisal of the document's sentences; I(D|S) prepends
helper text S to every scoring prompt; I(D|D) uses the document itself as
helper.  From those three totals:

  information difference  ID = I(D) - I(D|S)
  shannon score            s = (I(D) - I(D|S)) / (I(D) - I(D|D))
  blanc-shannon              = greedy accuracy with summary helper
                             - greedy accuracy without helper

Prompts are composed as  helper + separator + upstream sentences, where the
upstream window is the k sentences before the scored one with their
original inter-sentence whitespace (k=None means all prior sentences).  An
empty or whitespace-only helper is treated as "no helper", which pins
ID(D, "") to exactly 0.  Per-sentence results are reduced in sentence
order, so totals do not depend on scoring concurrency.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .backends.base import Backend, ScoreRequest, TokenScores
from .errors import (
    DegenerateNormalization,
    EmptyDocument,
    GreedyUnsupported,
    ShannonEvalError,
)
from .textproc import Document, SummaryText

UNCONDITIONAL = "unconditional"
GIVEN_SUMMARY = "given_summary"
GIVEN_DOCUMENT = "given_document"

METRICS = ("shannon", "infodiff", "blanc")


@dataclass(frozen=True)
class ScoringConfig:
    k_upstream: int | None = 0  # None = all prior sentences
    helper_separator: str = "\n"
    degeneracy_epsilon: float = 1e-9
    want_greedy: bool = True

    def __post_init__(self):
        if self.k_upstream is not None and self.k_upstream < 0:
            raise ValueError(f"k_upstream must be >= 0 or None, got {self.k_upstream}")
        if not self.degeneracy_epsilon > 0:
            raise ValueError(f"degeneracy_epsilon must be positive")


@dataclass(frozen=True)
class InfoProfile:
    scenario: str
    per_sentence: tuple[TokenScores, ...]
    total_info: float
    total_tokens: int
    greedy_hits: int | None

    @property
    def greedy_accuracy(self) -> float | None:
        if self.greedy_hits is None or self.total_tokens == 0:
            return None
        return self.greedy_hits / self.total_tokens


@dataclass(frozen=True)
class MetricResult:
    shannon_score: float | None  # None marks a degenerate normalization
    info_diff: float
    blanc_shannon: float | None  # None when greedy flags were not requested
    profiles: dict[str, InfoProfile] = field(hash=False)
    config: ScoringConfig = field(hash=False)

    @property
    def degenerate(self) -> bool:
        return self.shannon_score is None


def _helper_text(helper: str | None) -> str | None:
    """Normalize the helper slot: empty and whitespace-only mean absent."""
    if helper is None or not helper.strip():
        return None
    return helper


def _profile(
    doc: Document, helper: str | None, config: ScoringConfig, backend: Backend, scenario: str
) -> InfoProfile:
    if not doc.sentences:
        raise EmptyDocument(f"document {doc.id!r} has no sentences")
    helper = _helper_text(helper)
    k = config.k_upstream
    results: list[TokenScores] = []
    for i, sentence in enumerate(doc.sentences):
        lo = 0 if k is None else max(0, i - k)
        if lo < i:
            upstream = doc.text[doc.sentences[lo].start : doc.sentences[i - 1].end]
        else:
            upstream = ""
        prompt = (helper + config.helper_separator if helper is not None else "") + upstream
        request = ScoreRequest(
            prompt=prompt,
            continuation=sentence.text_in(doc.text),
            want_greedy=config.want_greedy,
        )
        try:
            results.append(backend.score(request))
        except ShannonEvalError as exc:
            exc.sentence_index = i
            exc.doc_id = doc.id
            raise
    # Per-sentence subtotals first, then the cross-sentence sum: this makes
    # I(D) at k=0 decompose exactly into single-sentence document_info sums.
    total_info = sum(ts.total_surprisal for ts in results)
    total_tokens = sum(len(ts.tokens) for ts in results)
    if all(ts.greedy_correct is not None for ts in results):
        greedy_hits = sum(ts.greedy_hits for ts in results)
    else:
        greedy_hits = None
    return InfoProfile(
        scenario=scenario,
        per_sentence=tuple(results),
        total_info=total_info,
        total_tokens=total_tokens,
        greedy_hits=greedy_hits,
    )


def document_info(
    doc: Document,
    helper: str | None,
    config: ScoringConfig,
    backend: Backend,
    scenario: str | None = None,
) -> InfoProfile:
    """Score every sentence of ``doc`` with ``helper`` in the prompt slot.

    helper=None gives I(D); helper=summary text gives I(D|S); helper=
    doc.text gives I(D|D).
    """
    if scenario is None:
        if helper is None:
            scenario = UNCONDITIONAL
        elif helper == doc.text:
            scenario = GIVEN_DOCUMENT
        else:
            scenario = GIVEN_SUMMARY
    return _profile(doc, helper, config, backend, scenario)


def _summary_text(summary: SummaryText | str) -> str:
    return summary.text if isinstance(summary, SummaryText) else summary


def _relabel(profile: InfoProfile, scenario: str) -> InfoProfile:
    return InfoProfile(
        scenario=scenario,
        per_sentence=profile.per_sentence,
        total_info=profile.total_info,
        total_tokens=profile.total_tokens,
        greedy_hits=profile.greedy_hits,
    )


def _compute_profiles(
    doc: Document,
    summary: SummaryText | str,
    config: ScoringConfig,
    backend: Backend,
    need_document_helper: bool,
) -> dict[str, InfoProfile]:
    base = _profile(doc, None, config, backend, UNCONDITIONAL)
    helper = _helper_text(_summary_text(summary))
    if helper is None:
        # Empty summary == no helper: reuse the base profile so the
        # difference is exactly zero under any backend.
        given_summary = _relabel(base, GIVEN_SUMMARY)
    else:
        given_summary = _profile(doc, helper, config, backend, GIVEN_SUMMARY)
    profiles = {UNCONDITIONAL: base, GIVEN_SUMMARY: given_summary}
    if need_document_helper:
        profiles[GIVEN_DOCUMENT] = _profile(doc, doc.text, config, backend, GIVEN_DOCUMENT)
    return profiles


def information_difference(
    doc: Document, summary: SummaryText | str, config: ScoringConfig, backend: Backend
) -> float:
    profiles = _compute_profiles(doc, summary, config, backend, need_document_helper=False)
    return profiles[UNCONDITIONAL].total_info - profiles[GIVEN_SUMMARY].total_info


def _shannon_from_profiles(profiles: dict[str, InfoProfile], epsilon: float) -> float:
    numerator = profiles[UNCONDITIONAL].total_info - profiles[GIVEN_SUMMARY].total_info
    denominator = profiles[UNCONDITIONAL].total_info - profiles[GIVEN_DOCUMENT].total_info
    if abs(denominator) < epsilon:
        raise DegenerateNormalization(
            f"|I(D) - I(D|D)| = {abs(denominator):.3e} < {epsilon:.1e}: "
            "the backend does not use its prompt"
        )
    return numerator / denominator


def shannon_score(
    doc: Document, summary: SummaryText | str, config: ScoringConfig, backend: Backend
) -> float:
    profiles = _compute_profiles(doc, summary, config, backend, need_document_helper=True)
    return _shannon_from_profiles(profiles, config.degeneracy_epsilon)


def _blanc_from_profiles(profiles: dict[str, InfoProfile]) -> float:
    base = profiles[UNCONDITIONAL]
    helped = profiles[GIVEN_SUMMARY]
    if base.greedy_hits is None or helped.greedy_hits is None:
        raise GreedyUnsupported("backend did not return greedy-match flags")
    return helped.greedy_hits / helped.total_tokens - base.greedy_hits / base.total_tokens


def blanc_shannon(
    doc: Document, summary: SummaryText | str, config: ScoringConfig, backend: Backend
) -> float:
    """Boost in greedy next-token accuracy from the summary helper,
    micro-averaged over all document tokens.  Always in [-1, 1]."""
    if not config.want_greedy:
        config = replace(config, want_greedy=True)
    profiles = _compute_profiles(doc, summary, config, backend, need_document_helper=False)
    return _blanc_from_profiles(profiles)


def evaluate(
    doc: Document,
    summary: SummaryText | str,
    config: ScoringConfig,
    backend: Backend,
    metrics: tuple[str, ...] = METRICS,
) -> MetricResult:
    """The requested metrics over a shared set of profiles (each scenario is
    scored at most once; I(D|D) only when the Shannon score is wanted).

    A degenerate normalization is reported as shannon_score=None instead of
    raising, so batch runs can record it per pair and keep going;
    blanc_shannon is None when greedy flags were not requested.
    """
    unknown = [m for m in metrics if m not in METRICS]
    if unknown:
        raise ValueError(f"unknown metrics {unknown}; choose from {METRICS}")
    if "blanc" in metrics and not config.want_greedy:
        config = replace(config, want_greedy=True)
    profiles = _compute_profiles(
        doc, summary, config, backend, need_document_helper="shannon" in metrics
    )
    info_diff = profiles[UNCONDITIONAL].total_info - profiles[GIVEN_SUMMARY].total_info
    score = None
    if "shannon" in metrics:
        try:
            score = _shannon_from_profiles(profiles, config.degeneracy_epsilon)
        except DegenerateNormalization:
            score = None
    blanc = None
    if config.want_greedy:
        try:
            blanc = _blanc_from_profiles(profiles)
        except GreedyUnsupported:
            # Only fatal when the caller explicitly asked for blanc.
            if "blanc" in metrics:
                raise
    return MetricResult(
        shannon_score=score,
        info_diff=info_diff,
        blanc_shannon=blanc,
        profiles=profiles,
        config=config,
    )
