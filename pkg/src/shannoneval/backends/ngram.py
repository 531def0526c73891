"""Deterministic in-process reference backend.

An add-alpha n-gram model interpolated with an add-one prompt cache.  The
cache is what makes the backend *use* its prompt: a plain n-gram model would
barely react to helper text, which would make every conditional metric
vacuous at desk scale.  With cache_order=2 the cache is a bigram
distribution over the prompt plus already-scored continuation prefix, so it
is sensitive to word order as well as overlap.

Training, ids, and scoring are fully deterministic; the backend is
immutable after training and safe to share across worker threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import EmptyContinuation, EmptyCorpus, SchemaError
from ..textproc import _STRIP_CHARS
from .base import ScoreRequest, TokenScores

BOS, EOS, UNK = "<bos>", "<eos>", "<unk>"
_FORMAT = "shannoneval-ngram-v1"


@dataclass(frozen=True)
class NGramConfig:
    order: int = 2
    smoothing_alpha: float = 1.0
    cache_weight: float = 0.5
    cache_order: int = 2

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if not self.smoothing_alpha > 0:
            raise ValueError(f"smoothing_alpha must be positive, got {self.smoothing_alpha}")
        if not (0.0 <= self.cache_weight < 1.0):
            raise ValueError(f"cache_weight must be in [0, 1), got {self.cache_weight}")
        if self.cache_order not in (1, 2):
            raise ValueError(f"cache_order must be 1 or 2, got {self.cache_order}")


def tokenize(text: str) -> list[str]:
    """The backend's own tokenization: lowercase whitespace words with edge
    punctuation stripped; a token that strips to nothing is kept raw so the
    token list is never shorter than the whitespace word count."""
    out = []
    for raw in text.lower().split():
        word = raw.strip(_STRIP_CHARS)
        out.append(word if word else raw)
    return out


class ReferenceBackend:
    def __init__(
        self,
        config: NGramConfig,
        vocab: list[str],
        contexts: list[tuple[int, ...]],
        counts: np.ndarray,
        totals: np.ndarray,
        context_limit: int = 1024,
    ):
        self.config = config
        self.vocab = tuple(vocab)
        self._word_ids = {w: i for i, w in enumerate(vocab)}
        self._ctx_rows = {ctx: i for i, ctx in enumerate(contexts)}
        self._contexts = list(contexts)
        self._counts = counts
        self._totals = totals
        self.context_limit = context_limit
        self.model_id = f"ngram-n{config.order}-v{len(vocab)}-{self._digest()[:10]}"

    # -- construction ------------------------------------------------------

    @classmethod
    def train(cls, corpus: list[str], config: NGramConfig, context_limit: int = 1024):
        if not corpus:
            raise EmptyCorpus("training corpus is empty")
        docs_tokens = [tokenize(doc) for doc in corpus]
        words = sorted({w for toks in docs_tokens for w in toks})
        if not words:
            raise EmptyCorpus("training corpus contains no word tokens")
        vocab = [BOS, EOS, UNK] + words
        word_ids = {w: i for i, w in enumerate(vocab)}
        bos_id, eos_id = 0, 1

        n = config.order
        raw: dict[tuple[int, ...], dict[int, int]] = {}
        for toks in docs_tokens:
            ids = [bos_id] * (n - 1) + [word_ids[w] for w in toks] + [eos_id]
            for t in range(n - 1, len(ids)):
                ctx = tuple(ids[t - n + 1 : t])
                row = raw.setdefault(ctx, {})
                row[ids[t]] = row.get(ids[t], 0) + 1

        contexts = sorted(raw)
        counts = np.zeros((len(contexts), len(vocab)), dtype=np.int64)
        for r, ctx in enumerate(contexts):
            for tok, c in raw[ctx].items():
                counts[r, tok] = c
        totals = counts.sum(axis=1)
        return cls(config, vocab, contexts, counts, totals, context_limit)

    # -- scoring -----------------------------------------------------------

    def _ids(self, tokens: list[str]) -> list[int]:
        unk = self._word_ids[UNK]
        return [self._word_ids.get(w, unk) for w in tokens]

    def _prepare(self, request: ScoreRequest):
        cont_tokens = tokenize(request.continuation)
        if not cont_tokens:
            raise EmptyContinuation("continuation is empty or whitespace-only")
        cont_ids = self._ids(cont_tokens)
        prompt_ids = self._ids(tokenize(request.prompt))

        truncated = False
        budget = self.context_limit - len(cont_ids)
        if len(prompt_ids) > budget:
            truncated = True
            prompt_ids = prompt_ids[-budget:] if budget > 0 else []

        n = self.config.order
        seq = [0] * (n - 1) + prompt_ids + cont_ids
        base = (n - 1) + len(prompt_ids)
        ctx_rows = [
            self._ctx_rows.get(tuple(seq[base + t - n + 1 : base + t]), -1)
            for t in range(len(cont_ids))
        ]
        return cont_tokens, cont_ids, prompt_ids, ctx_rows, truncated

    def score(self, request: ScoreRequest) -> TokenScores:
        cont_tokens, cont_ids, prompt_ids, ctx_rows, truncated = self._prepare(request)
        surprisals, greedy = _kernels.score_tokens(
            cont_ids,
            ctx_rows,
            self._counts,
            self._totals,
            prompt_ids,
            len(self.vocab),
            self.config.smoothing_alpha,
            self.config.cache_weight,
            self.config.cache_order,
            0,
            request.want_greedy,
        )
        return TokenScores(
            tokens=tuple(cont_tokens),
            surprisals=tuple(surprisals),
            greedy_correct=tuple(greedy) if request.want_greedy else None,
            truncated=truncated,
            model_id=self.model_id,
            context_limit=self.context_limit,
        )

    def candidate_surprisals(self, request: ScoreRequest, position: int) -> list[float]:
        """Surprisal of every vocabulary candidate at one continuation
        position.  exp(-s) sums to 1 over the result; used by tests."""
        _, cont_ids, prompt_ids, ctx_rows, _ = self._prepare(request)
        if not 0 <= position < len(cont_ids):
            raise IndexError(f"position {position} out of range")
        return _kernels.candidate_surprisals(
            cont_ids,
            ctx_rows,
            self._counts,
            self._totals,
            prompt_ids,
            len(self.vocab),
            self.config.smoothing_alpha,
            self.config.cache_weight,
            self.config.cache_order,
            0,
            position,
        )

    # -- persistence -------------------------------------------------------

    def _payload(self) -> dict:
        rows = []
        for r, ctx in enumerate(self._contexts):
            token_ids = np.nonzero(self._counts[r])[0]
            rows.append(
                [list(ctx), token_ids.tolist(), self._counts[r, token_ids].tolist()]
            )
        return {
            "format": _FORMAT,
            "order": self.config.order,
            "alpha": self.config.smoothing_alpha,
            "cache_weight": self.config.cache_weight,
            "cache_order": self.config.cache_order,
            "context_limit": self.context_limit,
            "vocab": list(self.vocab[3:]),
            "rows": rows,
        }

    def _digest(self) -> str:
        blob = json.dumps(self._payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self._payload(), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ReferenceBackend":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict) or data.get("format") != _FORMAT:
            raise SchemaError(f"{path}: not a {_FORMAT} model file")
        config = NGramConfig(
            order=data["order"],
            smoothing_alpha=data["alpha"],
            cache_weight=data["cache_weight"],
            cache_order=data["cache_order"],
        )
        vocab = [BOS, EOS, UNK] + list(data["vocab"])
        contexts = [tuple(ctx) for ctx, _, _ in data["rows"]]
        counts = np.zeros((len(contexts), len(vocab)), dtype=np.int64)
        for r, (_, token_ids, values) in enumerate(data["rows"]):
            counts[r, token_ids] = values
        return cls(
            config, vocab, contexts, counts, counts.sum(axis=1), data["context_limit"]
        )


def train_ngram(
    corpus: list[str], config: NGramConfig | None = None, context_limit: int = 1024
) -> ReferenceBackend:
    """Train the reference backend on a list of document texts."""
    return ReferenceBackend.train(corpus, config or NGramConfig(), context_limit)
