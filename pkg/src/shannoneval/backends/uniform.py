"""Helper-insensitive backend: every token costs ln(vocab_size) nats.

Useful as the degenerate end of the spectrum in tests: prompts cannot
matter, so Information Difference is 0 everywhere and the Shannon Score
denominator vanishes.  The greedy argmax is by convention the reserved
id-0 token, which never equals a real word, so greedy flags are all False.
"""

from __future__ import annotations

import math

from ..errors import EmptyContinuation
from .base import ScoreRequest, TokenScores
from .ngram import tokenize


class UniformBackend:
    def __init__(self, vocab_size: int = 4, context_limit: int = 1_000_000):
        if vocab_size < 2:
            raise ValueError(f"vocab_size must be >= 2, got {vocab_size}")
        self.vocab_size = vocab_size
        self.context_limit = context_limit
        self.model_id = f"uniform-v{vocab_size}"
        self._surprisal = math.log(vocab_size)

    def score(self, request: ScoreRequest) -> TokenScores:
        tokens = tokenize(request.continuation)
        if not tokens:
            raise EmptyContinuation("continuation is empty or whitespace-only")
        n = len(tokens)
        return TokenScores(
            tokens=tuple(tokens),
            surprisals=(self._surprisal,) * n,
            greedy_correct=(False,) * n if request.want_greedy else None,
            truncated=False,
            model_id=self.model_id,
            context_limit=self.context_limit,
        )
