"""Scoring interface shared by every backend.

A backend turns (prompt, continuation) into per-token surprisals in nats,
optionally with greedy-match flags.  Surprisals use the natural log
throughout; the Shannon Score is a ratio, so the unit choice cancels there
anyway, but Information Difference values are nats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from ..errors import ProtocolError


@dataclass(frozen=True)
class ScoreRequest:
    prompt: str
    continuation: str
    want_greedy: bool = False


@dataclass(frozen=True)
class TokenScores:
    """Per-token result of scoring one continuation.

    tokens holds the backend's own tokenization of the continuation;
    surprisals are -ln p(token | prompt + preceding tokens), all >= 0.
    """

    tokens: tuple[str, ...]
    surprisals: tuple[float, ...]
    greedy_correct: tuple[bool, ...] | None
    truncated: bool
    model_id: str
    context_limit: int

    def __post_init__(self):
        if len(self.tokens) != len(self.surprisals):
            raise ProtocolError(
                f"{len(self.tokens)} tokens but {len(self.surprisals)} surprisals"
            )
        if self.greedy_correct is not None and len(self.greedy_correct) != len(self.tokens):
            raise ProtocolError(
                f"{len(self.tokens)} tokens but {len(self.greedy_correct)} greedy flags"
            )
        for s in self.surprisals:
            if not (s >= 0.0):  # also rejects NaN
                raise ProtocolError(f"negative or NaN surprisal {s!r}")
        if self.context_limit <= 0:
            raise ProtocolError(f"context_limit must be positive, got {self.context_limit}")

    @property
    def total_surprisal(self) -> float:
        return sum(self.surprisals)

    @property
    def greedy_hits(self) -> int | None:
        if self.greedy_correct is None:
            return None
        return sum(1 for g in self.greedy_correct if g)


@runtime_checkable
class Backend(Protocol):
    model_id: str
    context_limit: int

    def score(self, request: ScoreRequest) -> TokenScores: ...
