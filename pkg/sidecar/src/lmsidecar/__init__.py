"""Token-surprisal scoring server for autoregressive language models."""

from .app import create_app
from .scoring import (
    EmptyContinuation,
    RequestTooLong,
    ScoreOutcome,
    Scorer,
    load_scorer,
)

__all__ = [
    "EmptyContinuation",
    "RequestTooLong",
    "ScoreOutcome",
    "Scorer",
    "create_app",
    "load_scorer",
]
