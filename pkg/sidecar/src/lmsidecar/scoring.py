"""Surprisal scoring over a causal language model.

One forward pass per request: the prompt and continuation are tokenized
separately, concatenated behind a BOS token, and every continuation
position reads its next-token distribution from the positionwise
log-softmax of a single model call.  The prompt is left-truncated to fit
the model's context window; continuation tokens are never dropped.

Scoring is deterministic: the model runs in eval mode under no_grad with
a single compute thread, and concurrent requests are serialized on a
lock, so identical requests yield bitwise-identical surprisals.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

import torch


class EmptyContinuation(ValueError):
    """Continuation is empty or whitespace-only; nothing to score."""


class RequestTooLong(ValueError):
    """Continuation alone exceeds the context window; cannot score."""


@dataclass(frozen=True)
class ScoreOutcome:
    tokens: tuple[str, ...]
    surprisals: tuple[float, ...]
    greedy_correct: tuple[bool, ...] | None
    truncated: bool


def _context_limit(config) -> int:
    for name in ("n_positions", "max_position_embeddings"):
        value = getattr(config, name, None)
        if isinstance(value, int) and value > 0:
            return value
    raise ValueError("model config declares no positional limit")


class Scorer:
    """Wraps a loaded model + tokenizer behind the scoring contract."""

    def __init__(self, model, tokenizer, device: str = "cpu", model_id: str | None = None):
        torch.set_num_threads(1)  # threaded GEMM reductions are not bitwise stable
        self.model = model.to(device).eval()
        self.tokenizer = tokenizer
        self.device = device
        self.context_limit = _context_limit(model.config)
        self.model_id = model_id or Path(
            getattr(model.config, "_name_or_path", "") or "causal-lm"
        ).name
        self._lock = threading.Lock()
        bos = tokenizer.bos_token_id
        if bos is None:
            bos = tokenizer.eos_token_id
        if bos is None:
            raise ValueError("tokenizer declares neither BOS nor EOS token")
        self._bos = int(bos)

    def _encode(self, text: str) -> list[int]:
        return self.tokenizer(text, add_special_tokens=False)["input_ids"]

    def score(self, prompt: str, continuation: str, want_greedy: bool = False) -> ScoreOutcome:
        if not continuation.strip():
            raise EmptyContinuation("continuation is empty or whitespace-only")
        enc = self.tokenizer(
            continuation, add_special_tokens=False, return_offsets_mapping=True
        )
        cont_ids = enc["input_ids"]
        # byte-level pieces of one multi-byte character share a char span;
        # group them so the reported tokens tile the continuation string
        groups: list[list[int]] = []
        for idx, (a, b) in enumerate(enc["offset_mapping"]):
            if groups and a < groups[-1][1]:
                groups[-1][1] = max(groups[-1][1], b)
                groups[-1][2] = idx
            else:
                groups.append([a, b, idx])
        tokens = tuple(continuation[a:b] for a, b, _ in groups)
        if "".join(tokens) != continuation:
            raise RuntimeError("tokenizer offsets do not tile the continuation")

        budget = self.context_limit - 1 - len(cont_ids)  # room left after BOS
        if budget < 0:
            raise RequestTooLong(
                f"continuation is {len(cont_ids)} tokens; the model fits "
                f"{self.context_limit - 1} after BOS"
            )
        prompt_ids = self._encode(prompt) if prompt else []
        truncated = len(prompt_ids) > budget
        kept = prompt_ids[len(prompt_ids) - budget :] if truncated else prompt_ids

        ids = [self._bos] + kept + cont_ids
        with self._lock, torch.no_grad():
            logits = self.model(
                torch.tensor([ids], dtype=torch.long, device=self.device)
            ).logits[0]
            logprobs = torch.log_softmax(logits.float(), dim=-1)

        first = 1 + len(kept)  # absolute position of the first continuation token
        per_piece = []
        piece_greedy = []
        for j, token_id in enumerate(cont_ids):
            row = logprobs[first + j - 1]
            per_piece.append(float(-row[token_id]))
            if want_greedy:
                # argmax returns the first maximal index: ties go to lowest id
                piece_greedy.append(int(torch.argmax(row)) == token_id)

        surprisals = []
        greedy: list[bool] | None = [] if want_greedy else None
        start = 0
        for _, _, last in groups:
            s = sum(per_piece[start : last + 1])
            surprisals.append(0.0 if s == 0.0 else s)  # never emit -0.0
            if greedy is not None:
                greedy.append(all(piece_greedy[start : last + 1]))
            start = last + 1
        return ScoreOutcome(
            tokens=tokens,
            surprisals=tuple(surprisals),
            greedy_correct=tuple(greedy) if greedy is not None else None,
            truncated=truncated,
        )


def load_scorer(model_path: str, device: str = "cpu", model_id: str | None = None) -> Scorer:
    from transformers import AutoModelForCausalLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_path)
    model = AutoModelForCausalLM.from_pretrained(model_path)
    return Scorer(
        model, tokenizer, device=device, model_id=model_id or Path(model_path).name
    )
