"""HTTP client for the token-scoring wire protocol.

Endpoints (UTF-8 JSON bodies):
  GET  /v1/info   -> {"model_id": str, "context_limit": int, "logprob_base": "e"}
  POST /v1/score  -> {"tokens", "surprisals", "greedy_correct"?, "truncated",
                      "model_id"}

Every response is validated against the TokenScores invariants before it is
returned; anything malformed raises ProtocolError with a response excerpt.
Connection failures and 5xx are retried, then surface as BackendUnavailable.
In-flight requests are bounded by a semaphore so batch workers cannot
overrun the server.
"""

from __future__ import annotations

import threading
import time

import requests

from ..errors import BackendUnavailable, EmptyContinuation, ProtocolError
from .base import ScoreRequest, TokenScores


def _excerpt(text: str, limit: int = 200) -> str:
    text = text.replace("\n", "\\n")
    return text if len(text) <= limit else text[:limit] + "..."


class RemoteBackend:
    def __init__(
        self,
        endpoint_url: str,
        timeout: float = 60.0,
        retries: int = 2,
        concurrency: int = 4,
        retry_wait: float = 0.2,
        session: requests.Session | None = None,
    ):
        self.endpoint_url = endpoint_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.retry_wait = retry_wait
        self._session = session or requests.Session()
        self._slots = threading.Semaphore(max(1, concurrency))

        info = self._request("GET", "/v1/info")
        if not isinstance(info, dict):
            raise ProtocolError(f"info endpoint returned non-object: {_excerpt(repr(info))}")
        model_id = info.get("model_id")
        context_limit = info.get("context_limit")
        if not isinstance(model_id, str) or not model_id:
            raise ProtocolError(f"bad model_id in info: {_excerpt(repr(info))}")
        if not isinstance(context_limit, int) or context_limit <= 0:
            raise ProtocolError(f"bad context_limit in info: {_excerpt(repr(info))}")
        if info.get("logprob_base") != "e":
            raise ProtocolError(
                f"server does not report natural-log surprisals: {_excerpt(repr(info))}"
            )
        self.model_id = model_id
        self.context_limit = context_limit

    def _request(self, method: str, path: str, payload: dict | None = None):
        url = self.endpoint_url + path
        last_error = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.retry_wait)
            try:
                resp = self._session.request(method, url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                continue
            if resp.status_code in (502, 503, 504):
                last_error = f"HTTP {resp.status_code}: {_excerpt(resp.text)}"
                continue
            if resp.status_code != 200:
                raise ProtocolError(f"HTTP {resp.status_code}: {_excerpt(resp.text)}")
            try:
                return resp.json()
            except ValueError:
                raise ProtocolError(f"non-JSON response: {_excerpt(resp.text)}")
        raise BackendUnavailable(f"{url} unreachable after {self.retries + 1} attempts: {last_error}")

    def score(self, request: ScoreRequest) -> TokenScores:
        if not request.continuation.strip():
            raise EmptyContinuation("continuation is empty or whitespace-only")
        payload = {
            "prompt": request.prompt,
            "continuation": request.continuation,
            "want_greedy": request.want_greedy,
        }
        with self._slots:
            body = self._request("POST", "/v1/score", payload)
        return self._validate(body, request)

    def _validate(self, body, request: ScoreRequest) -> TokenScores:
        if not isinstance(body, dict):
            raise ProtocolError(f"score response is not an object: {_excerpt(repr(body))}")
        tokens = body.get("tokens")
        surprisals = body.get("surprisals")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise ProtocolError(f"bad tokens field: {_excerpt(repr(body))}")
        if not tokens:
            raise ProtocolError("empty token list for non-empty continuation")
        if not isinstance(surprisals, list) or not all(
            isinstance(s, (int, float)) and not isinstance(s, bool) for s in surprisals
        ):
            raise ProtocolError(f"bad surprisals field: {_excerpt(repr(body))}")
        greedy = body.get("greedy_correct")
        if request.want_greedy:
            if not isinstance(greedy, list) or not all(isinstance(g, bool) for g in greedy):
                raise ProtocolError(f"greedy flags requested but missing: {_excerpt(repr(body))}")
            greedy = tuple(greedy)
        else:
            greedy = None
        if "".join(tokens) != request.continuation:
            raise ProtocolError(
                "token concatenation does not reconstruct the continuation: "
                + _excerpt(repr(tokens))
            )
        model_id = body.get("model_id")
        if not isinstance(model_id, str) or not model_id:
            raise ProtocolError(f"bad model_id in score response: {_excerpt(repr(body))}")
        truncated = body.get("truncated")
        if not isinstance(truncated, bool):
            raise ProtocolError(f"bad truncated flag: {_excerpt(repr(body))}")
        # TokenScores.__post_init__ enforces lengths and non-negativity.
        return TokenScores(
            tokens=tuple(tokens),
            surprisals=tuple(float(s) for s in surprisals),
            greedy_correct=greedy,
            truncated=truncated,
            model_id=model_id,
            context_limit=self.context_limit,
        )


def remote_backend(
    endpoint_url: str, timeout: float = 60.0, retries: int = 2, concurrency: int = 4
) -> RemoteBackend:
    return RemoteBackend(endpoint_url, timeout=timeout, retries=retries, concurrency=concurrency)
