"""HTTP surface: GET /v1/info and POST /v1/score.

Error contract: 400 with {"error": ...} for malformed bodies, 422 for an
empty continuation, 413-class overruns map to 400, and 503 while the
model is still loading (clients treat 503 as retryable).  All error
bodies carry a single "error" string.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .scoring import EmptyContinuation, RequestTooLong, Scorer


class ScorePayload(BaseModel):
    prompt: str
    continuation: str
    want_greedy: bool = False


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(scorer: Scorer | None = None, loader=None, max_batch: int = 8) -> FastAPI:
    """Build the service around a ready scorer or a deferred loader.

    With ``loader`` the model loads on a background thread after startup
    and both endpoints answer 503 until it lands.  ``max_batch`` bounds
    in-flight scoring requests; further requests wait their turn.
    """
    if (scorer is None) == (loader is None):
        raise ValueError("pass exactly one of scorer or loader")

    app = FastAPI(title="lm-sidecar", docs_url=None, redoc_url=None)
    state = {"scorer": scorer}
    gate = threading.Semaphore(max_batch)

    if loader is not None:

        def _load():
            state["scorer"] = loader()

        @app.on_event("startup")
        def _start_loading():
            threading.Thread(target=_load, daemon=True).start()

    @app.exception_handler(RequestValidationError)
    async def _malformed(request: Request, exc: RequestValidationError):
        return _error(400, f"malformed request: {exc.errors()[0]['msg']}")

    @app.get("/v1/info")
    def info():
        ready = state["scorer"]
        if ready is None:
            return _error(503, "model is still loading")
        return {
            "model_id": ready.model_id,
            "context_limit": ready.context_limit,
            "logprob_base": "e",
        }

    @app.post("/v1/score")
    def score(payload: ScorePayload):
        ready = state["scorer"]
        if ready is None:
            return _error(503, "model is still loading")
        try:
            with gate:
                outcome = ready.score(
                    payload.prompt, payload.continuation, payload.want_greedy
                )
        except EmptyContinuation as exc:
            return _error(422, str(exc))
        except RequestTooLong as exc:
            return _error(400, str(exc))
        body = {
            "tokens": list(outcome.tokens),
            "surprisals": list(outcome.surprisals),
            "truncated": outcome.truncated,
            "model_id": ready.model_id,
        }
        if outcome.greedy_correct is not None:
            body["greedy_correct"] = list(outcome.greedy_correct)
        return body

    return app
