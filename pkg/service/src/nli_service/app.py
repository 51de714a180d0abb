"""Batch entailment scoring behind a two-route HTTP contract.

POST /nli takes {"pairs": [{"premise", "hypothesis"}, ...]} and answers
{"scores": [{"entail", "neutral", "contradict"}, ...]} in request order;
GET /health answers {"status": "ok"}. The scorer backing the app is
injected, so contract tests run against a stub and never download model
weights. Scorer calls are serialized: one inference at a time per device.
"""

from __future__ import annotations

import threading
from typing import Callable, Sequence

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

# A scorer maps (premise, hypothesis) pairs to raw (entail, neutral,
# contradict) triples; the app normalizes them to exact distributions.
Scorer = Callable[[Sequence[tuple[str, str]]], Sequence[tuple[float, float, float]]]

DEFAULT_MAX_BATCH = 128


class Pair(BaseModel):
    premise: str
    hypothesis: str


class ScoreRequest(BaseModel):
    pairs: list[Pair]


class Score(BaseModel):
    entail: float
    neutral: float
    contradict: float


class ScoreResponse(BaseModel):
    scores: list[Score]


def _normalize(raw: tuple[float, float, float]) -> Score:
    e, n, c = (float(x) for x in raw)
    if min(e, n, c) < 0.0:
        raise HTTPException(500, detail=f"model produced negative score {raw!r}")
    total = e + n + c
    if total <= 0.0:
        raise HTTPException(500, detail=f"model produced degenerate score {raw!r}")
    return Score(entail=e / total, neutral=n / total, contradict=c / total)


def create_app(scorer: Scorer, max_batch: int = DEFAULT_MAX_BATCH) -> FastAPI:
    app = FastAPI(title="nli-service")
    lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/nli", response_model=ScoreResponse)
    def score(request: ScoreRequest):
        if len(request.pairs) > max_batch:
            raise HTTPException(
                413, detail=f"batch of {len(request.pairs)} exceeds limit {max_batch}"
            )
        pairs = [(p.premise, p.hypothesis) for p in request.pairs]
        if not pairs:
            return ScoreResponse(scores=[])
        with lock:
            raw = scorer(pairs)
        if len(raw) != len(pairs):
            raise HTTPException(
                500, detail=f"model returned {len(raw)} scores for {len(pairs)} pairs"
            )
        return ScoreResponse(scores=[_normalize(r) for r in raw])

    return app
