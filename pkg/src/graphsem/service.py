"""HTTP API for interactive relevance-feedback sessions.

Endpoints (JSON in/out, every session response carries ``revision``):

* ``POST /corpora`` — upload a corpus file; id is content-derived.
* ``GET /corpora/{cid}/graphs/{gid}`` — graph detail for display.
* ``POST /sessions`` — create a session over a corpus.
* ``POST /sessions/{sid}/feedback`` — label one pattern; optimistic
  concurrency via the caller's ``revision`` token (409 on mismatch).
* ``GET /sessions/{sid}/ranking`` — paged posterior ranking.
* ``PUT /sessions/{sid}/threshold`` — relabel at a new threshold.
* ``GET /sessions/{sid}/export`` / ``POST /sessions/import`` — snapshot
  round trip.

Mutations are serialized per session behind a lock; reads serve the
latest committed immutable state without taking it. Every accepted
mutation is persisted as a snapshot file when a session directory is
configured.
"""

from __future__ import annotations

import argparse
import logging
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .graph_model import (
    Corpus,
    CorpusFormatError,
    CorpusValidationError,
    GraphNotFoundError,
    canonical_corpus_id,
    graph_to_jsonable,
    load_corpus,
    save_corpus,
)
from .semantics import Ranking
from .session import (
    SessionState,
    SnapshotError,
    apply_feedback,
    apply_threshold,
    new_session_state,
    restore_snapshot,
    snapshot_bytes,
)

__all__ = ["ServiceConfig", "create_app", "main"]

logger = logging.getLogger(__name__)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _not_found(message: str) -> ApiError:
    return ApiError(404, "not_found", message)


@dataclass
class ServiceConfig:
    corpus_dir: Path | None = None
    session_dir: Path | None = None
    default_r: int = 1000
    default_beam_width: int = 0
    default_deletion_penalty: float = 1.0
    default_threshold: float = 0.5
    feedback_top_k: int = 10


@dataclass
class _SessionHandle:
    state: SessionState
    lock: threading.Lock = field(default_factory=threading.Lock)


class _Registry:
    """In-memory corpora and sessions, plus optional file persistence."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._corpora: dict[str, Corpus] = {}
        self._aliases: dict[str, str] = {}
        self._sessions: dict[str, _SessionHandle] = {}
        self._lock = threading.Lock()
        if config.corpus_dir is not None:
            self._load_corpus_dir(config.corpus_dir)

    def _load_corpus_dir(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        for path in sorted(directory.glob("*.json")):
            if path.name.endswith(".truth.json"):
                continue
            try:
                corpus = load_corpus(path.read_bytes())
            except (CorpusFormatError, CorpusValidationError) as exc:
                logger.warning("skipping corpus file %s: %s", path, exc)
                continue
            corpus_id = canonical_corpus_id(corpus)
            self._corpora[corpus_id] = corpus
            self._aliases[path.stem] = corpus_id
            logger.info("loaded corpus %s as %s (%d graphs)",
                        path.name, corpus_id, len(corpus))

    def add_corpus(self, corpus: Corpus) -> str:
        corpus_id = canonical_corpus_id(corpus)
        with self._lock:
            self._corpora[corpus_id] = corpus
        if self.config.corpus_dir is not None:
            (self.config.corpus_dir / f"{corpus_id}.json").write_bytes(save_corpus(corpus))
        return corpus_id

    def resolve_corpus_id(self, corpus_id: str) -> str:
        with self._lock:
            if corpus_id in self._corpora:
                return corpus_id
            if corpus_id in self._aliases:
                return self._aliases[corpus_id]
        raise _not_found(f"unknown corpus {corpus_id!r}")

    def corpus(self, corpus_id: str) -> Corpus:
        return self._corpora[self.resolve_corpus_id(corpus_id)]

    def add_session(self, state: SessionState) -> str:
        session_id = uuid.uuid4().hex[:16]
        with self._lock:
            self._sessions[session_id] = _SessionHandle(state=state)
        self.persist(session_id, state)
        return session_id

    def session(self, session_id: str) -> _SessionHandle:
        with self._lock:
            handle = self._sessions.get(session_id)
        if handle is None:
            raise _not_found(f"unknown session {session_id!r}")
        return handle

    def persist(self, session_id: str, state: SessionState) -> None:
        if self.config.session_dir is not None:
            self.config.session_dir.mkdir(parents=True, exist_ok=True)
            path = self.config.session_dir / f"{session_id}.json"
            path.write_bytes(snapshot_bytes(state))


class _CreateSessionBody(BaseModel):
    corpus_id: str
    r: int | None = Field(default=None, ge=2)
    beam_width: int | None = Field(default=None, ge=0)
    deletion_penalty: float | None = Field(default=None, gt=0.0, le=1.0)
    threshold: float | None = Field(default=None, ge=0.0, le=1.0)


class _FeedbackBody(BaseModel):
    graph_id: str
    label: Literal["positive", "negative"]
    revision: int = Field(ge=0)


class _ThresholdBody(BaseModel):
    threshold: float = Field(ge=0.0, le=1.0)
    revision: int = Field(ge=0)


def _ranking_slice(ranking: Ranking | None, top_k: int, offset: int) -> tuple[list[dict], int]:
    if ranking is None:
        return [], 0
    records = ranking.records[offset:offset + top_k] if top_k >= 0 else ranking.records[offset:]
    return [r.to_jsonable() for r in records], len(ranking.records)


def _session_summary(state: SessionState, records: list[dict], total: int,
                     offset: int = 0) -> dict[str, Any]:
    return {
        "revision": state.revision,
        "status": "ready" if state.trained else "untrained",
        "threshold": state.threshold,
        "total": total,
        "offset": offset,
        "records": records,
        "positive_reference": state.positive.reference_graph_id,
        "negative_reference": state.negative.reference_graph_id,
        "positive_examples": [e.graph_id for e in state.positive.training_log],
        "negative_examples": [e.graph_id for e in state.negative.training_log],
    }


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    registry = _Registry(config)
    app = FastAPI(title="graphsem", version="0.1.0")
    app.state.registry = registry
    # the browser UI may be served from a different origin (static server)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def handle_validation(_request: Request,
                                exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=422,
                            content={"error": "validation", "message": str(exc.errors())})

    @app.post("/corpora")
    async def upload_corpus(request: Request) -> JSONResponse:
        body = await request.body()
        try:
            corpus = load_corpus(body)
        except CorpusFormatError as exc:
            raise ApiError(400, "format", str(exc)) from None
        except CorpusValidationError as exc:
            raise ApiError(400, "validation", str(exc)) from None
        corpus_id = registry.add_corpus(corpus)
        return JSONResponse({
            "corpus_id": corpus_id,
            "graph_count": len(corpus),
            "feature_dimension": corpus.feature_dimension,
        })

    @app.get("/corpora/{corpus_id}/graphs/{graph_id}")
    def graph_detail(corpus_id: str, graph_id: str) -> JSONResponse:
        corpus = registry.corpus(corpus_id)
        try:
            graph = corpus.graph(graph_id)
        except GraphNotFoundError as exc:
            raise _not_found(str(exc)) from None
        return JSONResponse({
            "corpus_id": registry.resolve_corpus_id(corpus_id),
            "graph": graph_to_jsonable(graph),
        })

    @app.post("/sessions")
    def create_session(body: _CreateSessionBody) -> JSONResponse:
        corpus_id = registry.resolve_corpus_id(body.corpus_id)
        state = new_session_state(
            corpus_id=corpus_id,
            r=body.r if body.r is not None else config.default_r,
            beam_width=(body.beam_width if body.beam_width is not None
                        else config.default_beam_width),
            deletion_penalty=(body.deletion_penalty if body.deletion_penalty is not None
                              else config.default_deletion_penalty),
            threshold=(body.threshold if body.threshold is not None
                       else config.default_threshold),
        )
        session_id = registry.add_session(state)
        summary = _session_summary(state, [], 0)
        summary.update({
            "session_id": session_id,
            "corpus_id": corpus_id,
            "quantizer_r": state.quantizer.r,
            "beam_width": state.matcher_config.beam_width,
        })
        return JSONResponse(summary)

    @app.post("/sessions/{session_id}/feedback")
    def submit_feedback(session_id: str, body: _FeedbackBody) -> JSONResponse:
        handle = registry.session(session_id)
        corpus = registry.corpus(handle.state.corpus_id)
        with handle.lock:
            if body.revision != handle.state.revision:
                raise ApiError(
                    409, "conflict",
                    f"revision {body.revision} is stale (current {handle.state.revision})")
            try:
                new_state = apply_feedback(handle.state, corpus, body.graph_id, body.label)
            except GraphNotFoundError as exc:
                raise _not_found(str(exc)) from None
            handle.state = new_state
        registry.persist(session_id, new_state)
        records, total = _ranking_slice(new_state.ranking, config.feedback_top_k, 0)
        return JSONResponse(_session_summary(new_state, records, total))

    @app.get("/sessions/{session_id}/ranking")
    def get_ranking(session_id: str, top_k: int = 50, offset: int = 0) -> JSONResponse:
        if top_k < 0 or offset < 0:
            raise ApiError(422, "validation", "top_k and offset must be >= 0")
        state = registry.session(session_id).state
        records, total = _ranking_slice(state.ranking, top_k, offset)
        return JSONResponse(_session_summary(state, records, total, offset=offset))

    @app.put("/sessions/{session_id}/threshold")
    def set_threshold(session_id: str, body: _ThresholdBody) -> JSONResponse:
        handle = registry.session(session_id)
        with handle.lock:
            if body.revision != handle.state.revision:
                raise ApiError(
                    409, "conflict",
                    f"revision {body.revision} is stale (current {handle.state.revision})")
            new_state = apply_threshold(handle.state, body.threshold)
            handle.state = new_state
        registry.persist(session_id, new_state)
        labeled = new_state.ranking.labeled_count if new_state.ranking else 0
        total = len(new_state.ranking.records) if new_state.ranking else 0
        return JSONResponse({
            "revision": new_state.revision,
            "threshold": new_state.threshold,
            "labeled_count": labeled,
            "total": total,
        })

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str) -> Response:
        state = registry.session(session_id).state
        return Response(content=snapshot_bytes(state), media_type="application/json")

    @app.post("/sessions/import")
    async def import_session(request: Request) -> JSONResponse:
        body = await request.body()
        try:
            state = restore_snapshot(body, registry.corpus)
        except SnapshotError as exc:
            raise ApiError(400, "validation", str(exc)) from None
        session_id = registry.add_session(state)
        return JSONResponse({
            "session_id": session_id,
            "revision": state.revision,
            "status": "ready" if state.trained else "untrained",
        })

    return app


def main(argv: list[str] | None = None) -> None:
    """Run the service under uvicorn; flags override environment."""
    import uvicorn

    parser = argparse.ArgumentParser(prog="graphsem-service")
    parser.add_argument("--host", default=os.environ.get("GRAPHSEM_HOST", "127.0.0.1"))
    parser.add_argument("--port", type=int,
                        default=int(os.environ.get("GRAPHSEM_PORT", "8000")))
    parser.add_argument("--corpus-dir",
                        default=os.environ.get("GRAPHSEM_CORPUS_DIR"))
    parser.add_argument("--session-dir",
                        default=os.environ.get("GRAPHSEM_SESSION_DIR"))
    parser.add_argument("--default-r", type=int,
                        default=int(os.environ.get("GRAPHSEM_DEFAULT_R", "1000")))
    parser.add_argument("--default-beam", type=int,
                        default=int(os.environ.get("GRAPHSEM_DEFAULT_BEAM", "0")))
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO)
    config = ServiceConfig(
        corpus_dir=Path(args.corpus_dir) if args.corpus_dir else None,
        session_dir=Path(args.session_dir) if args.session_dir else None,
        default_r=args.default_r,
        default_beam_width=args.default_beam,
    )
    uvicorn.run(create_app(config), host=args.host, port=args.port, log_level="info")


if __name__ == "__main__":
    main()
