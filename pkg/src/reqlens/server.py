"""HTTP gateway: JSON API plus a server-sent-event stream per session.

Every endpoint speaks UTF-8 JSON.  Errors use one shape everywhere:
``{"code": ..., "message": ..., "detail": ...}`` with code one of
bad_request (400), not_found (404), conflict (409), internal (500).
State changes are persisted by the engine before the response is sent.
"""

from __future__ import annotations

import json
import queue
from typing import Any, Iterator

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from reqlens import classifier
from reqlens.config import EngineConfig
from reqlens.index import SnippetIndex, file_sha256
from reqlens.session import ConflictError, NotFoundError, SessionEngine, StateError

STREAM_POLL_SECONDS = 0.5

# SSE frame names by log-record kind; extraction frames carry event records.
_FRAME_NAMES = {"utterance": "utterance", "event": "extraction", "rating": "rating"}


class SessionIn(BaseModel):
    session_id: str | None = None


class UtteranceIn(BaseModel):
    speaker: str
    t_start_ms: int
    t_end_ms: int
    text: str
    confidence: float | None = None
    tone: Any = None
    emotion: Any = None


class RatingIn(BaseModel):
    event_id: int
    snippet_id: str
    stars: int = Field(ge=1, le=5)


def _error(status: int, code: str, message: str, detail: str | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


def create_app(engine: SessionEngine, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="reqlens", version="0.1.0")
    app.state.engine = engine

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return _error(404, "not_found", str(exc.args[0]) if exc.args else "not found")

    @app.exception_handler(ConflictError)
    async def _conflict(request: Request, exc: ConflictError):
        return _error(409, "conflict", str(exc))

    @app.exception_handler(StateError)
    async def _state(request: Request, exc: StateError):
        return _error(409, "conflict", str(exc))

    @app.exception_handler(ValueError)
    async def _bad_request(request: Request, exc: ValueError):
        return _error(400, "bad_request", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", "invalid request body", detail=str(exc.errors()))

    @app.exception_handler(Exception)
    async def _internal(request: Request, exc: Exception):
        return _error(500, "internal", "internal error", detail=repr(exc))

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionIn | None = None):
        session_id = body.session_id if body is not None else None
        state = engine.create_session(session_id)
        return {"session_id": state.session_id}

    @app.post("/sessions/{session_id}/utterances")
    def post_utterance(session_id: str, body: UtteranceIn):
        event = engine.append_utterance(
            session_id,
            speaker=body.speaker,
            t_start_ms=body.t_start_ms,
            t_end_ms=body.t_end_ms,
            text=body.text,
            confidence=body.confidence,
            tone=body.tone,
            emotion=body.emotion,
        )
        state = engine.get_session(session_id)
        return {
            "utterance_id": state.utterances[-1].utterance_id,
            "event": event.to_dict() if event is not None else None,
        }

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, since: int = 0):
        state = engine.get_session(session_id)
        return {"events": [e.to_dict() for e in state.events if e.event_id > since]}

    @app.get("/sessions/{session_id}/recall")
    def get_recall(session_id: str, top_n: int = 10):
        return engine.resume_summary(session_id, top_n).to_dict()

    @app.put("/sessions/{session_id}/ratings")
    def put_rating(session_id: str, body: RatingIn):
        rating = engine.record_rating(session_id, body.event_id, body.snippet_id, body.stars)
        return {"rating": rating.to_dict()}

    @app.get("/sessions/{session_id}/stream")
    def stream(session_id: str, since: int = 0):
        subscriber, backlog = engine.subscribe(session_id, since)

        def frames() -> Iterator[str]:
            try:
                for seq, record in backlog:
                    yield _sse_frame(seq, record)
                while True:
                    try:
                        seq, record = subscriber.get(timeout=STREAM_POLL_SECONDS)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    yield _sse_frame(seq, record)
            finally:
                engine.unsubscribe(session_id, subscriber)

        return StreamingResponse(frames(), media_type="text/event-stream")

    @app.get("/snippets/{snippet_id:path}")
    def get_snippet(snippet_id: str):
        snippet = engine.index.snippets.get(snippet_id)
        if snippet is None:
            raise NotFoundError(f"unknown snippet: {snippet_id}")
        return {
            "snippet_id": snippet.snippet_id,
            "doc_id": snippet.doc_id,
            "char_span": list(snippet.char_span),
            "text": snippet.text,
            "length": snippet.length,
        }

    @app.get("/", response_class=HTMLResponse)
    def home():
        return (
            "<html><body><h1>reqlens gateway</h1>"
            "<p>JSON API: POST /sessions, POST /sessions/{id}/utterances, "
            "GET /sessions/{id}/events, GET /sessions/{id}/stream, "
            "PUT /sessions/{id}/ratings, GET /sessions/{id}/recall, "
            "GET /snippets/{id}</p></body></html>"
        )

    return app


def _sse_frame(seq: int, record: dict) -> str:
    name = _FRAME_NAMES.get(record.get("kind", ""), "message")
    data = json.dumps(record, ensure_ascii=False)
    return f"id: {seq}\nevent: {name}\ndata: {data}\n\n"


def build_engine(
    index_path: str,
    model_path: str,
    config: EngineConfig | None = None,
    store_dir: str | None = None,
    clock=None,
) -> SessionEngine:
    """Load and checksum-verify the index and model, then wire the engine."""
    index = SnippetIndex.load(index_path)
    model = classifier.load_model(model_path)
    return SessionEngine(
        index,
        model,
        config=config,
        store_dir=store_dir,
        clock=clock,
        index_ref={"path": str(index_path), "sha256": file_sha256(index_path)},
        model_ref={"path": str(model_path), "sha256": file_sha256(model_path)},
    )


def serve(
    index_path: str,
    model_path: str,
    port: int = 8000,
    host: str = "127.0.0.1",
    config: EngineConfig | None = None,
    store_dir: str | None = None,
    ui_dir: str | None = None,
) -> None:
    """Run the gateway under uvicorn; fails fast on unloadable files."""
    import uvicorn

    try:
        engine = build_engine(index_path, model_path, config=config, store_dir=store_dir)
    except (OSError, ValueError) as exc:
        raise SystemExit(f"cannot start: {exc}") from exc
    uvicorn.run(create_app(engine, ui_dir=ui_dir), host=host, port=port, log_level="info")
