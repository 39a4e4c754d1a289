"""HTTP facade: chat turns, uploads, document delivery, history, evaluation.

Sessions are in-memory with a 24h TTL and unguessable ids; turns within one
session are serialized by a per-session lock while independent sessions run
fully in parallel. Answers are synchronous (no streaming).
"""

from __future__ import annotations

import asyncio
import datetime
import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .corpus.pdf import ParsedUpload, parse_user_pdf
from .errors import (
    BudgetTooSmall,
    EmptyDocumentError,
    EmptyIndexError,
    ProviderTimeout,
    ProviderUnavailable,
    UnparsablePdfError,
    UploadTimeoutError,
    ValidationError,
)
from .evaluation import RatingLog, aggregate
from .generation import DEFAULT_BUDGET, AnswerGenerator, GenerationClient
from .index import IndexedCorpus
from .retrieval import RetrievalConfig, Retriever

SESSION_TTL_S = 24 * 3600
GENERATION_INFLIGHT_CAP = 4


def _now_iso() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


@dataclass
class ChatSession:
    session_id: str
    turns: list[dict] = field(default_factory=list)
    active_upload: ParsedUpload | None = None
    last_used: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory session map; expired entries are purged on access.

    With ``journal_path`` set, every turn is appended to an NDJSON journal
    (flushed per turn) and sessions are rebuilt from it on startup.
    """

    def __init__(self, ttl_s: float = SESSION_TTL_S, journal_path: str | Path | None = None):
        self.ttl_s = ttl_s
        self.journal_path = Path(journal_path) if journal_path else None
        self._sessions: dict[str, ChatSession] = {}
        self._lock = threading.Lock()
        if self.journal_path and self.journal_path.exists():
            self._replay_journal()

    def _replay_journal(self) -> None:
        with open(self.journal_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                entry = json.loads(line)
                session = self._sessions.setdefault(
                    entry["session_id"], ChatSession(session_id=entry["session_id"])
                )
                session.turns.append(entry["turn"])

    def record_turn(self, session: ChatSession, turn: dict) -> None:
        session.turns.append(turn)
        if self.journal_path:
            with open(self.journal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"session_id": session.session_id, "turn": turn}) + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def get_or_create(self, session_id: str | None) -> ChatSession:
        with self._lock:
            now = time.monotonic()
            expired = [k for k, s in self._sessions.items() if now - s.last_used > self.ttl_s]
            for key in expired:
                del self._sessions[key]
            if session_id and session_id in self._sessions:
                session = self._sessions[session_id]
            else:
                session = ChatSession(session_id=secrets.token_hex(16))
                self._sessions[session.session_id] = session
            session.last_used = now
            return session

    def get(self, session_id: str) -> ChatSession | None:
        with self._lock:
            return self._sessions.get(session_id)


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def create_app(
    index: IndexedCorpus,
    embed_client,
    gen_client: GenerationClient,
    *,
    pdf_store: str | Path | None = None,
    eval_log_path: str | Path = "eval.ndjson",
    session_journal_path: str | Path | None = None,
    budget: int = DEFAULT_BUDGET,
    session_ttl_s: float = SESSION_TTL_S,
    server_grace_s: float = 10.0,
) -> FastAPI:
    app = FastAPI(title="resqa")
    retriever = Retriever(index, embed_client)
    generator = AnswerGenerator(gen_client, budget=budget)
    sessions = SessionStore(ttl_s=session_ttl_s, journal_path=session_journal_path)
    rating_log = RatingLog(eval_log_path)
    gen_slots = threading.Semaphore(GENERATION_INFLIGHT_CAP)
    request_deadline_s = gen_client.timeout_s + server_grace_s
    app.state.index = index
    app.state.sessions = sessions
    app.state.rating_log = rating_log

    @app.middleware("http")
    async def request_deadline(request, call_next):
        try:
            return await asyncio.wait_for(call_next(request), timeout=request_deadline_s)
        except asyncio.TimeoutError:
            return JSONResponse(
                status_code=504,
                content={"detail": {"code": "ServerTimeout",
                                    "message": f"request exceeded {request_deadline_s:.0f}s"}},
            )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "index_docs": index.num_docs, "model_id": index.model_id}

    @app.post("/api/chat")
    def chat(payload: dict):
        query = (payload.get("query") or "").strip()
        if not query:
            raise _error(422, "EmptyQuery", "query must be non-empty")
        try:
            config = RetrievalConfig(
                n=int(payload.get("n", RetrievalConfig.n)),
                k=int(payload.get("k", RetrievalConfig.k)),
                alpha=float(payload.get("alpha", RetrievalConfig.alpha)),
            )
        except (TypeError, ValueError) as exc:
            raise _error(422, "BadConfig", str(exc))
        session = sessions.get_or_create(payload.get("session_id"))
        with session.lock:
            try:
                t0 = time.monotonic()
                retrieved = retriever.retrieve(query, config)
                retrieve_ms = int((time.monotonic() - t0) * 1000)
                t1 = time.monotonic()
                with gen_slots:
                    answer = generator.answer(query, retrieved, session.active_upload)
                generate_ms = int((time.monotonic() - t1) * 1000)
            except (ProviderUnavailable, ProviderTimeout, EmptyIndexError) as exc:
                raise _error(503, type(exc).__name__, str(exc))
            except BudgetTooSmall as exc:
                raise _error(422, "BudgetTooSmall", str(exc))
            turn = {
                "query": query,
                "answer": {
                    "text": answer.text,
                    "provider_model": answer.provider_model,
                    "latency_ms": answer.latency_ms,
                    "retries": answer.retries,
                },
                "sources": [dict(s) for s in answer.sources],
                "retrieved_doc_ids": [d.doc_id for d in retrieved],
                "timestamp": _now_iso(),
            }
            sessions.record_turn(session, turn)
        return {
            "session_id": session.session_id,
            "answer": turn["answer"]["text"],
            "sources": turn["sources"],
            "timings": {"retrieve_ms": retrieve_ms, "generate_ms": generate_ms},
        }

    @app.post("/api/upload")
    def upload(file: UploadFile = File(...), session_id: str | None = Form(None)):
        session = sessions.get_or_create(session_id)
        data = file.file.read()
        try:
            parsed = parse_user_pdf(data, filename=file.filename or "upload.pdf")
        except UnparsablePdfError as exc:
            raise _error(400, "UnparsablePdfError", str(exc))
        except EmptyDocumentError as exc:
            raise _error(400, "EmptyDocumentError", str(exc))
        except UploadTimeoutError as exc:
            raise _error(408, "UploadTimeoutError", str(exc))
        with session.lock:
            session.active_upload = parsed  # last write wins
        return {"upload_id": parsed.upload_id, "session_id": session.session_id}

    @app.get("/api/documents/{doc_id:path}/meta")
    def document_meta(doc_id: str):
        meta = index.metadata.get(doc_id)
        if meta is None:
            raise _error(404, "UnknownDocument", f"no document {doc_id!r}")
        return {"doc_id": doc_id, **meta}

    @app.get("/api/documents/{doc_id:path}")
    def document_pdf(doc_id: str, lang: str):
        meta = index.metadata.get(doc_id)
        if meta is None:
            raise _error(404, "UnknownDocument", f"no document {doc_id!r}")
        if lang not in meta.get("languages", []):
            raise _error(404, "LanguageUnavailable", f"{doc_id} has no {lang} version")
        if pdf_store is None:
            raise _error(404, "NoPdfStore", "service is running without a PDF store")
        path = Path(pdf_store) / doc_id / f"{lang}.pdf"
        if not path.is_file():
            raise _error(404, "PdfMissing", f"stored PDF not found for {doc_id} [{lang}]")
        return Response(content=path.read_bytes(), media_type="application/pdf")

    @app.get("/api/history/{session_id}")
    def history(session_id: str, format: str = "json"):
        session = sessions.get(session_id)
        if session is None:
            raise _error(404, "UnknownSession", f"no session {session_id!r}")
        with session.lock:
            turns = [dict(t) for t in session.turns]
        if format == "json":
            return JSONResponse(
                content=turns,
                headers={"Content-Disposition": "attachment; filename=history.json"},
            )
        if format == "markdown":
            return PlainTextResponse(
                content=_history_markdown(turns),
                media_type="text/markdown",
                headers={"Content-Disposition": "attachment; filename=history.md"},
            )
        raise _error(422, "BadFormat", "format must be json or markdown")

    @app.post("/api/eval")
    def record_eval(payload: dict):
        try:
            record = rating_log.append(payload)
        except ValidationError as exc:
            raise _error(422, "ValidationError", f"{exc.key}: {exc}")
        return {"status": "recorded", "question_id": record["question_id"]}

    @app.get("/api/eval/report")
    def eval_report(config: str | None = None, by_rater: bool = False):
        records = rating_log.records()
        if config:
            records = [
                r
                for r in records
                if config in (r["config_id"]["retriever"], r["config_id"]["generator"])
            ]
        report = aggregate(records, by_rater=by_rater)
        body = {"cells": report.rows()}
        if report.by_rater is not None:
            body["by_rater"] = [
                {"rater": k[0], "config": k[1], "section": k[2], "dimension": k[3],
                 "mean": v[0], "count": v[1]}
                for k, v in sorted(report.by_rater.items())
            ]
        return body

    return app


def _history_markdown(turns: list[dict]) -> str:
    lines = ["# Conversation history", ""]
    for i, turn in enumerate(turns, start=1):
        lines.append(f"## Turn {i}")
        lines.append("")
        lines.append(f"**Q:** {turn['query']}")
        lines.append("")
        lines.append(turn["answer"]["text"])
        lines.append("")
        if turn["sources"]:
            lines.append("Sources:")
            for source in turn["sources"]:
                lines.append(
                    f"- {source['doc_id']} — {source.get('title', '')} ({source.get('date', '')})"
                )
            lines.append("")
    return "\n".join(lines)


def export_history(session: ChatSession, format: str = "json") -> str:
    """Library-level export mirroring the HTTP endpoint."""
    if format == "json":
        return json.dumps(session.turns, ensure_ascii=False, indent=1)
    if format == "markdown":
        return _history_markdown(session.turns)
    raise ValueError("format must be json or markdown")
