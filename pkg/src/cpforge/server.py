"""HTTP annotation service.

A thin JSON facade over ALSession for the browser console (or any
scripted client).  Endpoints:

    POST /sessions                {dataset, clusters?, budget, seed?, holdout_frac?}
                                  -> {session_id}
    GET  /sessions/{id}/query     -> {segment_id, grid, features,
                                      queries_made, budget, holdout_accuracy}
    POST /sessions/{id}/labels    {segment_id, label} -> progress metrics
    POST /sessions/{id}/finish    -> {model_path, labeled_path, curve_path}
    GET  /healthz                 -> {status: "ok"}
    GET  /ui/...                  -> static annotation console, if configured

Domain errors map one-to-one onto status codes: AlreadyLabeled -> 409,
UnknownId -> 404, BudgetExhausted / PoolEmpty -> 410, parse problems ->
400.  Mutations on one session are serialized behind a lock; reads
between mutations see a consistent snapshot.

The server is stdlib http.server: no framework, no background state
beyond the in-memory session table, trivially embedded in tests.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import active
from .clustering import read_cluster_report
from .config import Config, require_file
from .errors import (
    AlreadyLabeled,
    BudgetExhausted,
    DomainError,
    ParseError,
    PoolEmpty,
    UnknownId,
)
from .quality import save_model
from .sampler import read_dataset

_STATUS = {
    AlreadyLabeled: 409,
    UnknownId: 404,
    BudgetExhausted: 410,
    PoolEmpty: 410,
    ParseError: 400,
}

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}


@dataclass
class _SessionBox:
    session: active.ALSession
    lock: threading.Lock = field(default_factory=threading.Lock)
    dataset_path: str = ""


class AnnotationService:
    """Session table + request logic, independent of the HTTP plumbing."""

    def __init__(self, config: Config):
        self.config = config
        self._sessions: dict[str, _SessionBox] = {}
        self._counter = 0
        self._table_lock = threading.Lock()

    def create_session(self, body: dict) -> dict:
        dataset_path = require_file(body.get("dataset", self.config.path("dataset_path")))
        clusters_path = body.get("clusters")
        if clusters_path is None:
            clusters_path = Path(dataset_path).with_name(
                Path(self.config.clusters_path).name
            )
        report = read_cluster_report(require_file(clusters_path))
        dataset = read_dataset(dataset_path)
        session = active.init_session(
            dataset,
            [int(i) for i in report["medoid_ids"]],
            budget=int(body.get("budget", self.config.budget)),
            holdout_frac=float(body.get("holdout_frac", self.config.holdout_frac)),
            seed=int(body.get("seed", self.config.seed)),
        )
        with self._table_lock:
            self._counter += 1
            session_id = f"s{self._counter}"
            self._sessions[session_id] = _SessionBox(
                session=session, dataset_path=str(dataset_path)
            )
        return {"session_id": session_id}

    def _box(self, session_id: str) -> _SessionBox:
        box = self._sessions.get(session_id)
        if box is None:
            raise UnknownId(f"no session {session_id!r}")
        return box

    def query(self, session_id: str) -> dict:
        box = self._box(session_id)
        with box.lock:
            s = box.session
            segment_id = active.next_query(s)
            rec = s.records[segment_id]
            return {
                "segment_id": segment_id,
                "grid": rec.grid.lines,
                "features": rec.features.as_dict(),
                "queries_made": s.queries_made,
                "budget": s.budget,
                "holdout_accuracy": s.holdout_accuracy,
            }

    def label(self, session_id: str, body: dict) -> dict:
        box = self._box(session_id)
        for key in ("segment_id", "label"):
            if key not in body:
                raise ParseError(f"label body missing {key!r}")
        with box.lock:
            s = box.session
            active.submit_label(s, int(body["segment_id"]), str(body["label"]))
            return {
                "queries_made": s.queries_made,
                "budget": s.budget,
                "holdout_accuracy": s.holdout_accuracy,
                "labeled": len(s.labeled),
            }

    def finish(self, session_id: str) -> dict:
        box = self._box(session_id)
        with box.lock:
            s = box.session
            out_dir = Path(self.config.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            model_path = out_dir / f"{session_id}-model.txt"
            labeled_path = out_dir / f"{session_id}-labeled.jsonl"
            curve_path = out_dir / f"{session_id}-curve.csv"
            save_model(s.model, model_path)
            active.write_labeled_set(s, labeled_path, source="human")
            active.write_curve(s.curve, curve_path)
            return {
                "model_path": str(model_path),
                "labeled_path": str(labeled_path),
                "curve_path": str(curve_path),
            }


def make_handler(service: AnnotationService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, obj: dict) -> None:
            payload = json.dumps(obj, sort_keys=True).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length) if length else b"{}"
            try:
                obj = json.loads(raw or b"{}")
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON body: {exc}") from exc
            if not isinstance(obj, dict):
                raise ParseError("body must be a JSON object")
            return obj

        def _dispatch(self, method: str) -> None:
            try:
                parts = [p for p in self.path.split("?")[0].split("/") if p]
                if method == "GET" and parts == ["healthz"]:
                    self._send(200, {"status": "ok"})
                elif method == "GET" and parts[:1] == ["ui"]:
                    self._serve_static(parts[1:])
                elif method == "POST" and parts == ["sessions"]:
                    self._send(200, service.create_session(self._body()))
                elif (
                    method == "GET"
                    and len(parts) == 3
                    and parts[0] == "sessions"
                    and parts[2] == "query"
                ):
                    self._send(200, service.query(parts[1]))
                elif (
                    method == "POST"
                    and len(parts) == 3
                    and parts[0] == "sessions"
                    and parts[2] == "labels"
                ):
                    self._send(200, service.label(parts[1], self._body()))
                elif (
                    method == "POST"
                    and len(parts) == 3
                    and parts[0] == "sessions"
                    and parts[2] == "finish"
                ):
                    self._send(200, service.finish(parts[1]))
                else:
                    self._send(404, {"error": "NotFound", "message": self.path})
            except DomainError as exc:
                self._send(
                    _STATUS.get(type(exc), 400),
                    {"error": exc.name, "message": str(exc)},
                )
            except Exception as exc:  # I/O faults only; domain errors handled above
                self._send(500, {"error": "Internal", "message": str(exc)})

        def _serve_static(self, parts: list[str]) -> None:
            ui_dir = service.config.ui_dir
            if not ui_dir:
                self._send(404, {"error": "NotFound", "message": "no UI configured"})
                return
            rel = "/".join(parts) or "index.html"
            target = (Path(ui_dir) / rel).resolve()
            if not str(target).startswith(str(Path(ui_dir).resolve())) or not target.is_file():
                self._send(404, {"error": "NotFound", "message": rel})
                return
            payload = target.read_bytes()
            self.send_response(200)
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def do_GET(self):
            self._dispatch("GET")

        def do_POST(self):
            self._dispatch("POST")

    return Handler


def serve_annotation(config: Config, port: int | None = None) -> ThreadingHTTPServer:
    """Bind the service; the caller drives serve_forever (the CLI does,
    tests run it on a daemon thread)."""
    service = AnnotationService(config)
    server = ThreadingHTTPServer(
        ("127.0.0.1", port if port is not None else config.resolved_port()),
        make_handler(service),
    )
    server.service = service
    return server
