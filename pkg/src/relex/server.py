"""HTTP server for the screening workflow.

Serves the JSON API consumed by the review frontend plus the frontend's
static assets when a build directory is supplied. All mutating routes are
serialized under one lock; a second decision for the same pattern gets a
409 rather than silently losing data.
"""

from __future__ import annotations

import json
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import unquote

from .errors import DecisionConflictError, ScreeningError
from .schema import Template, save_template_set
from .screening import ScreeningSession

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>pattern screening</title></head>
<body><h1>Pattern screening API</h1>
<p>No UI build found. The JSON API is live under <code>/api/</code>;
point a review frontend at this server or rebuild the frontend bundle.</p>
</body></html>
"""


class ScreeningService:
    """Session registry plus finalize bookkeeping, shared by all handlers."""

    def __init__(
        self,
        sessions: dict[str, ScreeningSession],
        generals: dict[str, Template],
        templates_dir,
        ui_dir=None,
    ):
        self.sessions = sessions
        self.generals = generals
        self.templates_dir = Path(templates_dir)
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self.finalized: dict[str, dict] = {}
        self.lock = threading.Lock()
        self.done_event = threading.Event()

    def relation_rows(self) -> list[dict]:
        rows = []
        for rid, session in self.sessions.items():
            progress = session.progress()
            rows.append(
                {
                    "id": rid,
                    "decided": progress["decided"],
                    "total": progress["total"],
                    "accepted": progress["accepted"],
                    "finalized": rid in self.finalized,
                }
            )
        return rows

    def template_view(self, relation: str) -> dict:
        if relation in self.finalized:
            return self.finalized[relation]
        session = self.sessions[relation]
        return {
            "relation": relation,
            "general": self.generals[relation].text,
            "mined": [p.text() for p in session.accepted_patterns()],
            "finalized": False,
        }

    def finalize(self, relation: str) -> dict:
        session = self.sessions[relation]
        session.close()
        ts = session.finalize(self.generals[relation])
        self.templates_dir.mkdir(parents=True, exist_ok=True)
        save_template_set(ts, self.templates_dir / template_filename(relation))
        view = {
            "relation": relation,
            "general": ts.general().text,
            "mined": [t.text for t in ts.mined()],
            "finalized": True,
        }
        self.finalized[relation] = view
        if all(r in self.finalized for r in self.sessions):
            self.done_event.set()
        return view


def template_filename(relation_id: str) -> str:
    # Relation ids may contain path separators (e.g. freebase-style ids).
    safe = relation_id.replace("/", "_").replace("\\", "_").strip("_")
    return f"{safe or 'relation'}.json"


class _Handler(BaseHTTPRequestHandler):
    service: ScreeningService  # set by make_server

    def log_message(self, *args):  # tests and CLI runs stay quiet
        pass

    def _send_json(self, payload: dict, status: int = 200):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _send_error(self, status: int, message: str):
        self._send_json({"error": message}, status)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise ValueError("empty request body")
        return json.loads(raw)

    def _session(self, relation: str) -> ScreeningSession:
        try:
            return self.service.sessions[relation]
        except KeyError:
            raise KeyError(relation) from None

    def do_OPTIONS(self):
        self._send_json({}, HTTPStatus.NO_CONTENT)

    def do_GET(self):
        parts = [unquote(p) for p in self.path.split("?")[0].split("/") if p]
        try:
            if parts == ["api", "relations"]:
                self._send_json({"relations": self.service.relation_rows()})
            elif len(parts) == 4 and parts[:2] == ["api", "screening"] and parts[3] == "next":
                session = self._session(parts[2])
                with self.service.lock:
                    candidate = session.next()
                if candidate is None:
                    self._send_json(
                        {"done": True, "progress": session.progress()}
                    )
                else:
                    self._send_json(
                        {
                            "done": False,
                            "progress": session.progress(),
                            **candidate.to_payload(),
                        }
                    )
            elif len(parts) == 3 and parts[:2] == ["api", "templates"]:
                self._session(parts[2])
                self._send_json(self.service.template_view(parts[2]))
            else:
                self._serve_static(parts)
        except KeyError as e:
            self._send_error(404, f"unknown relation {e.args[0]!r}")

    def do_POST(self):
        parts = [unquote(p) for p in self.path.split("?")[0].split("/") if p]
        try:
            if len(parts) == 4 and parts[:2] == ["api", "screening"] and parts[3] == "decision":
                session = self._session(parts[2])
                body = self._read_body()
                pattern, decision = body["pattern"], body["decision"]
                with self.service.lock:
                    session.decide(pattern, decision)
                self._send_json({"ok": True, "progress": session.progress()})
            elif len(parts) == 4 and parts[:2] == ["api", "templates"] and parts[3] == "finalize":
                self._session(parts[2])
                with self.service.lock:
                    view = self.service.finalize(parts[2])
                self._send_json(view)
            else:
                self._send_error(404, "no such route")
        except KeyError as e:
            self._send_error(404, f"unknown relation or field {e.args[0]!r}")
        except DecisionConflictError as e:
            self._send_error(409, str(e))
        except ScreeningError as e:
            self._send_error(400, str(e))
        except (ValueError, json.JSONDecodeError) as e:
            self._send_error(400, f"bad request body: {e}")

    def _serve_static(self, parts: list[str]):
        ui_dir = self.service.ui_dir
        rel = "/".join(parts) or "index.html"
        if ui_dir is not None:
            target = (ui_dir / rel).resolve()
            if target.is_dir():
                target = target / "index.html"
            if str(target).startswith(str(ui_dir.resolve())) and target.is_file():
                body = target.read_bytes()
                ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
                self.send_response(200)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
                return
        if rel == "index.html":
            body = _PLACEHOLDER_PAGE.encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "text/html; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
        else:
            self._send_error(404, "not found")


def make_server(
    service: ScreeningService, host: str = "127.0.0.1", port: int = 0
) -> ThreadingHTTPServer:
    """Bind a threading HTTP server; port 0 picks a free port."""
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)
