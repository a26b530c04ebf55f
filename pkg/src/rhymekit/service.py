"""HTTP service backing the annotation interface.

Serves poem data read-only, stores annotations with optimistic
concurrency (the version token is a content hash, sent as ETag and
required back via If-Match), and serves the static UI bundle at /.
Corpus files are never mutated; annotations are the only writable
resource. If the RHYMEKIT_API_TOKEN environment variable is set, every
/api request must carry it as a bearer token.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .corpus import Corpus
from .errors import InputError, SchemaError
from .evaluation import annotation_from_dict

TOKEN_ENV = "RHYMEKIT_API_TOKEN"

_SAFE_NAME = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}

_FALLBACK_PAGE = b"""<!doctype html>
<html><head><meta charset="utf-8"><title>rhymekit</title></head>
<body><h1>rhymekit annotation service</h1>
<p>No UI bundle is installed. The JSON API is available under /api/.</p>
</body></html>
"""


class AnnotationStore:
    """File-backed annotation storage with content-hash version tokens."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, annotator: str, poem_id: str) -> Path:
        for name in (annotator, poem_id):
            if not _SAFE_NAME.match(name):
                raise SchemaError(f"unsafe path component: {name!r}")
        return self.directory / annotator / f"{poem_id}.json"

    @staticmethod
    def _version_of(payload: bytes) -> str:
        return hashlib.sha256(payload).hexdigest()[:16]

    def version(self, annotator: str, poem_id: str) -> str:
        path = self._path(annotator, poem_id)
        if not path.exists():
            return "0"
        return self._version_of(path.read_bytes())

    def read(self, annotator: str, poem_id: str) -> Optional[tuple[bytes, str]]:
        path = self._path(annotator, poem_id)
        if not path.exists():
            return None
        payload = path.read_bytes()
        return payload, self._version_of(payload)

    def write(self, annotator: str, poem_id: str, payload: bytes,
              expected_version: str) -> tuple[bool, str]:
        """Store if the expected version matches; returns (stored, version).

        On conflict, the returned version is the current one.
        """
        path = self._path(annotator, poem_id)
        with self._lock:
            current = "0"
            if path.exists():
                current = self._version_of(path.read_bytes())
            if expected_version != current:
                return False, current
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(payload)
            return True, self._version_of(payload)

    def count(self, annotator: str) -> int:
        if not _SAFE_NAME.match(annotator):
            raise SchemaError(f"unsafe path component: {annotator!r}")
        sub = self.directory / annotator
        if not sub.is_dir():
            return 0
        return sum(1 for _ in sub.glob("*.json"))


def _make_handler(corpus: Corpus, store: AnnotationStore,
                  ui_dir: Optional[Path]):
    poems_by_id = {p.id: p for p in corpus.poems}
    listing = [
        {"id": p.id, "title": p.title, "language": p.language,
         "line_count": p.line_count}
        for p in sorted(corpus.poems, key=lambda p: p.id)
    ]

    class Handler(BaseHTTPRequestHandler):
        server_version = "rhymekit"
        protocol_version = "HTTP/1.1"

        def log_message(self, format, *args):  # noqa: A002 - stdlib name
            pass  # request logging is the caller's concern

        def _send_json(self, status: int, payload, etag: Optional[str] = None):
            body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            if etag is not None:
                self.send_header("ETag", etag)
            self.end_headers()
            self.wfile.write(body)

        def _send_error_json(self, status: int, message: str):
            self._send_json(status, {"error": message})

        def _send_empty(self, status: int, etag: Optional[str] = None):
            self.send_response(status)
            if etag is not None:
                self.send_header("ETag", etag)
            self.send_header("Content-Length", "0")
            self.end_headers()

        def _authorized(self) -> bool:
            token = os.environ.get(TOKEN_ENV)
            if not token:
                return True
            return self.headers.get("Authorization") == f"Bearer {token}"

        def _api_route(self) -> Optional[list[str]]:
            path = self.path.split("?", 1)[0]
            if not path.startswith("/api/"):
                return None
            return [part for part in path[5:].split("/") if part]

        def do_GET(self):
            route = self._api_route()
            if route is None:
                self._serve_static()
                return
            if not self._authorized():
                self._send_error_json(401, "missing or invalid bearer token")
                return
            if route == ["poems"]:
                self._send_json(200, listing)
            elif len(route) == 2 and route[0] == "poems":
                poem = poems_by_id.get(route[1])
                if poem is None:
                    self._send_error_json(404, f"no poem {route[1]!r}")
                    return
                self._send_json(200, {
                    "id": poem.id, "title": poem.title,
                    "language": poem.language, "stanzas": poem.stanzas,
                })
            elif len(route) == 3 and route[0] == "annotations":
                try:
                    found = store.read(route[1], route[2])
                except InputError as exc:
                    self._send_error_json(400, str(exc))
                    return
                if found is None:
                    self._send_error_json(404, "no annotation stored")
                    return
                payload, version = found
                self.send_response(200)
                self.send_header("Content-Type",
                                 "application/json; charset=utf-8")
                self.send_header("Content-Length", str(len(payload)))
                self.send_header("ETag", version)
                self.end_headers()
                self.wfile.write(payload)
            elif len(route) == 2 and route[0] == "progress":
                try:
                    annotated = store.count(route[1])
                except InputError as exc:
                    self._send_error_json(400, str(exc))
                    return
                self._send_json(200, {"annotated": annotated,
                                      "total": len(poems_by_id)})
            else:
                self._send_error_json(404, "unknown API route")

        def do_PUT(self):
            route = self._api_route()
            if route is None or len(route) != 3 or route[0] != "annotations":
                self._send_error_json(404, "unknown API route")
                return
            if not self._authorized():
                self._send_error_json(401, "missing or invalid bearer token")
                return
            annotator, poem_id = route[1], route[2]
            poem = poems_by_id.get(poem_id)
            if poem is None:
                self._send_error_json(404, f"no poem {poem_id!r}")
                return
            expected = self.headers.get("If-Match")
            if expected is None:
                self._send_error_json(400, "If-Match header required")
                return
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length)
            try:
                data = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                self._send_error_json(400, f"body is not valid JSON: {exc}")
                return
            try:
                annotation = annotation_from_dict(data, poem.line_count)
            except InputError as exc:
                self._send_error_json(400, str(exc))
                return
            if annotation.annotator_id != annotator or annotation.poem_id != poem_id:
                self._send_error_json(
                    400, "annotator/poem_id in body do not match the URL")
                return
            canonical = json.dumps(
                {"annotator": annotation.annotator_id,
                 "poem_id": annotation.poem_id,
                 "chains": [list(c) for c in annotation.chains]},
                ensure_ascii=False, sort_keys=True, indent=1).encode("utf-8") + b"\n"
            try:
                stored, version = store.write(annotator, poem_id, canonical,
                                              expected.strip())
            except InputError as exc:
                self._send_error_json(400, str(exc))
                return
            if not stored:
                self._send_json(409, {"error": "version conflict",
                                      "current_version": version}, etag=version)
                return
            self._send_empty(204, etag=version)

        def _serve_static(self):
            path = self.path.split("?", 1)[0]
            if ui_dir is None:
                if path in ("/", "/index.html"):
                    self.send_response(200)
                    self.send_header("Content-Type", "text/html; charset=utf-8")
                    self.send_header("Content-Length", str(len(_FALLBACK_PAGE)))
                    self.end_headers()
                    self.wfile.write(_FALLBACK_PAGE)
                else:
                    self._send_error_json(404, "not found")
                return
            rel = path.lstrip("/") or "index.html"
            target = (ui_dir / rel).resolve()
            try:
                target.relative_to(ui_dir.resolve())
            except ValueError:
                self._send_error_json(404, "not found")
                return
            if target.is_dir():
                target = target / "index.html"
            if not target.is_file():
                self._send_error_json(404, "not found")
                return
            body = target.read_bytes()
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def build_server(corpus: Corpus, annotations_dir: str | Path,
                 ui_dir: Optional[str | Path] = None, host: str = "127.0.0.1",
                 port: int = 8080) -> ThreadingHTTPServer:
    """Create (without starting) the annotation HTTP server."""
    store = AnnotationStore(annotations_dir)
    ui_path = Path(ui_dir) if ui_dir is not None else None
    if ui_path is not None and not ui_path.is_dir():
        raise SchemaError(f"UI directory not found: {ui_path}")
    handler = _make_handler(corpus, store, ui_path)
    return ThreadingHTTPServer((host, port), handler)
