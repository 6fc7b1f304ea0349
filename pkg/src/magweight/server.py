"""HTTP front door for one interactive active-learning session.

A single session lives in the process; every mutation passes through one
lock, so label batches apply atomically.  Bodies are JSON under the
versioned prefix ``/api/v1``:

    GET  /api/v1/session   session counters, accuracy history, status
    GET  /api/v1/queries   current query batch with display coordinates
    GET  /api/v1/points    whole pool with predictions and label status
    POST /api/v1/labels    {"labels": [{"index": i, "label": l}, ...]}
    POST /api/v1/control   {"action": "pause" | "resume" | "checkpoint"}

A label for an index outside the current batch, an incomplete batch, or a
submission while paused is rejected with 409 and leaves the session
untouched; malformed bodies get 400 with the offending field path.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .active import ALSession, BatchMismatch
from .errors import InvalidInput

API_PREFIX = "/api/v1"


def pca_projection(points: np.ndarray) -> np.ndarray:
    """First two principal components, with a deterministic sign convention."""
    pts = np.asarray(points, dtype=np.float64)
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[: min(2, vt.shape[0])]
    for i in range(comps.shape[0]):
        j = np.argmax(np.abs(comps[i]))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    coords = centered @ comps.T
    if coords.shape[1] == 1:  # 1-d data still renders on a line
        coords = np.column_stack([coords[:, 0], np.zeros(len(pts))])
    return coords


class SessionHub:
    """Serialized access to one ALSession plus its display projection."""

    def __init__(self, session: ALSession, checkpoint_path=None):
        self.session = session
        self.checkpoint_path = checkpoint_path
        self.lock = threading.Lock()
        self.projection = pca_projection(session.pool_points)

    def snapshot_session(self) -> dict:
        s = self.session
        return {
            "version": 1,
            "iteration": s.iteration,
            "n_labeled": int(s.labeled_mask.sum()),
            "n_unlabeled": int((~s.labeled_mask).sum()),
            "accuracy_history": list(s.history),
            "budget": s.budget,
            "budget_used": s.budget_used,
            "strategy": s.strategy,
            "classes": [int(c) for c in s.classes],
            "done": s.done,
            "paused": s.paused,
            "projection": "pca-2d",
        }

    def snapshot_queries(self) -> dict:
        s = self.session
        return {
            "queries": [
                {
                    "index": int(i),
                    "features": s.pool_points[i].tolist(),
                    "x": float(self.projection[i, 0]),
                    "y": float(self.projection[i, 1]),
                }
                for i in s.queries
            ],
            "done": s.done,
        }

    def snapshot_points(self) -> dict:
        s = self.session
        predicted = s.model.predict(s.pool_points) if s.model is not None else None
        points = []
        for i in range(s.pool_points.shape[0]):
            labeled = bool(s.labeled_mask[i])
            points.append(
                {
                    "index": i,
                    "x": float(self.projection[i, 0]),
                    "y": float(self.projection[i, 1]),
                    "predicted": int(predicted[i]) if predicted is not None else None,
                    "labeled": labeled,
                    "label": int(s.pool_labels[i]) if labeled else None,
                }
            )
        return {"points": points}

    def apply_labels(self, pairs):
        if self.session.paused:
            raise BatchMismatch("session is paused")
        self.session.apply_labels(pairs)

    def control(self, action: str) -> dict:
        if action == "pause":
            self.session.paused = True
            return {"ok": True, "paused": True}
        if action == "resume":
            self.session.paused = False
            return {"ok": True, "paused": False}
        if action == "checkpoint":
            if self.checkpoint_path is None:
                raise InvalidInput("no checkpoint path configured")
            path = Path(self.checkpoint_path)
            with open(path, "w") as fh:
                json.dump(self.session.to_checkpoint(), fh)
            return {"ok": True, "checkpoint": str(path)}
        raise InvalidInput(f"unknown action {action!r}")


class _BadBody(Exception):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


def _parse_labels_body(doc) -> list:
    if not isinstance(doc, dict):
        raise _BadBody("body must be a JSON object", field="$")
    if "labels" not in doc:
        raise _BadBody("missing field", field="$.labels")
    labels = doc["labels"]
    if not isinstance(labels, list):
        raise _BadBody("must be a list", field="$.labels")
    pairs = []
    for pos, entry in enumerate(labels):
        if not isinstance(entry, dict):
            raise _BadBody("must be an object", field=f"$.labels[{pos}]")
        for key in ("index", "label"):
            if key not in entry:
                raise _BadBody("missing field", field=f"$.labels[{pos}].{key}")
            if not isinstance(entry[key], int) or isinstance(entry[key], bool):
                raise _BadBody("must be an integer", field=f"$.labels[{pos}].{key}")
        pairs.append((entry["index"], entry["label"]))
    return pairs


class LabelRequestHandler(BaseHTTPRequestHandler):
    hub: SessionHub = None
    static_dir: Path | None = None
    protocol_version = "HTTP/1.1"

    # -- plumbing ----------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload: dict):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        try:
            return json.loads(raw.decode() or "null")
        except (UnicodeDecodeError, json.JSONDecodeError) as err:
            raise _BadBody(f"invalid JSON: {err}", field="$") from err

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    # -- routes --------------------------------------------------------------

    def do_GET(self):
        hub = self.hub
        if self.path == f"{API_PREFIX}/session":
            with hub.lock:
                return self._send_json(200, hub.snapshot_session())
        if self.path == f"{API_PREFIX}/queries":
            with hub.lock:
                return self._send_json(200, hub.snapshot_queries())
        if self.path == f"{API_PREFIX}/points":
            with hub.lock:
                return self._send_json(200, hub.snapshot_points())
        if self.static_dir is not None:
            return self._serve_static()
        self._send_json(404, {"error": f"unknown path {self.path}"})

    def do_POST(self):
        hub = self.hub
        try:
            if self.path == f"{API_PREFIX}/labels":
                pairs = _parse_labels_body(self._read_json())
                with hub.lock:
                    hub.apply_labels(pairs)
                    return self._send_json(200, hub.snapshot_session())
            if self.path == f"{API_PREFIX}/control":
                doc = self._read_json()
                if not isinstance(doc, dict) or not isinstance(doc.get("action"), str):
                    raise _BadBody("missing field", field="$.action")
                with hub.lock:
                    return self._send_json(200, hub.control(doc["action"]))
            return self._send_json(404, {"error": f"unknown path {self.path}"})
        except _BadBody as err:
            self._send_json(400, {"error": str(err), "field": err.field})
        except BatchMismatch as err:
            self._send_json(409, {"error": str(err)})
        except InvalidInput as err:
            self._send_json(400, {"error": str(err)})

    def _serve_static(self):
        rel = self.path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            return self._send_json(404, {"error": f"unknown path {self.path}"})
        body = target.read_bytes()
        types = {
            ".html": "text/html",
            ".js": "text/javascript",
            ".css": "text/css",
            ".map": "application/json",
        }
        self.send_response(200)
        self.send_header("Content-Type", types.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)


def make_server(
    session: ALSession,
    host: str = "127.0.0.1",
    port: int = 8765,
    checkpoint_path=None,
    static_dir=None,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server around one session."""
    hub = SessionHub(session, checkpoint_path=checkpoint_path)
    handler = type(
        "BoundHandler",
        (LabelRequestHandler,),
        {"hub": hub, "static_dir": Path(static_dir) if static_dir else None},
    )
    server = ThreadingHTTPServer((host, port), handler)
    server.hub = hub
    return server


def serve_forever(server: ThreadingHTTPServer):
    host, port = server.server_address[:2]
    print(f"serving interactive session on http://{host}:{port}{API_PREFIX}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
