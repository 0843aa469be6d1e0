"""HTTP/1.1 JSON inference service over a frozen model checkpoint.

All request and response bodies are UTF-8 JSON; images travel as flat
row-major arrays (shape metadata comes from GET /model/info). The model is
a read-only snapshot shared across request threads, so concurrent
identical requests return identical bodies.

Error contract: structurally bad requests (unparseable JSON, missing or
mistyped fields) get 400 with the offending field named; semantically bad
values (dimension mismatches, class indices out of range, too few steps)
get 422; unknown routes get 404.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .latent import class_intensity, transfer_path
from .mixture import classify, log_posterior, sample_component
from .training import ModelState


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class ServeState:
    """Immutable model plus bookkeeping shared by request threads."""

    model: ModelState
    cached_encodings: np.ndarray | None = None
    request_count: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def bump(self) -> int:
        with self._lock:
            self.request_count += 1
            return self.request_count


def _field(body: dict, name: str):
    if name not in body:
        raise ApiError(400, f"missing field {name}")
    return body[name]


def _int_field(body: dict, name: str, default=None, minimum=None):
    if name not in body:
        if default is None:
            raise ApiError(400, f"missing field {name}")
        return default
    value = body[name]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ApiError(400, f"field {name} must be an integer")
    if minimum is not None and value < minimum:
        raise ApiError(422, f"field {name} must be >= {minimum}")
    return value


def _number_field(body: dict, name: str, minimum=None):
    value = _field(body, name)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ApiError(400, f"field {name} must be a number")
    if minimum is not None and value < minimum:
        raise ApiError(422, f"field {name} must be >= {minimum}")
    return float(value)


def _vector_field(body: dict, name: str, dim: int) -> np.ndarray:
    value = _field(body, name)
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ApiError(400, f"field {name} must be a numeric array")
    if len(value) != dim:
        raise ApiError(422, f"field {name} has dimension {len(value)}, model expects {dim}")
    return np.asarray(value, dtype=np.float64)


def _class_field(body: dict, name: str, k: int, required=True):
    if name not in body or body[name] is None:
        if required:
            raise ApiError(400, f"missing field {name}")
        return None
    value = body[name]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ApiError(400, f"field {name} must be an integer class index")
    if not 1 <= value <= k:
        raise ApiError(422, f"field {name}={value} out of range 1..{k}")
    return value


def _posterior(model: ModelState, z: np.ndarray) -> list:
    return np.exp(log_posterior(z, model.prior)).tolist()


def handle_request(state: ServeState, method: str, path: str, body: dict | None):
    """Route one request; returns (status, response dict)."""
    model = state.model
    k = model.n_classes
    input_dim = model.encoder.in_dim
    latent_dim = model.prior.dim
    state.bump()

    if method == "GET" and path == "/model/info":
        return 200, {
            "latent_dim": latent_dim,
            "classes": list(range(1, k + 1)),
            "means": model.prior.means.tolist(),
            "masses": model.prior.masses.tolist(),
            "input_shape": list(model.input_shape),
        }

    if method != "POST":
        raise ApiError(404, f"no route for {method} {path}")
    if body is None:
        raise ApiError(400, "request body must be a JSON object")

    if path == "/encode":
        x = _vector_field(body, "x", input_dim)
        z = model.encode(x)[0]
        return 200, {
            "z": z.tolist(),
            "posterior": _posterior(model, z),
            "class": int(classify(z, model.prior)),
        }

    if path == "/decode":
        z = _vector_field(body, "z", latent_dim)
        return 200, {"x": model.decode(z)[0].tolist()}

    if path == "/sample":
        cls = _class_field(body, "class", k)
        n = _int_field(body, "n", minimum=0)
        seed = _int_field(body, "seed", default=0)
        codes = sample_component(model.prior, cls, n, np.random.default_rng(seed))
        xs = model.decode(codes).tolist() if n else []
        return 200, {"xs": xs}

    if path == "/interpolate":
        z1 = _vector_field(body, "z1", latent_dim)
        z2 = _vector_field(body, "z2", latent_dim)
        steps = _int_field(body, "steps", minimum=2)
        ts = np.linspace(0.0, 1.0, steps)
        path_codes = np.stack([(1 - t) * z1 + t * z2 for t in ts])
        return 200, {"path": model.decode(path_codes).tolist()}

    if path == "/transfer":
        z = _vector_field(body, "z", latent_dim)
        source = _class_field(body, "source", k, required=False)
        target = _class_field(body, "target", k)
        steps = _int_field(body, "steps", minimum=2)
        codes = transfer_path(z, source, target, model.prior, steps)
        stacked = np.stack([c.z for c in codes])
        return 200, {
            "path": model.decode(stacked).tolist(),
            "posteriors": [_posterior(model, c.z) for c in codes],
        }

    if path == "/intensity":
        z = _vector_field(body, "z", latent_dim)
        source = _class_field(body, "source", k)
        anti = _class_field(body, "anti_target", k)
        alpha = _number_field(body, "alpha", minimum=0.0)
        shifted = class_intensity(z, source, anti, alpha, model.prior)
        return 200, {
            "x": model.decode(shifted.z)[0].tolist(),
            "posterior": _posterior(model, shifted.z),
        }

    raise ApiError(404, f"no route for {method} {path}")


def make_server(model: ModelState, host: str = "127.0.0.1", port: int = 8765) -> ThreadingHTTPServer:
    """Build (but do not start) the threaded HTTP server."""
    state = ServeState(model=model)

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def _respond(self, status: int, payload: dict):
            raw = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(raw)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(raw)

        def _handle(self, method: str):
            body = None
            if method == "POST":
                length = int(self.headers.get("Content-Length") or 0)
                raw = self.rfile.read(length) if length else b""
                try:
                    body = json.loads(raw.decode("utf-8")) if raw else None
                except (json.JSONDecodeError, UnicodeDecodeError):
                    self._respond(400, {"error": "request body is not valid JSON"})
                    return
                if body is not None and not isinstance(body, dict):
                    self._respond(400, {"error": "request body must be a JSON object"})
                    return
            try:
                status, payload = handle_request(state, method, self.path, body)
            except ApiError as exc:
                status, payload = exc.status, {"error": str(exc)}
            except ValueError as exc:
                status, payload = 422, {"error": str(exc)}
            self._respond(status, payload)

        def do_GET(self):
            self._handle("GET")

        def do_POST(self):
            self._handle("POST")

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def log_message(self, fmt, *args):
            if os.environ.get("SEGMA_HTTP_LOG"):
                super().log_message(fmt, *args)

    server = ThreadingHTTPServer((host, port), Handler)
    server.segma_state = state
    return server


def serve(model: ModelState, host: str = "127.0.0.1", port: int = 8765) -> None:
    """Blocking entry point used by the command line."""
    server = make_server(model, host, port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
