"""Local HTTP control endpoint: object browser, eval, series, watches.

Routes (JSON request/response bodies; field names are part of the contract):

    GET  /api/objects                 top-level browse entries
    GET  /api/object/{path}           member entries of a compound
    GET  /api/value/{path}            {"value": text}
    POST /api/invoke                  {"path","args":[...]} -> {"result": text}
    POST /api/eval                    {"script"} -> {"result","output"}
    GET  /api/series/{name}?since=i   {"points":[[x,y],...], "next": i}
    GET  /api/watch/{path}?interval_ms=1000   newline-delimited JSON stream

Model-touching requests never run on connection threads: they are queued
and executed by the interpreter loop between steps, and the response is
sent once that execution completes (invoke/eval responses carry the tstep
at which they ran).  Series reads come from the thread-safe store directly.
The server binds localhost by default and also serves the web UI's static
files when a directory is configured.
"""

from __future__ import annotations

import io
import json
import mimetypes
import queue
import threading
import time
from dataclasses import dataclass
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Callable
from urllib.parse import parse_qs, unquote, urlparse

from .descriptor import FieldNode, MethodNode, Registry
from .errors import (
    FrameworkError,
    MethodPanicked,
    PathNotFound,
    UnknownSeries,
    UnregisteredRoot,
)
from .script import Environment, ScriptExit, dispatch_object_command, eval_script

_NOT_FOUND_KINDS = (PathNotFound, UnknownSeries, UnregisteredRoot)


@dataclass
class _Job:
    fn: Callable[[], Any]
    done: threading.Event
    result: Any = None
    error: BaseException | None = None


class ServiceClosed(FrameworkError):
    pass


class StepQueue:
    """Funnel for model access: submitted anywhere, drained between steps."""

    def __init__(self) -> None:
        self._jobs: "queue.Queue[_Job]" = queue.Queue()
        self._closed = False

    def submit(self, fn: Callable[[], Any], timeout: float = 30.0) -> Any:
        if self._closed:
            raise ServiceClosed("interpreter queue is closed")
        job = _Job(fn, threading.Event())
        self._jobs.put(job)
        if not job.done.wait(timeout):
            raise TimeoutError("interpreter did not drain the request queue")
        if job.error is not None:
            raise job.error
        return job.result

    def drain(self) -> None:
        """Run every pending job; called from the interpreter thread."""
        while True:
            try:
                job = self._jobs.get_nowait()
            except queue.Empty:
                return
            try:
                job.result = job.fn()
            except BaseException as exc:
                job.error = exc
            finally:
                job.done.set()

    def close(self) -> None:
        self._closed = True
        while True:
            try:
                job = self._jobs.get_nowait()
            except queue.Empty:
                return
            job.error = ServiceClosed("service shut down")
            job.done.set()


class ControlService:
    """Wires the HTTP handler to a registry, interpreter env, and queue."""

    def __init__(self, registry: Registry, env: Environment,
                 queue_: StepQueue | None = None,
                 tstep_source: Callable[[], int] | None = None,
                 static_dir: Path | str | None = None):
        self.registry = registry
        self.env = env
        self.queue = queue_ if queue_ is not None else StepQueue()
        self.tstep_source = tstep_source
        self.static_dir = Path(static_dir) if static_dir else None
        self.env.service_queue = self.queue
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    def start(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        server = _Server((host, port), _Handler)
        server.service = self
        self._server = server
        self._thread = threading.Thread(target=server.serve_forever, daemon=True)
        self._thread.start()
        return server.server_address[0], server.server_address[1]

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None
        self.queue.close()

    @property
    def address(self) -> tuple[str, int]:
        assert self._server is not None
        return self._server.server_address[:2]

    # -- model access (all through the step queue) -------------------------

    def _tstep(self) -> int | None:
        try:
            return self.tstep_source() if self.tstep_source is not None else None
        except Exception:
            return None

    def list_objects(self) -> list[dict]:
        return self.queue.submit(lambda: [_entry_json(e) for e in self.registry.enumerate()])

    def list_members(self, path: str) -> list[dict]:
        return self.queue.submit(
            lambda: [_entry_json(e) for e in self.registry.enumerate(path)])

    def get_value(self, path: str) -> dict:
        return self.queue.submit(lambda: {"value": self.registry.get_value(path)})

    def invoke(self, path: str, args: list[str]) -> dict:
        def job() -> dict:
            result = dispatch_object_command(self.env, path, [str(a) for a in args])
            return {"result": result, "tstep": self._tstep()}
        return self.queue.submit(job)

    def eval(self, script: str) -> dict:
        def job() -> dict:
            captured = io.StringIO()
            previous = self.env.output
            self.env.output = captured
            try:
                result = eval_script(script, self.env)
            finally:
                self.env.output = previous
            return {"result": result, "output": captured.getvalue(),
                    "tstep": self._tstep()}
        return self.queue.submit(job)

    def watch_probe(self, path: str) -> Callable[[], str]:
        """Validate a watchable path; returns a queue-routed reader."""
        def classify() -> str:
            node = self.registry.resolve(path)
            if isinstance(node, FieldNode) and node.is_scalar():
                return "field"
            if (isinstance(node, MethodNode) and node.descriptor.arity == 0
                    and node.descriptor.returns_value):
                return "method"
            raise _NotWatchable(f"{path} is not a scalar field or value method")

        kind = self.queue.submit(classify)
        if kind == "field":
            return lambda: self.queue.submit(lambda: self.registry.get_value(path))
        return lambda: self.queue.submit(lambda: self.registry.invoke(path, []) or "")


class _NotWatchable(FrameworkError):
    pass


def _entry_json(entry: Any) -> dict:
    return {"name": entry.name, "path": entry.path, "kind": entry.kind,
            "preview": entry.preview, "arity": entry.arity}


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    service: ControlService


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    @property
    def service(self) -> ControlService:
        return self.server.service  # type: ignore[attr-defined]

    def log_message(self, fmt: str, *args: Any) -> None:
        pass  # local tool; keep stdout for the model's own output

    # -- plumbing ---------------------------------------------------------

    def _send_json(self, status: int, payload: Any) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, exc: BaseException) -> None:
        if isinstance(exc, _NotWatchable):
            self._send_json(400, {"error": "NotWatchable", "message": str(exc)})
        elif isinstance(exc, MethodPanicked):
            self._send_json(500, {"error": exc.kind, "message": str(exc)})
        elif isinstance(exc, _NOT_FOUND_KINDS):
            self._send_json(404, {"error": exc.kind, "message": str(exc)})
        elif isinstance(exc, (FrameworkError, ScriptExit)):
            kind = exc.kind if isinstance(exc, FrameworkError) else "ScriptExit"
            self._send_json(400, {"error": kind, "message": str(exc)})
        else:
            self._send_json(500, {"error": "InternalError", "message": str(exc)})

    def _read_body(self) -> Any:
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length) if length else b""
        try:
            return json.loads(raw) if raw else {}
        except json.JSONDecodeError as exc:
            raise _BadRequest(f"malformed JSON body: {exc}")

    # -- routing ---------------------------------------------------------

    def do_GET(self) -> None:
        parsed = urlparse(self.path)
        route = unquote(parsed.path)
        params = parse_qs(parsed.query)
        try:
            if route == "/api/objects":
                self._send_json(200, self.service.list_objects())
            elif route.startswith("/api/object/"):
                self._send_json(200, self.service.list_members(route[len("/api/object/"):]))
            elif route.startswith("/api/value/"):
                self._send_json(200, self.service.get_value(route[len("/api/value/"):]))
            elif route.startswith("/api/series/"):
                self._serve_series(route[len("/api/series/"):], params)
            elif route.startswith("/api/watch/"):
                self._serve_watch(route[len("/api/watch/"):], params)
            elif route.startswith("/api"):
                self._send_json(404, {"error": "NoSuchRoute", "message": route})
            else:
                self._serve_static(route)
        except BrokenPipeError:
            pass
        except _BadRequest as exc:
            self._send_json(400, {"error": "BadRequest", "message": str(exc)})
        except BaseException as exc:
            self._send_error_json(exc)

    def do_POST(self) -> None:
        parsed = urlparse(self.path)
        route = unquote(parsed.path)
        try:
            body = self._read_body()
            if route == "/api/invoke":
                path, args = _expect(body, "path"), body.get("args", [])
                if not isinstance(args, list):
                    raise _BadRequest("'args' must be a list")
                self._send_json(200, self.service.invoke(path, args))
            elif route == "/api/eval":
                self._send_json(200, self.service.eval(_expect(body, "script")))
            else:
                self._send_json(404, {"error": "NoSuchRoute", "message": route})
        except _BadRequest as exc:
            self._send_json(400, {"error": "BadRequest", "message": str(exc)})
        except BaseException as exc:
            self._send_error_json(exc)

    # -- route bodies -------------------------------------------------------

    def _serve_series(self, name: str, params: dict) -> None:
        since = _int_param(params, "since", 0)
        points = self.service.env.series.read(name, since)
        self._send_json(200, {"points": [[x, y] for x, y in points],
                              "next": since + len(points)})

    def _serve_watch(self, path: str, params: dict) -> None:
        interval_ms = _int_param(params, "interval_ms", 1000)
        if interval_ms <= 0:
            raise _BadRequest("interval_ms must be positive")
        reader = self.service.watch_probe(path)
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Cache-Control", "no-store")
        self.send_header("Connection", "close")
        self.end_headers()
        try:
            while True:
                event = {"t": int(time.time() * 1000), "value": reader()}
                self.wfile.write((json.dumps(event) + "\n").encode("utf-8"))
                self.wfile.flush()
                time.sleep(interval_ms / 1000.0)
        except (BrokenPipeError, ConnectionResetError, ServiceClosed):
            pass
        finally:
            self.close_connection = True

    def _serve_static(self, route: str) -> None:
        root = self.service.static_dir
        if root is None:
            self._send_json(404, {"error": "NoSuchRoute",
                                  "message": "no web UI directory configured"})
            return
        rel = "index.html" if route == "/" else route.lstrip("/")
        target = (root / rel).resolve()
        try:
            target.relative_to(root.resolve())
        except ValueError:
            self._send_json(404, {"error": "NoSuchRoute", "message": route})
            return
        if not target.is_file():
            self._send_json(404, {"error": "NoSuchRoute", "message": route})
            return
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        data = target.read_bytes()
        self.send_response(HTTPStatus.OK)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


class _BadRequest(Exception):
    pass


def _expect(body: dict, key: str) -> Any:
    if key not in body:
        raise _BadRequest(f"missing {key!r} in request body")
    return body[key]


def _int_param(params: dict, key: str, default: int) -> int:
    raw = params.get(key, [str(default)])[0]
    try:
        value = int(raw)
    except ValueError:
        raise _BadRequest(f"{key} must be an integer, got {raw!r}")
    if value < 0:
        raise _BadRequest(f"{key} must be nonnegative")
    return value
