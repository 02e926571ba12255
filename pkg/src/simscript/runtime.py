"""Worker contexts, broadcast evaluation, and plot series buffers.

Workers are in-process execution contexts, one interpreter each, driven by
a deterministic rank-0 coordinator.  They share no mutable state: every
piece of inter-worker data travels as a serialized message through a
worker's inbox, so a real distributed transport could replace the
scheduler without changing the contract.  The user script runs on rank 0;
`broadcast_eval` runs a script on every rank and blocks until all finish.
"""

from __future__ import annotations

import json
import struct
import threading
from collections import deque
from typing import Any, Callable

from .errors import FrameworkError, InvalidWorkerCount, UnknownSeries, WorkerError


class SeriesStore:
    """Named append-only (x, y) buffers; safe for cross-thread reads."""

    def __init__(self) -> None:
        self._series: dict[str, list[tuple[float, float]]] = {}
        self._lock = threading.Lock()

    def append(self, name: str, x: float, y: float) -> None:
        with self._lock:
            self._series.setdefault(name, []).append((float(x), float(y)))

    def read(self, name: str, since: int = 0) -> list[tuple[float, float]]:
        with self._lock:
            if name not in self._series:
                raise UnknownSeries(f"no series named {name!r}")
            return self._series[name][since:]

    def length(self, name: str) -> int:
        with self._lock:
            return len(self._series.get(name, ()))

    def names(self) -> list[str]:
        with self._lock:
            return list(self._series)


# --- message envelope -------------------------------------------------------

def pack_message(kind: str, body: bytes = b"") -> bytes:
    k = kind.encode("utf-8")
    return struct.pack("<I", len(k)) + k + body


def unpack_message(message: bytes) -> tuple[str, bytes]:
    (klen,) = struct.unpack_from("<I", message, 0)
    return message[4:4 + klen].decode("utf-8"), message[4 + klen:]


def _json_body(obj: Any) -> bytes:
    return json.dumps(obj).encode("utf-8")


class WorkerContext:
    """One rank: an interpreter environment plus message queues."""

    def __init__(self, rank: int, env: Any):
        self.rank = rank
        self.env = env
        self.shard: Any | None = None  # set by graph distribution
        self.inbox: deque[bytes] = deque()
        self.outbox: deque[bytes] = deque()
        self.handlers: dict[str, Callable[[bytes], bytes]] = {
            "eval": self._handle_eval,
            "invoke": self._handle_invoke,
        }

    def deliver(self, message: bytes) -> None:
        self.inbox.append(message)

    def process_inbox(self) -> list[bytes]:
        """Handle every queued message; replies appear in the outbox."""
        replies = []
        while self.inbox:
            kind, body = unpack_message(self.inbox.popleft())
            handler = self.handlers.get(kind)
            if handler is None:
                raise FrameworkError(f"rank {self.rank}: unknown message kind {kind!r}")
            reply = handler(body)
            self.outbox.append(reply)
            replies.append(reply)
        return replies

    def _guarded(self, fn: Callable[[], str]) -> bytes:
        from .script import ScriptExit
        self.env.in_broadcast = True
        try:
            return pack_message("ok", _json_body({"result": fn()}))
        except ScriptExit:
            return pack_message("err", _json_body(
                {"kind": "ScriptError", "message": "exit is not allowed inside parallel"}))
        except FrameworkError as exc:
            return pack_message("err", _json_body(
                {"kind": exc.kind, "message": str(exc)}))
        finally:
            self.env.in_broadcast = False

    def _handle_eval(self, body: bytes) -> bytes:
        from .script import eval_script
        payload = json.loads(body)
        return self._guarded(lambda: eval_script(payload["script"], self.env))

    def _handle_invoke(self, body: bytes) -> bytes:
        from .script import dispatch_object_command
        payload = json.loads(body)
        return self._guarded(
            lambda: dispatch_object_command(self.env, payload["path"], payload["args"]))


class Runtime:
    """Rank-ordered worker set with blocking, rank-0-coordinated collectives."""

    def __init__(self, workers: list[WorkerContext]):
        self.workers = workers

    @property
    def n_workers(self) -> int:
        return len(self.workers)

    def broadcast_eval(self, script: str) -> list[str]:
        """Evaluate a script on every rank; per-rank results in rank order."""
        return self._broadcast("eval", _json_body({"script": script}))

    def broadcast_invoke(self, path: str, args: list[str]) -> list[str]:
        """Invoke a registered method on every rank (parallel-declared dispatch)."""
        return self._broadcast("invoke", _json_body({"path": path, "args": args}))

    def _broadcast(self, kind: str, body: bytes) -> list[str]:
        for w in self.workers:
            w.deliver(pack_message(kind, body))
        results: list[str] = []
        failures: list[tuple[int, str]] = []
        for w in self.workers:
            for reply in w.process_inbox():
                status, payload = unpack_message(reply)
                data = json.loads(payload)
                if status == "ok":
                    results.append(data["result"])
                else:
                    failures.append((w.rank, f"{data['kind']}: {data['message']}"))
        if failures:
            raise WorkerError(failures)
        return results

    def send(self, rank: int, message: bytes) -> list[bytes]:
        """Deliver one message and run the target's inbox to completion."""
        w = self.workers[rank]
        w.deliver(message)
        return w.process_inbox()


def spawn_workers(n: int, setup: Callable[[int], Any] | None = None) -> Runtime:
    """Create ranks 0..n-1; `setup(rank)` supplies each rank's environment."""
    if n < 1:
        raise InvalidWorkerCount(f"need at least one worker, got {n}")
    if setup is None:
        from .script import Environment
        setup = lambda rank: Environment()
    workers = [WorkerContext(rank, setup(rank)) for rank in range(n)]
    runtime = Runtime(workers)
    workers[0].env.runtime = runtime
    return runtime
