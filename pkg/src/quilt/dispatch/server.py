"""TCP job server executing circuits on the statevector backend.

Connections are handled concurrently; jobs enter a FIFO queue drained by a
worker pool.  Results are immutable once written, so repeated fetches are
idempotent and job-level behavior is linearizable.  ``stop(drain=True)``
(or the ``shutdown`` op) stops accepting connections, finishes every
queued job, then closes.
"""

from __future__ import annotations

import socketserver
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .. import qasm, simsv
from .protocol import ProtocolError, decode_line, encode_line, observable_from_json


@dataclass
class _Job:
    job_id: str
    status: str = "queued"
    result: dict | None = None
    error: str | None = None
    done_event: threading.Event = field(default_factory=threading.Event)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        server: DispatchServer = self.server.dispatch  # type: ignore[attr-defined]
        while True:
            try:
                line = self.rfile.readline()
            except (ConnectionError, OSError):
                return
            if not line:
                return
            if not line.strip():
                continue
            try:
                reply = server.handle_request_line(line)
            except Exception as exc:  # never let a request kill the connection
                reply = {"ok": False, "error": f"internal error: {exc}"}
            try:
                self.wfile.write(encode_line(reply))
                self.wfile.flush()
            except (ConnectionError, OSError):
                return


class _TcpServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class DispatchServer:
    """Quantum-resource server bound to ``host:port`` (port 0 picks one)."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0, workers: int = 2):
        if workers < 1:
            raise ValueError("need at least one worker")
        try:
            self._tcp = _TcpServer((host, port), _Handler)
        except OSError as exc:
            raise OSError(f"cannot bind {host}:{port}: {exc}")
        self._tcp.dispatch = self  # type: ignore[attr-defined]
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._jobs: dict[str, _Job] = {}
        self._lock = threading.Lock()
        self._counter = 0
        self._accepting = True
        self._serve_thread: threading.Thread | None = None
        self._stopped = threading.Event()

    # -- lifecycle ----------------------------------------------------------

    @property
    def address(self) -> tuple[str, int]:
        return self._tcp.server_address[:2]

    def start(self) -> "DispatchServer":
        self._serve_thread = threading.Thread(
            target=self._tcp.serve_forever, name="quilt-dispatch", daemon=True
        )
        self._serve_thread.start()
        return self

    def stop(self, drain: bool = True) -> None:
        if self._stopped.is_set():
            return
        self._accepting = False
        self._pool.shutdown(wait=drain)
        self._tcp.shutdown()
        if self._serve_thread is not None:
            self._serve_thread.join(timeout=5)
        self._tcp.server_close()
        self._stopped.set()

    def wait_until_stopped(self, timeout: float | None = None) -> bool:
        return self._stopped.wait(timeout)

    def __enter__(self) -> "DispatchServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop(drain=True)

    # -- request handling -----------------------------------------------------

    def handle_request_line(self, line: bytes) -> dict:
        try:
            request = decode_line(line)
        except ProtocolError as exc:
            return {"ok": False, "error": str(exc)}
        op = request.get("op")
        if op == "submit":
            return self._op_submit(request)
        if op == "poll":
            return self._op_poll(request)
        if op == "fetch":
            return self._op_fetch(request)
        if op == "shutdown":
            threading.Thread(target=self.stop, kwargs={"drain": True}, daemon=True).start()
            return {"ok": True}
        return {"ok": False, "error": f"unknown op {op!r}"}

    def _op_submit(self, request: dict) -> dict:
        circuit = request.get("circuit")
        observable = request.get("observable")
        mode = request.get("mode", {"kind": "exact"})
        if not isinstance(circuit, str):
            return {"ok": False, "error": "submit needs a 'circuit' text field"}
        if observable is None:
            return {"ok": False, "error": "submit needs an 'observable' field"}
        if not isinstance(mode, dict) or mode.get("kind") not in ("exact", "shots"):
            return {"ok": False, "error": "mode must be exact or shots"}
        if mode.get("kind") == "shots":
            count = mode.get("count")
            if not isinstance(count, int) or count < 1:
                return {"ok": False, "error": "shots mode needs a positive count"}
        if not self._accepting:
            return {"ok": False, "error": "server is shutting down"}
        with self._lock:
            self._counter += 1
            job = _Job(f"job-{self._counter}")
            self._jobs[job.job_id] = job
        try:
            self._pool.submit(self._run_job, job, circuit, observable, mode)
        except RuntimeError:  # pool already draining: the job is not lost
            job.status = "failed"
            job.error = "server is shutting down"
            job.done_event.set()
            return {"ok": False, "error": job.error}
        return {"ok": True, "job_id": job.job_id}

    def _run_job(self, job: _Job, circuit_text: str, observable, mode: dict) -> None:
        job.status = "running"
        try:
            circuit = qasm.parse(circuit_text)
            psum = observable_from_json(observable)
            if psum.num_qubits is not None and psum.num_qubits != circuit.n_qubits:
                raise ProtocolError(
                    f"observable width {psum.num_qubits} does not match circuit "
                    f"width {circuit.n_qubits}"
                )
            state = simsv.simulate(circuit)
            if mode["kind"] == "exact":
                job.result = {"value": simsv.expectation(state, psum)}
            else:
                counts = simsv.sample(state, int(mode["count"]), mode.get("seed"))
                job.result = {"counts": counts}
            job.status = "done"
        except Exception as exc:
            job.error = str(exc)
            job.status = "failed"
        finally:
            job.done_event.set()

    def _find_job(self, request: dict) -> _Job | None:
        job_id = request.get("job_id")
        with self._lock:
            return self._jobs.get(job_id)

    def _op_poll(self, request: dict) -> dict:
        job = self._find_job(request)
        if job is None:
            return {"ok": False, "error": "unknown job"}
        reply = {"ok": True, "status": job.status}
        if job.error is not None:
            reply["error"] = job.error
        return reply

    def _op_fetch(self, request: dict) -> dict:
        job = self._find_job(request)
        if job is None:
            return {"ok": False, "error": "unknown job"}
        if job.status == "failed":
            return {"ok": False, "error": job.error or "job failed"}
        if job.status != "done":
            return {"ok": False, "error": "job not done"}
        return {"ok": True, "result": job.result}


def serve(host: str = "127.0.0.1", port: int = 0, workers: int = 2) -> DispatchServer:
    """Start a dispatch server; returns the running server object."""
    return DispatchServer(host, port, workers=workers).start()
