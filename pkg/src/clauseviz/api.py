"""Control API: JSON commands over HTTP plus a server-push frame stream.

Commands POST to /api/command and run on the session's tick thread, so
the reply always reflects a consistent cursor.  Frames are pushed as
Server-Sent Events on /api/stream at the session frame rate; geometry
(positions, edges, member counts) is included on the first message and
whenever the layout revision changes, heat and edge weights on every
message.  The full message schema is documented in docs/API.md.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .heat import HeatConfig, HeatMode, parse_palette
from .session import AlreadyRunning, OutOfRange, Session, SessionRunner

log = logging.getLogger("clauseviz.api")

STREAM_QUEUE_FRAMES = 4


def _error(code: str, message: str) -> dict:
    return {"ok": False, "error": {"code": code, "message": message}}


class ApiServer:
    """HTTP façade over a SessionRunner; one instance per session."""

    def __init__(self, runner: SessionRunner, host: str = "127.0.0.1",
                 port: int = 0):
        self.runner = runner
        self.session = runner.session
        self._clients: list = []
        self._clients_lock = threading.Lock()
        api = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                log.debug("api: " + fmt, *args)

            def _headers(self, status: int, ctype: str, length: Optional[int]):
                self.send_response(status)
                self.send_header("Content-Type", ctype)
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
                if length is not None:
                    self.send_header("Content-Length", str(length))
                self.end_headers()

            def _json(self, body: dict, status: int = 200):
                data = json.dumps(body).encode()
                self._headers(status, "application/json", len(data))
                self.wfile.write(data)

            def do_OPTIONS(self):
                self.send_response(204)
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Access-Control-Allow-Methods",
                                 "GET, POST, OPTIONS")
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
                self.end_headers()

            def do_POST(self):
                if self.path != "/api/command":
                    self._json(_error("not_found", self.path), 404)
                    return
                try:
                    length = int(self.headers.get("Content-Length", "0"))
                    payload = json.loads(self.rfile.read(length) or b"{}")
                except (ValueError, json.JSONDecodeError) as exc:
                    self._json(_error("bad_request", f"malformed JSON: {exc}"), 400)
                    return
                self._json(api.execute(payload))

            def do_GET(self):
                if self.path == "/api/state":
                    self._json({"ok": True,
                                "state": api.runner.submit(api.session.get_state)})
                elif self.path == "/api/frame":
                    frame = api.runner.submit(api.session.current_frame)
                    self._json({"ok": True, "frame": frame.to_json(True)})
                elif self.path == "/api/stream":
                    api._stream(self)
                else:
                    self._json(_error("not_found", self.path), 404)

        self._server = ThreadingHTTPServer((host, port), Handler)
        self._server.daemon_threads = True
        self.address = self._server.server_address[:2]
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="clauseviz-api", daemon=True)
        runner.frame_listeners.append(self._broadcast)

    @property
    def port(self) -> int:
        return self.address[1]

    def start(self) -> "ApiServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._thread.join(timeout=5)
        self._server.server_close()

    # -- command dispatch ----------------------------------------------------

    def execute(self, payload: dict) -> dict:
        cmd = payload.get("cmd")
        session = self.session
        try:
            if cmd == "play":
                self.runner.submit(session.play)
            elif cmd == "pause":
                self.runner.submit(session.pause)
            elif cmd == "stop":
                self.runner.submit(session.stop)
            elif cmd == "seek":
                target = int(payload["target"])
                self.runner.submit(lambda: session.seek(target))
            elif cmd == "step":
                n = int(payload["n"])
                self.runner.submit(lambda: session.step(n))
            elif cmd == "relayout":
                self.runner.submit(lambda: session.trigger_relayout(block=False))
            elif cmd == "set_heat_config":
                config = self._heat_config(payload)
                self.runner.submit(lambda: session.set_heat_config(config))
            elif cmd == "get_state":
                pass  # state echo below covers it
            elif cmd == "get_frame":
                frame = self.runner.submit(session.current_frame)
                return {"ok": True, "frame": frame.to_json(True),
                        "state": self.runner.submit(session.get_state)}
            else:
                return _error("unknown_command", f"unknown cmd {cmd!r}")
        except (KeyError, TypeError, ValueError) as exc:
            return _error("bad_request", str(exc))
        except OutOfRange as exc:
            return _error("out_of_range", str(exc))
        except AlreadyRunning as exc:
            return _error("already_running", str(exc))
        return {"ok": True, "state": self.runner.submit(session.get_state)}

    def _heat_config(self, payload: dict) -> HeatConfig:
        current = self.session.config.heat
        mode = HeatMode(payload.get("mode", current.mode.value))
        k = int(payload.get("k", current.k))
        palette = (parse_palette(payload["palette"])
                   if "palette" in payload else current.palette)
        return HeatConfig(mode=mode, k=k, palette=palette)

    # -- push stream -----------------------------------------------------

    def _broadcast(self, frame) -> None:
        notes = []
        while True:
            try:
                notes.append(self.session.notifications.get_nowait())
            except queue.Empty:
                break
        with self._clients_lock:
            clients = list(self._clients)
        for q in clients:
            for note in notes:
                self._offer(q, note)
            self._offer(q, frame)

    @staticmethod
    def _offer(q: queue.Queue, item) -> None:
        # slow consumers lose the oldest frame, never block the tick loop
        while True:
            try:
                q.put_nowait(item)
                return
            except queue.Full:
                try:
                    q.get_nowait()
                except queue.Empty:
                    pass

    def _stream(self, handler) -> None:
        q: queue.Queue = queue.Queue(maxsize=STREAM_QUEUE_FRAMES)
        with self._clients_lock:
            self._clients.append(q)
        handler.send_response(200)
        handler.send_header("Content-Type", "text/event-stream")
        handler.send_header("Cache-Control", "no-cache")
        handler.send_header("Access-Control-Allow-Origin", "*")
        handler.end_headers()
        last_rev = None
        try:
            frame = self.runner.submit(self.session.current_frame)
            self._send_event(handler, frame.to_json(include_geometry=True))
            last_rev = frame.layout_rev
            while True:
                try:
                    item = q.get(timeout=5.0)
                except queue.Empty:
                    handler.wfile.write(b": keepalive\n\n")
                    handler.wfile.flush()
                    continue
                if isinstance(item, dict):  # notification passthrough
                    self._send_event(handler, item)
                    continue
                include_geometry = item.layout_rev != last_rev
                self._send_event(handler, item.to_json(include_geometry))
                last_rev = item.layout_rev
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            with self._clients_lock:
                if q in self._clients:
                    self._clients.remove(q)

    @staticmethod
    def _send_event(handler, body: dict) -> None:
        data = json.dumps(body)
        handler.wfile.write(f"data: {data}\n\n".encode())
        handler.wfile.flush()
