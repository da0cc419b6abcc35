"""Binary clause-event protocol between producer and consumer over TCP.

Message layout: one tag byte, then a kind-dependent payload.

    0x01 AddClause     varint literals, terminated by a single 0x00 byte
    0x02 DeleteClause  same payload as AddClause
    0x03 Terminate     no payload
    0x04 Hello         varint protocol version, varint num_variables hint

A literal l maps to the unsigned value u = 2*|l| + (1 if l < 0 else 0),
encoded LEB128-style (7 data bits per byte, high bit = continuation);
u = 0 is reserved as the clause terminator.
"""

from __future__ import annotations

import enum
import logging
import shlex
import socket
import subprocess
import threading
import time
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

from .formats import RawEvent, parse_drat
from .model import EventKind

log = logging.getLogger("clauseviz.wire")

TAG_ADD = 0x01
TAG_DELETE = 0x02
TAG_TERMINATE = 0x03
TAG_HELLO = 0x04

PROTOCOL_VERSION = 1
DEFAULT_MAX_CLAUSE = 10**6


class WireError(Exception):
    """Base class for protocol framing and transport failures."""


class UnknownTag(WireError):
    pass


class TruncatedVarint(WireError):
    pass


class OversizedClause(WireError):
    pass


class ProtocolError(WireError):
    pass


class BindFailure(WireError):
    pass


class ConnectionRefused(WireError):
    pass


class ConnectionLost(WireError):
    def __init__(self, message: str, last_sequence: int):
        super().__init__(f"{message} (last sent event index: {last_sequence})")
        self.last_sequence = last_sequence


class MessageKind(enum.Enum):
    ADD = TAG_ADD
    DELETE = TAG_DELETE
    TERMINATE = TAG_TERMINATE
    HELLO = TAG_HELLO


@dataclass(frozen=True)
class WireMessage:
    kind: MessageKind
    literals: Optional[Tuple[int, ...]] = None  # ADD / DELETE
    version: int = PROTOCOL_VERSION             # HELLO
    num_variables: int = 0                      # HELLO hint, 0 = unknown


def encode_varint(value: int) -> bytes:
    if value < 0:
        raise ValueError("varint value must be nonnegative")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def encode_literal(lit: int) -> bytes:
    """Map literal l to u = 2|l| + (l < 0) and emit u as a varint."""
    if lit == 0:
        raise ValueError("literal 0 cannot be encoded (terminator)")
    u = 2 * lit if lit > 0 else -2 * lit + 1
    return encode_varint(u)


def encode_clause_message(kind: EventKind, literals: Iterable[int]) -> bytes:
    out = bytearray([TAG_ADD if kind is EventKind.ADD else TAG_DELETE])
    for lit in literals:
        out += encode_literal(lit)
    out.append(0x00)
    return bytes(out)


def encode_hello(num_variables: int = 0, version: int = PROTOCOL_VERSION) -> bytes:
    return bytes([TAG_HELLO]) + encode_varint(version) + encode_varint(num_variables)


def encode_terminate() -> bytes:
    return bytes([TAG_TERMINATE])


def encode_message(msg: WireMessage) -> bytes:
    if msg.kind is MessageKind.TERMINATE:
        return encode_terminate()
    if msg.kind is MessageKind.HELLO:
        return encode_hello(msg.num_variables, msg.version)
    kind = EventKind.ADD if msg.kind is MessageKind.ADD else EventKind.DELETE
    return encode_clause_message(kind, msg.literals or ())


def _lit_from_unsigned(u: int) -> int:
    var = u >> 1
    return -var if u & 1 else var


class StreamDecoder:
    """Incremental decoder: feed() bytes, collect complete messages.

    Any prefix of a valid stream decodes into complete messages plus a
    recognizable incomplete tail; finish() raises if the stream ended
    mid-message.
    """

    def __init__(self, max_clause_literals: int = DEFAULT_MAX_CLAUSE):
        self.max_clause_literals = max_clause_literals
        self._buf = bytearray()
        self._pos = 0
        self._error: Optional[WireError] = None

    @property
    def pending(self) -> bool:
        return self._pos < len(self._buf)

    def feed(self, data: bytes) -> list[WireMessage]:
        """Decode complete messages; a framing error is reported by check()
        or the next feed/finish call, after earlier messages were delivered."""
        if self._error is not None:
            raise self._error
        self._buf += data
        messages = []
        while True:
            try:
                msg, consumed = self._try_decode()
            except WireError as exc:
                self._error = exc
                break
            if msg is None:
                break
            messages.append(msg)
            self._pos += consumed
        if self._pos:
            del self._buf[:self._pos]
            self._pos = 0
        return messages

    def check(self) -> None:
        """Raise the pending framing error, if any."""
        if self._error is not None:
            raise self._error

    def finish(self) -> None:
        self.check()
        if self.pending:
            raise TruncatedVarint("stream ended inside a message")

    def _read_varint(self, offset: int):
        """Returns (value, next_offset) or None if incomplete."""
        value = 0
        shift = 0
        pos = self._pos + offset
        while pos < len(self._buf):
            byte = self._buf[pos]
            value |= (byte & 0x7F) << shift
            pos += 1
            if not byte & 0x80:
                return value, pos - self._pos
            shift += 7
            if shift > 70:
                raise ProtocolError("varint too long")
        return None

    def _try_decode(self):
        if self._pos >= len(self._buf):
            return None, 0
        tag = self._buf[self._pos]
        if tag == TAG_TERMINATE:
            return WireMessage(MessageKind.TERMINATE), 1
        if tag == TAG_HELLO:
            got = self._read_varint(1)
            if got is None:
                return None, 0
            version, off = got
            got = self._read_varint(off)
            if got is None:
                return None, 0
            hint, off = got
            return WireMessage(MessageKind.HELLO, version=version,
                               num_variables=hint), off
        if tag in (TAG_ADD, TAG_DELETE):
            lits = []
            off = 1
            while True:
                got = self._read_varint(off)
                if got is None:
                    return None, 0
                u, off = got
                if u == 0:
                    kind = MessageKind.ADD if tag == TAG_ADD else MessageKind.DELETE
                    return WireMessage(kind, literals=tuple(lits)), off
                lits.append(_lit_from_unsigned(u))
                if len(lits) > self.max_clause_literals:
                    raise OversizedClause(
                        f"clause exceeds {self.max_clause_literals} literals")
        raise UnknownTag(f"unknown message tag 0x{tag:02x}")


def decode_all(data: bytes,
               max_clause_literals: int = DEFAULT_MAX_CLAUSE) -> list[WireMessage]:
    """Decode a complete byte string; raises if a partial message remains."""
    dec = StreamDecoder(max_clause_literals)
    messages = dec.feed(data)
    dec.finish()
    return messages


@dataclass
class ProducerOutcome:
    sent: int
    terminated: bool


_FLUSH_BYTES = 1 << 16


def producer_session(events: Iterable[RawEvent], address: Tuple[str, int],
                     rate: float = 0.0, num_variables: int = 0,
                     connect_timeout: float = 10.0) -> ProducerOutcome:
    """Stream events to a consumer: Hello, one message per event, Terminate.

    Blocking sends give natural backpressure; events are never dropped or
    reordered.  ``rate`` > 0 throttles to roughly that many events/sec.
    """
    try:
        sock = socket.create_connection(address, timeout=connect_timeout)
    except ConnectionRefusedError as exc:
        raise ConnectionRefused(f"consumer at {address[0]}:{address[1]} refused: {exc}")
    except OSError as exc:
        raise ConnectionRefused(f"cannot reach {address[0]}:{address[1]}: {exc}")
    sent = 0
    started = time.monotonic()
    buf = bytearray(encode_hello(num_variables))
    try:
        with sock:
            sock.settimeout(None)
            for kind, lits in events:
                buf += encode_clause_message(kind, lits)
                if len(buf) >= _FLUSH_BYTES:
                    sock.sendall(buf)
                    buf.clear()
                sent += 1
                if rate > 0:
                    ahead = sent / rate - (time.monotonic() - started)
                    if ahead > 0:
                        if buf:
                            sock.sendall(buf)
                            buf.clear()
                        time.sleep(ahead)
            buf += encode_terminate()
            sock.sendall(buf)
    except OSError as exc:
        raise ConnectionLost(str(exc), sent)
    return ProducerOutcome(sent=sent, terminated=True)


class EventSink:
    """Destination for decoded producer events (duck-typed interface)."""

    def ingest(self, kind: EventKind, literals: Tuple[int, ...]):
        raise NotImplementedError

    def producer_connected(self, num_variables_hint: int) -> None:
        pass

    def producer_done(self, reason: str) -> None:
        pass


class ConsumerServer:
    """Accepts one producer at a time and feeds decoded events to a sink.

    Extra connection attempts while a session is active are accepted and
    immediately closed.  Decode failures close the session; the partial
    log already delivered to the sink is retained.
    """

    def __init__(self, host: str, port: int, sink: EventSink,
                 max_clause_literals: int = DEFAULT_MAX_CLAUSE):
        self.sink = sink
        self.max_clause_literals = max_clause_literals
        try:
            self._srv = socket.create_server((host, port))
        except OSError as exc:
            raise BindFailure(f"cannot bind {host}:{port}: {exc}")
        self._srv.settimeout(0.2)
        self.address = self._srv.getsockname()[:2]
        self._stop = threading.Event()
        self._active = threading.Event()
        self._thread = threading.Thread(target=self._accept_loop,
                                        name="clauseviz-consumer", daemon=True)

    @property
    def port(self) -> int:
        return self.address[1]

    def start(self):
        self._thread.start()
        return self

    def stop(self):
        self._stop.set()
        self._thread.join(timeout=5)
        self._srv.close()

    def _accept_loop(self):
        with self._srv:
            while not self._stop.is_set():
                try:
                    conn, peer = self._srv.accept()
                except socket.timeout:
                    continue
                except OSError:
                    break
                if self._active.is_set():
                    log.warning("refusing producer %s: session active", peer)
                    conn.close()
                    continue
                self._active.set()
                worker = threading.Thread(target=self._serve_and_clear,
                                          args=(conn, peer),
                                          name="clauseviz-producer-session",
                                          daemon=True)
                worker.start()

    def _serve_and_clear(self, conn: socket.socket, peer):
        try:
            self._serve(conn, peer)
        finally:
            self._active.clear()

    def _serve(self, conn: socket.socket, peer):
        decoder = StreamDecoder(self.max_clause_literals)
        terminated = False
        try:
            with conn:
                conn.settimeout(0.5)
                while not self._stop.is_set() and not terminated:
                    try:
                        data = conn.recv(1 << 16)
                    except socket.timeout:
                        continue
                    if not data:
                        decoder.finish()
                        break
                    for msg in decoder.feed(data):
                        if msg.kind is MessageKind.HELLO:
                            if msg.version != PROTOCOL_VERSION:
                                raise ProtocolError(
                                    f"unsupported protocol version {msg.version}")
                            self.sink.producer_connected(msg.num_variables)
                        elif msg.kind is MessageKind.TERMINATE:
                            terminated = True
                            break
                        else:
                            kind = (EventKind.ADD if msg.kind is MessageKind.ADD
                                    else EventKind.DELETE)
                            self.sink.ingest(kind, msg.literals)
                    if not terminated:
                        decoder.check()  # surface framing errors promptly
        except WireError as exc:
            log.error("protocol error from %s: %s", peer, exc)
            self.sink.producer_done(f"protocol_error: {exc}")
            return
        except OSError as exc:
            log.error("transport error from %s: %s", peer, exc)
            self.sink.producer_done(f"connection_lost: {exc}")
            return
        self.sink.producer_done("terminated" if terminated else "disconnected")


def solver_adapter_events(command: str) -> Iterable[RawEvent]:
    """Run a solver child process and stream DRAT lines from its stdout.

    Generic replacement for in-process solver instrumentation: any solver
    that can emit a textual DRAT proof on standard output can act as a
    producer (e.g. ``kissat --proof=/dev/stdout file.cnf`` wrappers).
    """
    proc = subprocess.Popen(shlex.split(command), stdout=subprocess.PIPE,
                            text=True, bufsize=1)
    assert proc.stdout is not None
    try:
        yield from parse_drat(proc.stdout)
    finally:
        proc.stdout.close()
        code = proc.wait()
        if code not in (0, 10, 20):  # SAT solvers exit 10/20 by convention
            log.warning("solver command exited with status %d", code)
