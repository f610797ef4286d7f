"""Networked servers and the retrieving client.

Transport is a plain TCP stream of frames (see ``wire``).  There is no TLS:
privacy here is information-theoretic against each server, which sees a
uniformly distributed query by construction; it is not a defence against
an eavesdropper who watches both connections.

Servers are stateless.  On connect a server sends HELLO (scheme, m, k and
the family digest); afterwards every QUERY is answered independently.
"""

from __future__ import annotations

import logging
import socket
import socketserver
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .encoder import AnswerBundle, EncodedDatabase, encode
from .errors import ParameterError, ProtocolError
from .family import MVFamily, load_family
from .schemes import (SchemeConfig, check_symbols, query_gen, reconstruct,
                      server_answer)
from .wire import (HEADER_SIZE, ErrorCode, Frame, FrameError, MsgType, decode_frame,
                   error_frame, hello_frame, parse_error, parse_header, parse_hello,
                   read_frame, recv_exact)

log = logging.getLogger(__name__)


class PIRServer:
    """Answers QUERY frames for one encoded database; holds no per-request state."""

    def __init__(self, cfg: SchemeConfig, family: MVFamily, db: EncodedDatabase):
        if not cfg.accepts(family):
            raise ParameterError(f"family (m={family.m}, S={sorted(family.S)}) unusable by {cfg.variant}")
        if db.k != family.k or db.m != family.m:
            raise ParameterError("database was encoded against a different family")
        self.cfg = cfg
        self.family = family
        self.db = db
        self.hello = hello_frame(cfg.scheme_id, cfg.m, family.k, family.digest)

    def respond(self, frame: Frame) -> Frame:
        sid = self.cfg.scheme_id
        if frame.msg_type != MsgType.QUERY:
            return error_frame(ErrorCode.BAD_TYPE, f"expected QUERY, got type {frame.msg_type}", sid)
        if frame.scheme_id != sid:
            return error_frame(ErrorCode.BAD_SCHEME, f"server runs scheme {sid}", sid)
        if len(frame.body) != self.family.k:
            return error_frame(ErrorCode.BAD_LENGTH,
                               f"query must be {self.family.k} bytes, got {len(frame.body)}", sid)
        if any(b >= self.cfg.m for b in frame.body):
            return error_frame(ErrorCode.BAD_VALUE, f"coordinate out of range for Z_{self.cfg.m}", sid)
        try:
            bundle = server_answer(self.cfg, self.db, tuple(frame.body))
        except Exception:  # never let one request take the server down
            log.exception("failed to answer query")
            return error_frame(ErrorCode.INTERNAL, "internal error", sid)
        return Frame(MsgType.ANSWER, sid, bundle.to_bytes())

    def handle_bytes(self, data: bytes) -> tuple[bytes | None, bool]:
        """Process one complete frame; return (reply or None, close connection?)."""
        try:
            frame = decode_frame(data)
        except FrameError as exc:
            if exc.fatal and exc.code == ErrorCode.BAD_LENGTH:
                return None, True
            return error_frame(exc.code, str(exc), self.cfg.scheme_id).encode(), exc.fatal
        return self.respond(frame).encode(), False


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        pir: PIRServer = self.server.pir
        sock = self.request
        sock.settimeout(self.server.idle_timeout)
        try:
            sock.sendall(pir.hello.encode())
            while True:
                try:
                    header = recv_exact(sock, HEADER_SIZE)
                except ConnectionError:
                    return
                try:
                    msg_type, scheme_id, body_len = parse_header(header)
                except FrameError as exc:
                    if exc.code != ErrorCode.BAD_LENGTH:
                        sock.sendall(error_frame(exc.code, str(exc), pir.cfg.scheme_id).encode())
                    return
                body = recv_exact(sock, body_len)
                sock.sendall(pir.respond(Frame(msg_type, scheme_id, body)).encode())
        except (OSError, ConnectionError):
            return


class ThreadedPIRServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, pir: PIRServer, idle_timeout: float = 30.0):
        self.pir = pir
        self.idle_timeout = idle_timeout
        super().__init__(address, _Handler)


def load_database(path, cfg: SchemeConfig, family: MVFamily) -> list[int]:
    """Raw database file: one symbol per byte."""
    symbols = list(Path(path).read_bytes())
    if len(symbols) > family.n:
        raise ParameterError(f"database has {len(symbols)} symbols, family supports {family.n}")
    check_symbols(cfg, symbols)
    return symbols


def make_server(cfg: SchemeConfig, family: MVFamily, symbols: Sequence[int],
                address=("127.0.0.1", 0)) -> ThreadedPIRServer:
    check_symbols(cfg, symbols)
    return ThreadedPIRServer(address, PIRServer(cfg, family, encode(symbols, family)))


def serve(db_path, family_path, cfg: SchemeConfig, address) -> None:
    """Load, validate and serve until interrupted."""
    family = load_family(family_path)
    server = make_server(cfg, family, load_database(db_path, cfg, family), address)
    host, port = server.server_address[:2]
    log.info("serving %s on %s:%d (n=%d, k=%d)", cfg.variant, host, port, family.n, family.k)
    with server:
        server.serve_forever()


@dataclass(frozen=True)
class CostReport:
    """Payload bytes per server; framing and HELLO traffic are reported separately."""

    variant: str
    n: int
    k: int
    bytes_up: tuple[int, ...]
    bytes_down: tuple[int, ...]
    overhead: int = 0

    @property
    def total(self) -> int:
        return sum(self.bytes_up) + sum(self.bytes_down)


class RetrievalError(ProtocolError):
    """A retrieval was aborted; no symbol is returned."""


class TcpChannel:
    def __init__(self, address, timeout: float = 5.0):
        self.address = address
        self.timeout = timeout
        self.sock = None

    def __enter__(self):
        self.sock = socket.create_connection(self.address, timeout=self.timeout)
        return self

    def __exit__(self, *exc):
        self.sock.close()

    def hello(self) -> Frame:
        return read_frame(self.sock)

    def request(self, frame: Frame) -> Frame:
        self.sock.sendall(frame.encode())
        return read_frame(self.sock)


class LoopbackChannel:
    """In-process channel that still round-trips through the byte encoding."""

    def __init__(self, server: PIRServer):
        self.server = server

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        pass

    def hello(self) -> Frame:
        return decode_frame(self.server.hello.encode())

    def request(self, frame: Frame) -> Frame:
        reply, _ = self.server.handle_bytes(frame.encode())
        if reply is None:
            raise ConnectionError("server closed the connection")
        return decode_frame(reply)


def _ask(channel, cfg: SchemeConfig, family: MVFamily, query: Sequence[int]) -> tuple[bytes, int]:
    with channel:
        hello = channel.hello()
        m, k, digest = parse_hello(hello)
        if hello.scheme_id != cfg.scheme_id or m != cfg.m or k != family.k:
            raise RetrievalError(
                f"server runs scheme {hello.scheme_id} with m={m}, k={k}; "
                f"client expects scheme {cfg.scheme_id} with m={cfg.m}, k={family.k}")
        if digest != family.digest:
            raise RetrievalError("server holds a different matching vector family")
        reply = channel.request(Frame(MsgType.QUERY, cfg.scheme_id, bytes(query)))
    if reply.msg_type == MsgType.ERROR:
        code, text = parse_error(reply.body)
        raise RetrievalError(f"server error {code}: {text}")
    if reply.msg_type != MsgType.ANSWER:
        raise RetrievalError(f"unexpected reply type {reply.msg_type}")
    # HELLO, QUERY and ANSWER headers plus the HELLO body
    overhead = 3 * HEADER_SIZE + len(hello.body)
    return reply.body, overhead


def retrieve_with(cfg: SchemeConfig, family: MVFamily, channels: Sequence, tau: int,
                  rng=None) -> tuple[int, CostReport]:
    """Run one retrieval over ``channels`` (one per server, in t-value order)."""
    if len(channels) != cfg.q:
        raise RetrievalError(f"{cfg.variant} needs exactly {cfg.q} servers, got {len(channels)}")
    state = query_gen(cfg, family, tau, rng)
    with ThreadPoolExecutor(max_workers=cfg.q) as pool:
        futures = [pool.submit(_ask, ch, cfg, family, q) for ch, q in zip(channels, state.queries)]
        try:
            replies = [f.result() for f in futures]
        except RetrievalError:
            raise
        except (OSError, ProtocolError) as exc:
            raise RetrievalError(f"retrieval aborted: {exc}") from exc
    m_ans, r_ans = cfg.answer_ring
    try:
        answers = [AnswerBundle.from_bytes(body, family.k, m_ans, r_ans, cfg.order)
                   for body, _ in replies]
    except ParameterError as exc:
        raise RetrievalError(f"malformed answer: {exc}") from exc
    symbol = reconstruct(cfg, family, state, answers)
    report = CostReport(
        cfg.variant, family.n, family.k,
        tuple(len(q) for q in state.queries),
        tuple(len(body) for body, _ in replies),
        sum(o for _, o in replies),
    )
    return symbol, report


def retrieve(cfg: SchemeConfig, family: MVFamily, addresses: Sequence, tau: int,
             rng=None, timeout: float = 5.0) -> tuple[int, CostReport]:
    return retrieve_with(cfg, family, [TcpChannel(a, timeout) for a in addresses], tau, rng)


def start_background(server: ThreadedPIRServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
