"""Length-prefixed binary frames.

Header (11 bytes, little-endian)::

    magic "MVPR" | version u8 | msg_type u8 | scheme_id u8 | body_len u32

Bodies:
    QUERY   k bytes, one Z_m coordinate each
    ANSWER  concatenated ring elements (r bytes each): F, F^(1)[, F^(2)]
    ERROR   1 code byte + UTF-8 message
    HELLO   m u8 | k u16 | 32-byte family digest   (sent by the server on connect)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

from .errors import ProtocolError

MAGIC = b"MVPR"
VERSION = 1
HEADER = struct.Struct("<4sBBBI")
HEADER_SIZE = HEADER.size
HELLO_BODY = struct.Struct("<BH32s")
MAX_BODY = 1 << 20


class MsgType(IntEnum):
    QUERY = 1
    ANSWER = 2
    ERROR = 3
    HELLO = 4


class ErrorCode(IntEnum):
    BAD_FRAME = 1
    BAD_LENGTH = 2
    BAD_VERSION = 3
    BAD_TYPE = 4
    BAD_SCHEME = 5
    BAD_VALUE = 6
    INTERNAL = 7


class FrameError(ProtocolError):
    def __init__(self, code: ErrorCode, message: str, fatal: bool = False):
        super().__init__(message)
        self.code = code
        # a fatal error means the stream can no longer be trusted; close it
        self.fatal = fatal


@dataclass(frozen=True)
class Frame:
    msg_type: int
    scheme_id: int
    body: bytes = b""
    version: int = VERSION

    def encode(self) -> bytes:
        return HEADER.pack(MAGIC, self.version, self.msg_type, self.scheme_id, len(self.body)) + self.body


def parse_header(header: bytes) -> tuple[int, int, int]:
    """Validate a header and return (msg_type, scheme_id, body_len)."""
    if len(header) != HEADER_SIZE:
        raise FrameError(ErrorCode.BAD_FRAME, "truncated header", fatal=True)
    magic, version, msg_type, scheme_id, body_len = HEADER.unpack(header)
    if magic != MAGIC:
        raise FrameError(ErrorCode.BAD_FRAME, "bad magic", fatal=True)
    if version != VERSION:
        raise FrameError(ErrorCode.BAD_VERSION, f"unsupported version {version}", fatal=True)
    if body_len > MAX_BODY:
        raise FrameError(ErrorCode.BAD_LENGTH, f"body of {body_len} bytes exceeds limit", fatal=True)
    return msg_type, scheme_id, body_len


def decode_frame(data: bytes) -> Frame:
    """Decode exactly one frame; trailing or missing body bytes are an error."""
    msg_type, scheme_id, body_len = parse_header(bytes(data[:HEADER_SIZE]))
    body = bytes(data[HEADER_SIZE:])
    if len(body) != body_len:
        raise FrameError(ErrorCode.BAD_LENGTH,
                         f"header announces {body_len} body bytes, frame has {len(body)}")
    if msg_type not in set(MsgType):
        raise FrameError(ErrorCode.BAD_TYPE, f"unknown message type {msg_type}")
    return Frame(msg_type, scheme_id, body)


def error_frame(code: int, message: str, scheme_id: int = 0) -> Frame:
    return Frame(MsgType.ERROR, scheme_id, bytes([code]) + message.encode("utf-8"))


def parse_error(body: bytes) -> tuple[int, str]:
    if not body:
        return ErrorCode.BAD_FRAME, ""
    return body[0], body[1:].decode("utf-8", errors="replace")


def hello_frame(scheme_id: int, m: int, k: int, digest: bytes) -> Frame:
    return Frame(MsgType.HELLO, scheme_id, HELLO_BODY.pack(m, k, digest))


def parse_hello(frame: Frame) -> tuple[int, int, bytes]:
    if frame.msg_type != MsgType.HELLO or len(frame.body) != HELLO_BODY.size:
        raise ProtocolError("malformed HELLO")
    return HELLO_BODY.unpack(frame.body)


def recv_exact(sock, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("peer closed the connection")
        buf += chunk
    return bytes(buf)


def read_frame(sock) -> Frame:
    """Read one frame from a stream; the message type is left for the caller to check."""
    msg_type, scheme_id, body_len = parse_header(recv_exact(sock, HEADER_SIZE))
    return Frame(msg_type, scheme_id, recv_exact(sock, body_len))
