"""Application payload codecs carried over the simulated TCP streams.

HTTP/1.1 requests and responses, a MySQL-flavoured greeting/auth/OK/ERR
exchange, and TLS records (including the heartbeat message).  Nothing here
touches the fabric; the victims and generators build on these helpers.
"""
from __future__ import annotations

import hashlib
import re
import struct
from dataclasses import dataclass

__all__ = [
    "HttpRequest",
    "build_request",
    "parse_request",
    "build_response",
    "response_length",
    "parse_ranges",
    "multipart_byteranges",
    "mysql_packet",
    "read_mysql_packet",
    "mysql_greeting",
    "mysql_auth",
    "mysql_scramble",
    "parse_mysql_auth",
    "parse_mysql_greeting",
    "MYSQL_OK",
    "mysql_err",
    "TlsRecord",
    "parse_records",
    "heartbeat_request",
    "heartbeat_response",
    "parse_heartbeat",
]

CRLF = b"\r\n"
HEADER_END = b"\r\n\r\n"


# ----------------------------
# HTTP
# ----------------------------

@dataclass(frozen=True)
class HttpRequest:
    method: str
    target: str
    version: str
    headers: dict[str, str]
    body: bytes

    def header(self, name: str, default: str | None = None) -> str | None:
        return self.headers.get(name.lower(), default)


def build_request(
    method: str,
    target: str,
    headers: list[tuple[str, str]],
    body: bytes = b"",
    terminate: bool = True,
) -> bytes:
    """Request bytes; ``terminate=False`` omits the blank line ending the header block."""
    lines = [f"{method} {target} HTTP/1.1"] + [f"{k}: {v}" for k, v in headers]
    head = CRLF.join(line.encode("latin-1") for line in lines) + CRLF
    if terminate:
        head += CRLF
    return head + body


def parse_request(buf: bytes) -> tuple[HttpRequest | None, int]:
    """First complete request in ``buf`` and the bytes it consumed, or (None, 0)."""
    end = buf.find(HEADER_END)
    if end < 0:
        return None, 0
    head = buf[:end].decode("latin-1").split("\r\n")
    parts = head[0].split(" ")
    if len(parts) != 3:
        raise ValueError(f"malformed request line {head[0]!r}")
    headers: dict[str, str] = {}
    for line in head[1:]:
        name, _, value = line.partition(":")
        headers[name.strip().lower()] = value.strip()
    length = int(headers.get("content-length", "0") or 0)
    start = end + len(HEADER_END)
    if len(buf) < start + length:
        return None, 0
    req = HttpRequest(parts[0], parts[1], parts[2], headers, bytes(buf[start:start + length]))
    return req, start + length


_REASONS = {200: "OK", 206: "Partial Content", 400: "Bad Request", 404: "Not Found"}


def build_response(status: int, headers: list[tuple[str, str]], body: bytes) -> bytes:
    lines = [f"HTTP/1.1 {status} {_REASONS.get(status, 'Unknown')}"]
    lines += [f"{k}: {v}" for k, v in headers]
    lines.append(f"Content-Length: {len(body)}")
    return CRLF.join(line.encode("latin-1") for line in lines) + HEADER_END + body


_CONTENT_LENGTH = re.compile(rb"\r\ncontent-length:\s*(\d+)", re.IGNORECASE)


def response_length(buf: bytes) -> int | None:
    """Total length of the first response in ``buf`` once its header block is complete."""
    end = buf.find(HEADER_END)
    if end < 0:
        return None
    m = _CONTENT_LENGTH.search(buf[:end + 2])
    return end + len(HEADER_END) + (int(m.group(1)) if m else 0)


def parse_ranges(value: str, size: int) -> list[tuple[int, int]]:
    """Satisfiable (first, last) pairs of a ``bytes=`` Range header; invalid specs are skipped."""
    unit, _, spec = value.partition("=")
    if unit.strip() != "bytes":
        return []
    out = []
    for item in spec.split(","):
        first, sep, last = item.strip().partition("-")
        if not sep:
            continue
        try:
            if first == "":
                n = int(last)
                if n > 0:
                    out.append((max(0, size - n), size - 1))
                continue
            a = int(first)
            b = size - 1 if last == "" else min(int(last), size - 1)
        except ValueError:
            continue
        if a <= b and a < size:
            out.append((a, b))
    return out


def multipart_byteranges(
    body: bytes, ranges: list[tuple[int, int]], content_type: str, boundary: str
) -> bytes:
    parts = []
    for a, b in ranges:
        parts.append(
            f"--{boundary}\r\nContent-Type: {content_type}\r\n"
            f"Content-Range: bytes {a}-{b}/{len(body)}\r\n\r\n".encode("latin-1")
            + body[a:b + 1]
            + CRLF
        )
    return b"".join(parts) + f"--{boundary}--\r\n".encode("latin-1")


# ----------------------------
# MySQL-flavoured auth
# ----------------------------

MYSQL_OK = b"\x00\x00\x00\x02\x00\x00\x00"
ER_ACCESS_DENIED = 1045


def mysql_packet(seq_id: int, payload: bytes) -> bytes:
    return struct.pack("<I", len(payload))[:3] + bytes([seq_id & 0xFF]) + payload


def read_mysql_packet(buf: bytes) -> tuple[int, bytes, int] | None:
    """(seq_id, payload, consumed) of the first complete packet, None while incomplete."""
    if len(buf) < 4:
        return None
    length = int.from_bytes(buf[:3], "little")
    if len(buf) < 4 + length:
        return None
    return buf[3], bytes(buf[4:4 + length]), 4 + length


def mysql_greeting(version: str, conn_id: int, salt: bytes) -> bytes:
    return (
        b"\x0a" + version.encode() + b"\x00"
        + struct.pack("<I", conn_id)
        + salt[:8] + b"\x00"
        + struct.pack("<HBHH", 0xF7FF, 0x21, 0x0002, 0x8000)
        + bytes([len(salt) + 1]) + b"\x00" * 10
        + salt[8:] + b"\x00"
        + b"mysql_native_password\x00"
    )


def mysql_scramble(salt: bytes, password: str) -> bytes:
    """SHA1(password) XOR SHA1(salt + SHA1(SHA1(password)))."""
    if not password:
        return b""
    stage1 = hashlib.sha1(password.encode()).digest()
    stage2 = hashlib.sha1(stage1).digest()
    mix = hashlib.sha1(salt + stage2).digest()
    return bytes(a ^ b for a, b in zip(stage1, mix))


def mysql_auth(user: str, password: str, salt: bytes) -> bytes:
    token = mysql_scramble(salt, password)
    return (
        struct.pack("<IIB", 0x000FA685, 1 << 24, 0x21) + b"\x00" * 23
        + user.encode() + b"\x00"
        + bytes([len(token)]) + token
        + b"mysql_native_password\x00"
    )


def parse_mysql_auth(payload: bytes) -> tuple[str, bytes]:
    off = 32
    nul = payload.index(b"\x00", off)
    user = payload[off:nul].decode()
    n = payload[nul + 1]
    return user, payload[nul + 2:nul + 2 + n]


def mysql_err(code: int, state: str, message: str) -> bytes:
    return b"\xff" + struct.pack("<H", code) + b"#" + state.encode() + message.encode()


# ----------------------------
# TLS records
# ----------------------------

CONTENT_ALERT = 21
CONTENT_HANDSHAKE = 22
CONTENT_HEARTBEAT = 24
TLS1_1 = 0x0302

HEARTBEAT_REQUEST = 1
HEARTBEAT_RESPONSE = 2


@dataclass(frozen=True)
class TlsRecord:
    content_type: int
    version: int
    body: bytes

    def encode(self) -> bytes:
        return struct.pack("!BHH", self.content_type, self.version, len(self.body)) + self.body


def parse_records(buf: bytes) -> tuple[list[TlsRecord], int]:
    """Complete records at the head of ``buf`` and the number of bytes they span."""
    out, off = [], 0
    while len(buf) - off >= 5:
        ctype, version, length = struct.unpack_from("!BHH", buf, off)
        if len(buf) - off - 5 < length:
            break
        out.append(TlsRecord(ctype, version, bytes(buf[off + 5:off + 5 + length])))
        off += 5 + length
    return out, off


def handshake_message(msg_type: int, body: bytes) -> bytes:
    return bytes([msg_type]) + len(body).to_bytes(3, "big") + body


def heartbeat_request(claimed_len: int, payload: bytes, version: int = TLS1_1) -> TlsRecord:
    return TlsRecord(
        CONTENT_HEARTBEAT, version,
        bytes([HEARTBEAT_REQUEST]) + struct.pack("!H", claimed_len) + payload,
    )


def heartbeat_response(payload: bytes, version: int = TLS1_1) -> TlsRecord:
    return TlsRecord(
        CONTENT_HEARTBEAT, version,
        bytes([HEARTBEAT_RESPONSE]) + struct.pack("!H", len(payload)) + payload,
    )


def parse_heartbeat(body: bytes) -> tuple[int, int, bytes]:
    """(message type, declared payload length, payload bytes actually present)."""
    if len(body) < 3:
        raise ValueError("heartbeat message shorter than its header")
    (claimed,) = struct.unpack_from("!H", body, 1)
    return body[0], claimed, body[3:]


def parse_mysql_greeting(payload: bytes) -> tuple[str, int, bytes]:
    """(server version, connection id, 20-byte salt) from a greeting payload."""
    if payload[:1] != b"\x0a":
        raise ValueError("not a protocol-10 greeting")
    nul = payload.index(b"\x00", 1)
    version = payload[1:nul].decode()
    off = nul + 1
    (conn_id,) = struct.unpack_from("<I", payload, off)
    salt1 = payload[off + 4:off + 12]
    off += 13 + 2 + 1 + 2 + 2 + 1 + 10
    end = payload.index(b"\x00", off)
    return version, conn_id, salt1 + payload[off:end]
