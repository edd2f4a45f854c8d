from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import IntEnum, IntFlag
from typing import NamedTuple, Union

from scapy.layers.inet import ICMP, IP, TCP, UDP
from scapy.layers.l2 import Ether
from scapy.packet import Raw

__all__ = [
    "TcpFlags",
    "IpProto",
    "Ethernet",
    "IPv4",
    "Tcp",
    "Udp",
    "Icmp",
    "Packet",
    "FrameHeader",
    "encode_frame",
    "decode_frame",
    "mac_for",
    "seq_add",
    "seq_between",
]

ETH_P_LOCAL = 0x88B5  # IEEE local experimental; frames without an L3 header
ETH_HLEN = 14
IP_HLEN = 20
TCP_HLEN = 20
L4_SHORT_HLEN = 8  # UDP and ICMP echo

DEFAULT_TTL = 64
SEQ_MOD = 1 << 32


class TcpFlags(IntFlag):
    FIN = 0x01
    SYN = 0x02
    RST = 0x04
    PSH = 0x08
    ACK = 0x10
    URG = 0x20


class IpProto(IntEnum):
    ICMP = 1
    TCP = 6
    UDP = 17


def seq_add(seq: int, n: int) -> int:
    """TCP sequence arithmetic (mod 2**32)."""
    return (seq + n) % SEQ_MOD


def seq_between(lo: int, x: int, hi: int) -> bool:
    """lo <= x <= hi in sequence space (window assumed < 2**31)."""
    return (x - lo) % SEQ_MOD <= (hi - lo) % SEQ_MOD


def mac_for(node: str, pod: str) -> str:
    """Locally administered MAC derived from (node, pod)."""
    digest = hashlib.sha256(f"{node}/{pod}".encode()).digest()
    return "02:" + ":".join(f"{b:02x}" for b in digest[:5])


@dataclass(frozen=True, slots=True)
class Ethernet:
    src: str
    dst: str


@dataclass(frozen=True, slots=True)
class IPv4:
    src: str
    dst: str
    proto: int
    ttl: int = DEFAULT_TTL
    ident: int = 0


@dataclass(frozen=True, slots=True)
class Tcp:
    sport: int
    dport: int
    seq: int
    ack: int
    flags: int
    window: int = 64240


@dataclass(frozen=True, slots=True)
class Udp:
    sport: int
    dport: int


@dataclass(frozen=True, slots=True)
class Icmp:
    type: int
    code: int
    ident: int
    seq: int


L4 = Union[Tcp, Udp, Icmp]


@dataclass(slots=True)
class Packet:
    """One simulated frame.

    ``origin`` (sending pod) and ``tag`` (index of the scenario attack the
    packet belongs to) are audit metadata: they never reach the wire encoding
    and take no part in equality.
    """

    ts_us: int
    l2: Ethernet
    l3: IPv4 | None = None
    l4: L4 | None = None
    payload: bytes = b""
    origin: str | None = field(default=None, compare=False, repr=False)
    tag: int | None = field(default=None, compare=False, repr=False)
    _wire: bytes | None = field(default=None, init=False, compare=False, repr=False)

    @property
    def ts(self) -> float:
        return self.ts_us / 1e6

    @property
    def tcp(self) -> Tcp | None:
        return self.l4 if isinstance(self.l4, Tcp) else None

    def wire(self) -> bytes:
        """Ethernet frame bytes (cached; packets are treated as immutable)."""
        if self._wire is None:
            self._wire = encode_frame(self)
        return self._wire

    def __len__(self) -> int:
        return len(self.wire())


# ----------------------------
# Wire codec
# ----------------------------

def _l4_layer(p: Packet):
    l4 = p.l4
    if isinstance(l4, Tcp):
        return TCP(sport=l4.sport, dport=l4.dport, seq=l4.seq % SEQ_MOD, ack=l4.ack % SEQ_MOD,
                   flags=int(l4.flags) & 0x3F, window=l4.window)
    if isinstance(l4, Udp):
        return UDP(sport=l4.sport, dport=l4.dport)
    if isinstance(l4, Icmp):
        return ICMP(type=l4.type, code=l4.code, id=l4.ident, seq=l4.seq)
    return None


def encode_frame(p: Packet) -> bytes:
    """Ethernet frame bytes built with scapy layers; checksums and lengths are filled in on build."""
    frame = Ether(src=p.l2.src, dst=p.l2.dst)
    if p.l3 is None:
        frame.type = ETH_P_LOCAL
    else:
        frame = frame / IP(src=p.l3.src, dst=p.l3.dst, proto=p.l3.proto, ttl=p.l3.ttl,
                           id=p.l3.ident & 0xFFFF, flags="DF")
        l4 = _l4_layer(p)
        if l4 is not None:
            frame = frame / l4
    if p.payload:
        frame = frame / Raw(load=p.payload)
    return bytes(frame)


class FrameHeader(NamedTuple):
    """Header fields recovered from captured frame bytes.

    Ports are 0 for non-TCP/UDP frames; for ICMP, ``sport`` holds the echo
    identifier so request and reply share a flow key.
    ``payload`` is what the snaplen kept; ``payload_len`` is the length on the
    wire (None when unknown).
    """

    src: str
    dst: str
    proto: int
    sport: int
    dport: int
    flags: int
    seq: int
    ack: int
    window: int
    ttl: int
    icmp_type: int
    payload: bytes
    payload_len: int | None = None


def decode_frame(frame: bytes) -> FrameHeader | None:
    """Dissect a captured frame with scapy; None for non-IP frames.

    Works on snaplen-truncated frames (payload is whatever was captured).
    """
    if len(frame) < ETH_HLEN + IP_HLEN:
        return None
    pkt = Ether(frame)
    if IP not in pkt:
        return None
    ip = pkt[IP]
    off = ETH_HLEN + ip.ihl * 4
    end = min(len(frame), ETH_HLEN + ip.len)
    sport = dport = flags = seq = ack = window = 0
    icmp_type = -1
    # L4 fields only when the whole header survived the snaplen
    if ip.proto == IpProto.TCP and TCP in pkt and end >= off + TCP_HLEN:
        t = pkt[TCP]
        sport, dport, flags, seq, ack, window = t.sport, t.dport, int(t.flags), t.seq, t.ack, t.window
        off += t.dataofs * 4
    elif ip.proto == IpProto.UDP and UDP in pkt and end >= off + L4_SHORT_HLEN:
        sport, dport = pkt[UDP].sport, pkt[UDP].dport
        off += L4_SHORT_HLEN
    elif ip.proto == IpProto.ICMP and ICMP in pkt and end >= off + L4_SHORT_HLEN:
        icmp = pkt[ICMP]
        icmp_type = icmp.type
        sport, seq = getattr(icmp, "id", 0) or 0, getattr(icmp, "seq", 0) or 0
        off += L4_SHORT_HLEN
    # sliced from the captured bytes, whatever scapy dissected the payload as
    return FrameHeader(ip.src, ip.dst, ip.proto, sport, dport, flags, seq, ack, window, ip.ttl, icmp_type,
                       frame[off:end], max(0, ETH_HLEN + ip.len - off))
