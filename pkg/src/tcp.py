"""Client-side TCP endpoint used by attacker and benign-client pods.

Only what the generators need: handshake, in-order data, ACKs (automatic or
manual), FIN/RST teardown. No retransmission, the fabric never loses frames.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .interfaces import ConnectionListener
from .packets import Ethernet, Icmp, IpProto, IPv4, Packet, Tcp, TcpFlags, seq_add
from .scenario import ImageRole, PodSpec

if TYPE_CHECKING:
    from .fabric import Fabric

__all__ = ["ConnState", "ConnectionHandle", "ConnectionEvents", "ClientHost", "EPHEMERAL_PORTS"]

log = logging.getLogger(__name__)

EPHEMERAL_PORTS = (32768, 60999)
DEFAULT_WINDOW = 64240

F = TcpFlags


class ConnState(str, Enum):
    SYN_SENT = "SynSent"
    ESTABLISHED = "Established"
    FIN_WAIT = "FinWait"
    LAST_ACK = "LastAck"
    CLOSED = "Closed"
    REFUSED = "Refused"


class ConnectionEvents:
    """No-op ConnectionListener; generators override what they need."""

    def on_established(self, h: "ConnectionHandle") -> None:
        pass

    def on_data(self, h: "ConnectionHandle", data: bytes) -> None:
        pass

    def on_closed(self, h: "ConnectionHandle") -> None:
        pass

    def on_refused(self, h: "ConnectionHandle") -> None:
        pass


@dataclass(eq=False)
class ConnectionHandle:
    local_ip: str
    local_port: int
    remote_ip: str
    remote_port: int
    isn: int
    listener: ConnectionListener
    window: int = DEFAULT_WINDOW
    manual_ack: bool = False
    tag: int | None = None
    state: ConnState = ConnState.SYN_SENT
    snd_nxt: int = 0
    rcv_nxt: int = 0
    bytes_sent: int = 0
    bytes_received: int = 0
    packets: int = 0  # segments in both directions
    buffer: bytearray = field(default_factory=bytearray)
    opened_us: int = 0
    established_us: int | None = None
    closed_us: int | None = None

    @property
    def established(self) -> bool:
        return self.state is ConnState.ESTABLISHED

    @property
    def open(self) -> bool:
        return self.state in (ConnState.SYN_SENT, ConnState.ESTABLISHED, ConnState.FIN_WAIT, ConnState.LAST_ACK)


class ClientHost:
    """TCP/ICMP endpoint of a client pod.

    Hping3 pods ignore segments nobody asked for (their SYN-ACK backscatter
    would otherwise draw a RST from the pod's own stack).
    """

    def __init__(self, f: "Fabric", pod: PodSpec, ip: str, mac: str, rng: np.random.Generator):
        self.fabric = f
        self.pod = pod
        self.ip = ip
        self.mac = mac
        self.rng = rng
        self.ignore_unsolicited = pod.image_role is ImageRole.HPING3
        self.conns: dict[int, ConnectionHandle] = {}
        lo, hi = EPHEMERAL_PORTS
        self._next_port = int(rng.integers(lo, hi + 1))
        self._ident = int(rng.integers(0, 1 << 16))
        self.unsolicited = 0

    # ---- frame construction
    def next_ident(self) -> int:
        self._ident = (self._ident + 1) & 0xFFFF
        return self._ident

    def frame(
        self,
        dst_ip: str,
        l4,
        payload: bytes = b"",
        *,
        src_ip: str | None = None,
        tag: int | None = None,
        ts_us: int | None = None,
    ) -> Packet:
        proto = IpProto.TCP if isinstance(l4, Tcp) else IpProto.ICMP if isinstance(l4, Icmp) else IpProto.UDP
        return Packet(
            ts_us=self.fabric.clock_us if ts_us is None else ts_us,
            l2=Ethernet(self.mac, self.fabric.mac_for_ip(dst_ip)),
            l3=IPv4(src_ip or self.ip, dst_ip, proto, ident=self.next_ident()),
            l4=l4,
            payload=payload,
            origin=self.pod.name,
            tag=tag,
        )

    def emit(self, p: Packet) -> None:
        self.fabric.inject(self.pod.name, p)

    def _segment(self, h: ConnectionHandle, flags: int, payload: bytes = b"", window: int | None = None) -> None:
        t = Tcp(h.local_port, h.remote_port, h.snd_nxt, h.rcv_nxt if flags & F.ACK else 0, int(flags),
                h.window if window is None else window)
        h.packets += 1
        self.emit(self.frame(h.remote_ip, t, payload, tag=h.tag))

    # ---- ports
    def allocate_port(self) -> int:
        lo, hi = EPHEMERAL_PORTS
        for _ in range(hi - lo + 1):
            port = self._next_port
            self._next_port = lo if port >= hi else port + 1
            if port not in self.conns:
                return port
        raise RuntimeError(f"{self.pod.name}: ephemeral ports exhausted")

    # ---- connection API
    def connect(
        self,
        remote_ip: str,
        dport: int,
        listener: ConnectionListener | None = None,
        *,
        sport: int | None = None,
        isn: int | None = None,
        window: int = DEFAULT_WINDOW,
        manual_ack: bool = False,
        tag: int | None = None,
    ) -> ConnectionHandle:
        port = self.allocate_port() if sport is None else int(sport)
        if port in self.conns:
            raise ValueError(f"{self.pod.name}: local port {port} is in use")
        h = ConnectionHandle(
            local_ip=self.ip,
            local_port=port,
            remote_ip=remote_ip,
            remote_port=int(dport),
            isn=int(self.rng.integers(0, 1 << 32)) if isn is None else int(isn),
            listener=listener or ConnectionEvents(),
            window=window,
            manual_ack=manual_ack,
            tag=tag,
            opened_us=self.fabric.clock_us,
        )
        h.snd_nxt = h.isn
        self.conns[port] = h
        self._segment(h, F.SYN)
        h.snd_nxt = seq_add(h.isn, 1)
        return h

    def send(self, h: ConnectionHandle, data: bytes) -> None:
        if h.state is not ConnState.ESTABLISHED:
            raise ValueError(f"send on a {h.state.value} connection")
        self._segment(h, F.PSH | F.ACK, data)
        h.snd_nxt = seq_add(h.snd_nxt, len(data))
        h.bytes_sent += len(data)

    def ack(self, h: ConnectionHandle, window: int | None = None) -> None:
        if h.open:
            self._segment(h, F.ACK, window=window)

    def close(self, h: ConnectionHandle) -> None:
        """Orderly close (FIN); the connection ends when the peer's FIN is acknowledged."""
        if h.state is not ConnState.ESTABLISHED:
            return
        self._segment(h, F.FIN | F.ACK)
        h.snd_nxt = seq_add(h.snd_nxt, 1)
        h.state = ConnState.FIN_WAIT

    def abort(self, h: ConnectionHandle) -> None:
        """Reset the connection (no reply expected)."""
        if not h.open:
            return
        if h.state is not ConnState.SYN_SENT:
            self._segment(h, F.RST | F.ACK)
        self._finish(h, ConnState.CLOSED)

    def _finish(self, h: ConnectionHandle, state: ConnState) -> None:
        h.state = state
        h.closed_us = self.fabric.clock_us
        self.conns.pop(h.local_port, None)
        if state is ConnState.REFUSED:
            h.listener.on_refused(h)
        else:
            h.listener.on_closed(h)

    # ---- receive path
    def receive(self, p: Packet) -> None:
        t = p.l4
        if not isinstance(t, Tcp):
            return  # echo replies and the like need no reaction
        h = self.conns.get(t.dport)
        if h is None or h.remote_ip != p.l3.src or h.remote_port != t.sport:
            self.unsolicited += 1
            if not (self.ignore_unsolicited or t.flags & F.RST):
                rst = Tcp(t.dport, t.sport, t.ack, 0, int(F.RST), 0)
                self.emit(self.frame(p.l3.src, rst, tag=p.tag))
            return
        h.packets += 1
        flags = t.flags
        if h.state is ConnState.SYN_SENT:
            if flags & F.RST:
                self._finish(h, ConnState.REFUSED)
            elif flags & F.SYN and flags & F.ACK and t.ack == h.snd_nxt:
                h.rcv_nxt = seq_add(t.seq, 1)
                h.state = ConnState.ESTABLISHED
                h.established_us = self.fabric.clock_us
                self._segment(h, F.ACK)
                h.listener.on_established(h)
            return
        if flags & F.RST:
            self._finish(h, ConnState.CLOSED)
            return
        if p.payload and t.seq == h.rcv_nxt:
            h.rcv_nxt = seq_add(h.rcv_nxt, len(p.payload))
            h.bytes_received += len(p.payload)
            if not h.manual_ack and not flags & F.FIN:
                self._segment(h, F.ACK)
            h.listener.on_data(h, p.payload)
        if flags & F.FIN and seq_add(t.seq, len(p.payload)) == h.rcv_nxt:
            h.rcv_nxt = seq_add(h.rcv_nxt, 1)
            if h.state is ConnState.FIN_WAIT:
                self._segment(h, F.ACK)
                self._finish(h, ConnState.CLOSED)
            elif h.state is ConnState.ESTABLISHED:
                self._segment(h, F.FIN | F.ACK)
                h.snd_nxt = seq_add(h.snd_nxt, 1)
                h.state = ConnState.LAST_ACK
            return
        if h.state is ConnState.LAST_ACK and flags & F.ACK and t.ack == h.snd_nxt:
            self._finish(h, ConnState.CLOSED)
