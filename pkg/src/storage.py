# src/storage.py
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import TransferError
from .fabric import Fabric
from .manifest import FileEntry
from .packets import Ethernet, IPv4, IpProto, Packet, Tcp, TcpFlags, mac_for, seq_add
from .scenario import STORAGE_IFACE, NodeRole

__all__ = [
    "STORAGE_PORT",
    "CHUNK",
    "TransferFault",
    "transfer_sport",
    "TransferEntry",
    "TransferReceipt",
    "StorageHost",
    "transfer_to_storage",
]

log = logging.getLogger(__name__)

F = TcpFlags
STORAGE_PORT = 22
JUMBO_MSS = 8960  # 9000-byte MTU minus IP and TCP headers
CHUNK = 64 * 1024  # receiver acknowledges per chunk
SEGMENT_GAP_US = 8
FIRST_SPORT = 50000
SPORT_SPAN = 65536 - FIRST_SPORT


@dataclass(frozen=True)
class TransferFault:
    """Test hook: stop sending ``file`` after ``after_bytes`` of its data."""

    file: str
    after_bytes: int


@dataclass(frozen=True)
class TransferEntry:
    path: str
    source_node: str
    size: int
    source_sha256: str
    dest_sha256: str
    segments: int

    @property
    def ok(self) -> bool:
        return self.source_sha256 == self.dest_sha256


@dataclass
class TransferReceipt:
    storage_node: str
    entries: list[TransferEntry] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def failed(self) -> list[str]:
        return [e.path for e in self.entries if not e.ok]

    def to_dict(self) -> dict:
        return {
            "storage_node": self.storage_node,
            "files": [
                {"path": e.path, "source_node": e.source_node, "size": e.size,
                 "sha256": e.dest_sha256, "ok": e.ok}
                for e in sorted(self.entries, key=lambda e: e.path)
            ],
            "ok": self.ok,
        }


@dataclass
class _Stream:
    buf: bytearray = field(default_factory=bytearray)
    next_seq: int = 0
    acked: int = 0
    done: bool = False


class StorageHost:
    """Receiving end on the storage node's data0.

    Each stream carries ``relpath\\nsize\\n`` followed by the file bytes and
    ends with FIN; the received bytes are written under ``dest_root``.
    """

    def __init__(self, f: Fabric, node: str, ip: str, dest_root: str | Path):
        self.fabric = f
        self.node = node
        self.ip = ip
        self.mac = mac_for(node, STORAGE_IFACE)
        self.dest_root = Path(dest_root)
        self.streams: dict[tuple[str, int], _Stream] = {}
        self.received: dict[str, str] = {}  # relpath -> sha256 of what was written

    def _ack(self, p: Packet, seq: int) -> None:
        t = Tcp(STORAGE_PORT, p.l4.sport, 1, seq, int(F.ACK))
        reply = Packet(self.fabric.clock_us, Ethernet(self.mac, p.l2.src),
                       IPv4(self.ip, p.l3.src, IpProto.TCP), t)
        self.fabric.inject_storage(self.node, reply)

    def receive(self, p: Packet) -> None:
        t = p.tcp
        if t is None or t.dport != STORAGE_PORT:
            return
        key = (p.l3.src, t.sport)
        if t.flags & F.SYN:
            self.streams[key] = _Stream(next_seq=seq_add(t.seq, 1))
            self._ack(p, seq_add(t.seq, 1))
            return
        st = self.streams.get(key)
        if st is None or st.done or t.seq != st.next_seq:
            return
        if p.payload:
            st.buf += p.payload
            st.next_seq = seq_add(st.next_seq, len(p.payload))
            if len(st.buf) - st.acked >= CHUNK:
                st.acked = len(st.buf)
                self._ack(p, st.next_seq)
        if t.flags & F.FIN:
            st.done = True
            self._ack(p, seq_add(st.next_seq, 1))
            self._store(key, st)

    def _store(self, key: tuple[str, int], st: _Stream) -> None:
        try:
            relpath, size, data = bytes(st.buf).split(b"\n", 2)
            relpath = relpath.decode("utf-8")
            int(size)
        except ValueError:
            log.warning("storage stream %s:%d has no valid header; discarded", *key)
            return
        dest = self.dest_root / relpath
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(data)
        self.received[relpath] = hashlib.sha256(data).hexdigest()


class _Sender:
    """Sending end on a capturing node's data0; pumps one segment per event."""

    def __init__(self, f: Fabric, node: str, ip: str, storage: StorageHost):
        self.fabric = f
        self.node = node
        self.ip = ip
        self.mac = mac_for(node, STORAGE_IFACE)
        self.storage = storage
        self.acked = 0

    def receive(self, p: Packet) -> None:
        self.acked += 1

    def _send(self, sport: int, seq: int, flags: int, payload: bytes = b"") -> None:
        t = Tcp(sport, STORAGE_PORT, seq, 1 if flags & F.ACK else 0, int(flags))
        p = Packet(self.fabric.clock_us, Ethernet(self.mac, self.storage.mac),
                   IPv4(self.ip, self.storage.ip, IpProto.TCP), t, payload)
        self.fabric.inject_storage(self.node, p)

    def start(self, ts_us: int, sport: int, stream: bytes) -> int:
        """Schedule the whole stream from ``ts_us``; returns the number of segments."""
        chunks = [stream[i:i + JUMBO_MSS] for i in range(0, len(stream), JUMBO_MSS)]
        state = {"k": 0, "seq": 1}

        def pump(_=None) -> None:
            k = state["k"]
            if k == 0:
                self._send(sport, 0, F.SYN)
            elif k <= len(chunks):
                chunk = chunks[k - 1]
                self._send(sport, state["seq"], F.ACK | F.PSH, chunk)
                state["seq"] = seq_add(state["seq"], len(chunk))
            else:
                self._send(sport, state["seq"], F.ACK | F.FIN)
                return
            state["k"] = k + 1
            self.fabric.schedule(self.fabric.clock_us + SEGMENT_GAP_US, pump)

        self.fabric.schedule(ts_us, pump)
        return len(chunks) + 2


def _storage_node(f: Fabric, name: str | None) -> tuple[str, str]:
    for node in f.scenario.nodes:
        if name is not None and node.name != name:
            continue
        if name is None and node.role is not NodeRole.STORAGE:
            continue
        if node.storage_plane_addr is None:
            raise TransferError(f"storage node {node.name!r} has no storage_plane_addr")
        return node.name, node.storage_plane_addr
    raise TransferError(f"no storage node {name!r}" if name else "scenario declares no storage node")


def transfer_sport(k: int) -> int:
    """Source port of the k-th transfer; wraps within [FIRST_SPORT, 65535]."""
    return FIRST_SPORT + k % SPORT_SPAN


def transfer_to_storage(
    f: Fabric,
    files: Sequence[FileEntry],
    storage_node: str | None = None,
    *,
    source_root: str | Path,
    dest_root: str | Path,
    fault: TransferFault | None = None,
    remove_source: bool = True,
) -> TransferReceipt:
    """Move finalized capture files to storage as storage-plane traffic.

    Each file is streamed from its capturing node's data0 to the storage
    node's data0; nothing touches the overlay. Files whose received bytes hash
    equal to the source are removed from ``source_root`` when
    ``remove_source`` is set; failures stay in place and are listed in
    ``receipt.failed``.

    Raises
    ------
    TransferError
        No usable storage node, or a capturing node has no storage address.
    """
    name, ip = _storage_node(f, storage_node)
    receipt = TransferReceipt(name)
    if not files:
        return receipt

    source_root, dest_root = Path(source_root), Path(dest_root)
    addrs = {n.name: n.storage_plane_addr for n in f.scenario.nodes}
    host = StorageHost(f, name, ip, dest_root)
    f.storage_endpoints[name] = host
    senders: dict[str, _Sender] = {}
    segments: dict[str, int] = {}
    source_sha: dict[str, str] = {}

    t0 = f.clock_us
    for k, e in enumerate(sorted(files, key=lambda e: e.path)):
        if addrs.get(e.node) is None:
            raise TransferError(f"node {e.node!r} has no storage_plane_addr")
        sender = senders.get(e.node)
        if sender is None:
            sender = senders[e.node] = _Sender(f, e.node, addrs[e.node], host)
            f.storage_endpoints[e.node] = sender
        data = (source_root / e.path).read_bytes()
        source_sha[e.path] = hashlib.sha256(data).hexdigest()
        if fault is not None and fault.file == e.path:
            data = data[: fault.after_bytes]
            log.debug("fault: %s cut after %d bytes", e.path, fault.after_bytes)
        stream = f"{e.path}\n{e.size}\n".encode("utf-8") + data
        segments[e.path] = sender.start(t0 + k * SEGMENT_GAP_US, transfer_sport(k), stream)

    f.drain()

    for e in sorted(files, key=lambda e: e.path):
        entry = TransferEntry(
            path=e.path,
            source_node=e.node,
            size=e.size,
            source_sha256=source_sha[e.path],
            dest_sha256=host.received.get(e.path, ""),
            segments=segments[e.path],
        )
        receipt.entries.append(entry)
        if not entry.ok:
            log.warning("transfer of %s failed: destination hash differs", e.path)
        elif remove_source and (dest_root / e.path).resolve() != (source_root / e.path).resolve():
            (source_root / e.path).unlink()
    log.info("transferred %d file(s) to %s, %d failed", len(receipt.entries), name, len(receipt.failed))
    return receipt
