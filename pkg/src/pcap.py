from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from scapy.utils import RawPcapReader, RawPcapWriter

from .errors import BadMagic, PcapFormatError, TruncatedRecord

__all__ = ["PcapSink", "PcapFile", "read_pcap", "iter_pcap", "file_sha256", "EPOCH_S"]

# 2022-02-01T00:00:00Z; simulated time 0 maps here.
EPOCH_S = 1643673600

PCAP_MAGIC = 0xA1B2C3D4
LINKTYPE_ETHERNET = 1
GLOBAL_HEADER = struct.Struct("<IHHiIII")
RECORD_HEADER = struct.Struct("<IIII")


@dataclass(frozen=True)
class PcapFile:
    """Inventory entry for one finalized capture file."""

    path: Path
    node: str
    interface: str
    direction: str
    slot: int
    packet_count: int
    sha256: str
    size: int


class PcapSink:
    """Append-only classic pcap (little-endian, µs, Ethernet) for one file."""

    def __init__(self, path: str | Path, snaplen: int = 65535):
        self.path = Path(path)
        self.snaplen = int(snaplen)
        self.count = 0
        self._writer = RawPcapWriter(
            str(self.path), linktype=LINKTYPE_ETHERNET, endianness="<", snaplen=self.snaplen, sync=False
        )
        # header up front so a file that never sees a record is still valid
        self._writer.write_header(None)

    def write(self, ts_us: int, frame: bytes) -> None:
        wirelen = len(frame)
        data = frame[: self.snaplen]
        sec, usec = divmod(int(ts_us), 1_000_000)
        self._writer.write_packet(data, sec=EPOCH_S + sec, usec=usec, caplen=len(data), wirelen=wirelen)
        self.count += 1

    def close(self) -> None:
        self._writer.close()


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _check_header(path: Path) -> int:
    with open(path, "rb") as fh:
        head = fh.read(GLOBAL_HEADER.size)
    if len(head) < GLOBAL_HEADER.size:
        raise TruncatedRecord(f"global header is {len(head)} bytes", path, 0)
    magic, major, minor, _, _, snaplen, network = GLOBAL_HEADER.unpack(head)
    if magic != PCAP_MAGIC:
        raise BadMagic(f"bad magic 0x{magic:08x}", path, 0)
    if (major, minor) != (2, 4):
        raise PcapFormatError(f"unsupported version {major}.{minor}", path, 4)
    if network != LINKTYPE_ETHERNET:
        raise PcapFormatError(f"unsupported link type {network}", path, 20)
    return snaplen


def iter_pcap(path: str | Path) -> Iterator[tuple[int, bytes, int]]:
    """Yield (ts_us relative to the simulated epoch, captured bytes, orig_len)."""
    path = Path(path)
    _check_header(path)
    size = path.stat().st_size
    offset = GLOBAL_HEADER.size
    reader = RawPcapReader(str(path))
    try:
        for data, meta in reader:
            if len(data) < meta.caplen:
                raise TruncatedRecord(
                    f"record declares {meta.caplen} bytes, {len(data)} present", path, offset
                )
            yield (meta.sec - EPOCH_S) * 1_000_000 + meta.usec, bytes(data), meta.wirelen
            offset += RECORD_HEADER.size + meta.caplen
    finally:
        reader.close()
    if offset != size:
        raise TruncatedRecord(f"{size - offset} trailing byte(s) after the last record", path, offset)


def read_pcap(path: str | Path) -> list[tuple[int, bytes]]:
    """All records of a capture file as (ts_us, frame bytes)."""
    return [(ts, data) for ts, data, _ in iter_pcap(path)]
