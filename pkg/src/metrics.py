from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .hooks import Direction, TapHandle
from .packets import IpProto, TcpFlags, decode_frame
from .pcap import PcapFile, read_pcap

if TYPE_CHECKING:
    from .fabric import Fabric


def capture_completeness(tap: TapHandle, files: Sequence[PcapFile]) -> dict:
    """Records written for one tap against the hook invocations it saw.

    Parameters
    ----------
    tap : TapHandle
        A finalized tap.
    files : sequence of PcapFile
        Inventory returned by ``finalize``; only the tap's own files are read.

    Returns
    -------
    dict
        ``invocations``, ``ingress``, ``egress`` record counts, ``overlap`` (records
        present in both directions, by timestamp and bytes) and ``complete``.

    Notes
    -----
    A frame between two pods of the same node crosses that node's interfaces
    twice (once leaving, once arriving, TTL one lower); those are two records
    at two different times, not an overlap.
    """
    seen: dict[str, set[tuple[int, bytes]]] = {Direction.INGRESS.value: set(), Direction.EGRESS.value: set()}
    counts = {Direction.INGRESS.value: 0, Direction.EGRESS.value: 0, Direction.BOTH.value: 0}
    for pf in files:
        if (pf.node, pf.interface) != (tap.node, tap.interface):
            continue
        records = read_pcap(pf.path)
        counts[pf.direction] += len(records)
        if pf.direction in seen:
            seen[pf.direction].update(records)
    overlap = len(seen[Direction.INGRESS.value] & seen[Direction.EGRESS.value])
    written = sum(counts.values())
    return {
        "node": tap.node,
        "interface": tap.interface,
        "invocations": tap.invocations,
        "ingress": counts[Direction.INGRESS.value],
        "egress": counts[Direction.EGRESS.value],
        "overlap": overlap,
        "complete": written == tap.invocations and overlap == 0,
    }


def plane_isolation(f: "Fabric") -> dict:
    """Cross-plane traffic seen by the fabric's interfaces (both counts must be 0)."""
    from .fabric import InterfaceKind

    storage_on_overlay = sum(
        i.storage_packets for i in f.interfaces.values() if i.kind is not InterfaceKind.STORAGE_PLANE
    )
    overlay_on_storage = sum(
        i.overlay_packets for i in f.interfaces.values() if i.kind is InterfaceKind.STORAGE_PLANE
    )
    storage_total = sum(i.storage_packets for i in f.interfaces.values())
    return {
        "storage_on_overlay": storage_on_overlay,
        "overlay_on_storage": overlay_on_storage,
        "storage_packets": storage_total,
        "isolated": storage_on_overlay == 0 and overlay_on_storage == 0,
    }


def syn_only_fraction(paths: Iterable[str | Path], victim_ip: str, dport: int) -> float:
    """Share of TCP records addressed to ``victim_ip`` that are bare SYNs to ``dport``.

    Returns NaN when no TCP record is addressed to the victim.
    """
    hits = total = 0
    for path in paths:
        for _, frame in read_pcap(path):
            h = decode_frame(frame)
            if h is None or h.proto != IpProto.TCP or h.dst != victim_ip:
                continue
            total += 1
            hits += h.dport == dport and h.flags == TcpFlags.SYN
    return float(hits / total) if total else float(np.nan)
