from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Callable

from .errors import AlreadyAttached
from .packets import Packet
from .pcap import PcapFile, PcapSink, file_sha256

if TYPE_CHECKING:
    from .fabric import Fabric

__all__ = [
    "Action",
    "Verdict",
    "PASS",
    "DROP",
    "redirect",
    "HookMode",
    "HookProgram",
    "pass_all",
    "Direction",
    "TapSpec",
    "CaptureConfig",
    "TapHandle",
    "attach",
    "record",
    "finalize",
]

log = logging.getLogger(__name__)


class Action(str, Enum):
    PASS = "Pass"
    DROP = "Drop"
    REDIRECT = "Redirect"


@dataclass(frozen=True)
class Verdict:
    action: Action
    target: tuple[str, str] | None = None  # (node, interface) for Redirect


PASS = Verdict(Action.PASS)
DROP = Verdict(Action.DROP)


def redirect(node: str, interface: str) -> Verdict:
    return Verdict(Action.REDIRECT, (node, interface))


def pass_all(_: Packet) -> Verdict:
    return PASS


class HookMode(str, Enum):
    NATIVE = "Native"


@dataclass(frozen=True)
class HookProgram:
    """Per-interface program; ``verdict_fn`` must depend on packet bytes only."""

    name: str = "capture"
    verdict_fn: Callable[[Packet], Verdict] = pass_all
    mode: HookMode = HookMode.NATIVE


class Direction(str, Enum):
    INGRESS = "in"
    EGRESS = "out"
    BOTH = "both"


@dataclass(frozen=True)
class TapSpec:
    node: str
    interface: str
    split: bool = True


@dataclass(frozen=True)
class CaptureConfig:
    taps: tuple[TapSpec, ...] = ()
    rotation_interval: float = 60.0
    snaplen: int = 65535
    output_dir: str = "nodes/{node}"

    def __post_init__(self):
        object.__setattr__(self, "taps", tuple(self.taps))

    def directory(self, root: str | Path, node: str) -> Path:
        return Path(root) / self.output_dir.format(node=node)


@dataclass
class TapHandle:
    """Hook + direction-split, time-rotated pcap streams of one interface."""

    node: str
    interface: str
    program: HookProgram
    config: CaptureConfig
    directory: Path
    split: bool = True
    invocations: int = 0
    # (direction, slot) -> records; kept for completeness checks
    counts: dict[tuple[str, int], int] = field(default_factory=dict)
    # per file name, audit tags of its records in order (None = no attack)
    tags: dict[str, list[int | None]] = field(default_factory=dict)
    _sinks: dict[str, tuple[int, PcapSink]] = field(default_factory=dict)
    _closed: list[PcapSink] = field(default_factory=list)
    finalized: bool = False

    @property
    def rotation_us(self) -> int:
        return int(round(self.config.rotation_interval * 1_000_000))

    def file_name(self, direction: str, slot: int) -> str:
        return f"{self.node}_{self.interface}_{direction}_{slot}.pcap"

    def _sink(self, direction: str, slot: int) -> PcapSink:
        current = self._sinks.get(direction)
        if current is not None and current[0] == slot:
            return current[1]
        if current is not None:
            if slot < current[0]:
                raise ValueError(f"{self.node}/{self.interface}: record for slot {slot} after slot {current[0]}")
            current[1].close()
            self._closed.append(current[1])
        sink = PcapSink(self.directory / self.file_name(direction, slot), self.config.snaplen)
        self.tags[sink.path.name] = []
        self._sinks[direction] = (slot, sink)
        return sink


def attach(f: "Fabric", iface: tuple[str, str], prog: HookProgram, cfg: CaptureConfig, split: bool = True) -> TapHandle:
    """Load ``prog`` on interface ``iface`` = (node, name) and open its capture streams.

    Raises
    ------
    UnknownInterface
        The fabric has no such interface.
    AlreadyAttached
        A hook is already loaded there.
    """
    itf = f.interface(*iface)
    if itf.tap is not None:
        raise AlreadyAttached(f"{iface[0]}/{iface[1]} already has hook {itf.tap.program.name!r}")
    if f.capture_root is None:
        raise ValueError("fabric has no capture_root; pass one to build_fabric to record captures")
    directory = cfg.directory(f.capture_root, itf.node)
    directory.mkdir(parents=True, exist_ok=True)
    tap = TapHandle(itf.node, itf.name, prog, cfg, directory, split)
    itf.tap = tap
    log.debug("attached %s on %s/%s", prog.name, itf.node, itf.name)
    return tap


def record(tap: TapHandle, p: Packet, direction: Direction, ts_us: int | None = None) -> None:
    """Append ``p`` to the stream of (direction, ⌊ts / rotation_interval⌋).

    ``ts_us`` overrides the packet timestamp (the hop time on a multi-hop path).
    """
    ts = p.ts_us if ts_us is None else int(ts_us)
    if tap.finalized:
        raise ValueError(f"tap {tap.node}/{tap.interface} is finalized")
    d = direction.value if tap.split else Direction.BOTH.value
    slot = ts // tap.rotation_us
    sink = tap._sink(d, slot)
    sink.write(ts, p.wire())
    tap.tags[sink.path.name].append(p.tag)
    key = (d, slot)
    tap.counts[key] = tap.counts.get(key, 0) + 1


def finalize(tap: TapHandle, horizon_us: int = 0) -> list[PcapFile]:
    """Flush and close every stream; returns the inventory sorted by (direction, slot).

    Every slot in ``[0, ceil(horizon / rotation_interval))`` gets a file per
    direction even when nothing was recorded in it (24-byte header-only file).
    """
    if not tap.finalized:
        for _, sink in tap._sinks.values():
            sink.close()
            tap._closed.append(sink)
        tap._sinks.clear()
        last = max((slot for _, slot in tap.counts), default=-1)
        n_slots = max(1, math.ceil(horizon_us / tap.rotation_us), last + 1)
        directions = (Direction.INGRESS.value, Direction.EGRESS.value) if tap.split else (Direction.BOTH.value,)
        for d in directions:
            for slot in range(n_slots):
                if (d, slot) not in tap.counts:
                    PcapSink(tap.directory / tap.file_name(d, slot), tap.config.snaplen).close()
                    tap.tags[tap.file_name(d, slot)] = []
        tap.finalized = True

    out = []
    for name in sorted(tap.tags):
        path = tap.directory / name
        stem = name[: -len(".pcap")]
        direction, slot = stem.rsplit("_", 2)[-2:]
        out.append(PcapFile(
            path=path,
            node=tap.node,
            interface=tap.interface,
            direction=direction,
            slot=int(slot),
            packet_count=len(tap.tags[name]),
            sha256=file_sha256(path),
            size=path.stat().st_size,
        ))
    out.sort(key=lambda pf: (pf.direction, pf.slot))
    return out
