from __future__ import annotations

import dataclasses
import heapq
import ipaddress
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable

from .errors import UnknownInterface
from .hooks import Action, Direction, HookProgram, TapHandle, attach, record
from .interfaces import Host
from .packets import Packet, mac_for
from .scenario import (
    BRIDGE_IFACE,
    DATAPATH_IFACE,
    STORAGE_IFACE,
    NodeRole,
    Scenario,
    pod_addresses,
    pod_iface,
)
from .seeding import POD_STREAM, stream_rng

__all__ = [
    "InterfaceKind",
    "Interface",
    "EventStats",
    "Fabric",
    "build_fabric",
    "inject",
    "run_until",
    "open_connection",
    "HOP_US",
]

log = logging.getLogger(__name__)

HOP_US = 200  # per-hop latency, no jitter
OVERLAY_HOPS = 6
STORAGE_HOPS = 2
BROADCAST_MAC = "ff:ff:ff:ff:ff:ff"


class InterfaceKind(str, Enum):
    VETH_DATAPATH = "VethDatapath"
    VETH_BRIDGE = "VethBridge"
    POD_ETH = "PodEth"
    STORAGE_PLANE = "StoragePlane"


@dataclass(eq=False)
class Interface:
    node: str
    name: str
    kind: InterfaceKind
    pod: str | None = None
    tap: TapHandle | None = None
    overlay_packets: int = 0
    storage_packets: int = 0

    @property
    def id(self) -> tuple[str, str]:
        return (self.node, self.name)


@dataclass
class EventStats:
    injected: int = 0
    delivered: int = 0
    dropped: int = 0
    hook_invocations: int = 0


class Fabric:
    """Discrete-event model of the overlay data path and the storage plane.

    Time is an integer microsecond clock. Events live in a heap ordered by
    (ts, seq) with seq strictly increasing at insertion, so ties run in
    insertion order and a run is a pure function of the scenario.
    """

    def __init__(self, scenario: Scenario, capture_root: str | Path | None = None):
        self.scenario = scenario
        self.capture_root = None if capture_root is None else Path(capture_root)
        self.interfaces: dict[tuple[str, str], Interface] = {}
        self.routes: dict[str, tuple[str, str]] = {}  # overlay ip -> (node, pod)
        self.pod_ips: dict[str, str] = {}
        self.pod_macs: dict[str, str] = {}
        self.hosts: dict[str, Host] = {}
        self.storage_routes: dict[str, str] = {}  # storage-plane ip -> node
        self.storage_endpoints: dict[str, Host] = {}
        self.taps: list[TapHandle] = []
        self.trace: list[Packet] | None = None  # every transmitted overlay frame, when enabled
        self.clock_us = 0
        self.stats = EventStats()
        self.rng = stream_rng(scenario.seed, 0)
        self._queue: list[tuple[int, int, Callable[[Any], None], Any]] = []
        self._seq = itertools.count()
        self._ip_to_mac: dict[str, str] = {}
        self._overlay_nets = [
            ipaddress.IPv4Network(n.overlay_subnet) for n in scenario.nodes if n.overlay_subnet
        ]
        self._plane: dict[str, bool] = {}

    # ---- lookup
    def interface(self, node: str, name: str) -> Interface:
        try:
            return self.interfaces[(node, name)]
        except KeyError:
            raise UnknownInterface(f"no interface {name!r} on node {node!r}") from None

    def host(self, pod: str) -> Host:
        return self.hosts[pod]

    def mac_for_ip(self, ip: str) -> str:
        return self._ip_to_mac.get(ip, BROADCAST_MAC)

    def is_overlay(self, ip: str) -> bool:
        hit = self._plane.get(ip)
        if hit is None:
            addr = ipaddress.IPv4Address(ip)
            hit = self._plane[ip] = any(addr in net for net in self._overlay_nets)
        return hit

    # ---- events
    def schedule(self, ts_us: int, fn: Callable[[Any], None], arg: Any = None) -> None:
        if ts_us < self.clock_us:
            raise ValueError(f"cannot schedule at {ts_us} µs, clock is at {self.clock_us} µs")
        heapq.heappush(self._queue, (int(ts_us), next(self._seq), fn, arg))

    def pending(self) -> int:
        return len(self._queue)

    def inject(self, from_pod: str, p: Packet) -> None:
        if from_pod not in self.pod_ips:
            raise KeyError(f"unknown pod {from_pod!r}")
        if p.origin is None:
            p.origin = from_pod
        elif p.origin != from_pod:
            raise ValueError(f"packet origin {p.origin!r} does not match sender {from_pod!r}")
        self.schedule(p.ts_us, self._transmit, (from_pod, p))

    def inject_storage(self, from_node: str, p: Packet) -> None:
        """Send a storage-plane frame from ``from_node``'s data0 interface."""
        self.schedule(p.ts_us, self._transmit_storage, (from_node, p))

    def run_until(self, t_us: int) -> EventStats:
        t_us = int(t_us)
        if t_us < self.clock_us:
            raise ValueError(f"run_until({t_us}) is before the clock ({self.clock_us})")
        q = self._queue
        while q and q[0][0] < t_us:
            ts, _, fn, arg = heapq.heappop(q)
            self.clock_us = ts
            fn(arg)
        self.clock_us = t_us
        return dataclasses.replace(self.stats)

    def quiesce(self) -> int:
        """Discard every pending event (end of the capture phase); returns how many."""
        n = len(self._queue)
        self._queue.clear()
        if n:
            log.debug("discarded %d pending event(s) at %d µs", n, self.clock_us)
        return n

    def drain(self) -> EventStats:
        """Run until the queue is empty."""
        while self._queue:
            self.run_until(self._queue[0][0] + 1)
        return dataclasses.replace(self.stats)

    # ---- data path
    def _hop(self, itf: Interface, p: Packet, ts_us: int, direction: Direction) -> Action:
        overlay = p.l3 is None or self.is_overlay(p.l3.src)
        if overlay:
            itf.overlay_packets += 1
        else:
            itf.storage_packets += 1
        tap = itf.tap
        if tap is None:
            return Action.PASS
        tap.invocations += 1
        self.stats.hook_invocations += 1
        # capture precedes the verdict
        record(tap, p, direction, ts_us)
        verdict = tap.program.verdict_fn(p)
        if verdict.action is Action.REDIRECT:
            target = self.interfaces.get(verdict.target)
            if target is None or target.kind is not InterfaceKind.POD_ETH:
                log.warning("redirect from %s/%s to %s is not a pod interface; dropping",
                            itf.node, itf.name, verdict.target)
                return Action.DROP
            self.schedule(ts_us + HOP_US, self._deliver, (target.pod, p))
        return verdict.action

    def _transmit(self, arg: tuple[str, Packet]) -> None:
        from_pod, p = arg
        self.stats.injected += 1
        if self.trace is not None:
            self.trace.append(p)
        route = self.routes.get(p.l3.dst) if p.l3 is not None else None
        if route is None:
            self.stats.dropped += 1
            log.debug("unroutable frame from %s to %s", from_pod, p.l3.dst if p.l3 else None)
            return
        src_node, _ = self.routes[self.pod_ips[from_pod]]
        dst_node, dst_pod = route
        path = (
            self.interfaces[(src_node, pod_iface(from_pod))],
            self.interfaces[(src_node, DATAPATH_IFACE)],
            self.interfaces[(src_node, BRIDGE_IFACE)],
            self.interfaces[(dst_node, BRIDGE_IFACE)],
            self.interfaces[(dst_node, DATAPATH_IFACE)],
            self.interfaces[(dst_node, pod_iface(dst_pod))],
        )
        pkt = p
        for k, itf in enumerate(path):
            if k == 3:
                # TTL drops once when the frame crosses between bridges
                pkt = dataclasses.replace(p, l3=dataclasses.replace(p.l3, ttl=p.l3.ttl - 1))
            action = self._hop(itf, pkt, p.ts_us + k * HOP_US,
                               Direction.EGRESS if k < 3 else Direction.INGRESS)
            if action is Action.DROP:
                self.stats.dropped += 1
                return
            if action is Action.REDIRECT:
                self.stats.delivered += 1
                return
        self.stats.delivered += 1
        self.schedule(p.ts_us + OVERLAY_HOPS * HOP_US, self._deliver, (dst_pod, pkt))

    def _transmit_storage(self, arg: tuple[str, Packet]) -> None:
        from_node, p = arg
        self.stats.injected += 1
        dst_node = self.storage_routes.get(p.l3.dst) if p.l3 is not None else None
        if dst_node is None or dst_node not in self.storage_endpoints:
            self.stats.dropped += 1
            return
        path = (self.interfaces[(from_node, STORAGE_IFACE)], self.interfaces[(dst_node, STORAGE_IFACE)])
        for k, itf in enumerate(path):
            action = self._hop(itf, p, p.ts_us + k * HOP_US,
                               Direction.EGRESS if k == 0 else Direction.INGRESS)
            if action is not Action.PASS:
                self.stats.dropped += 1
                return
        self.stats.delivered += 1
        self.schedule(p.ts_us + STORAGE_HOPS * HOP_US, self._deliver_storage, (dst_node, p))

    def _deliver(self, arg: tuple[str, Packet]) -> None:
        pod, p = arg
        self.hosts[pod].receive(p)

    def _deliver_storage(self, arg: tuple[str, Packet]) -> None:
        node, p = arg
        self.storage_endpoints[node].receive(p)

    # ---- plane accounting
    def plane_counters(self) -> dict[tuple[str, str], tuple[int, int]]:
        """(overlay_packets, storage_packets) per interface."""
        return {k: (i.overlay_packets, i.storage_packets) for k, i in self.interfaces.items()}


def build_fabric(s: Scenario, capture_root: str | Path | None = None, trace: bool = False) -> Fabric:
    """Instantiate interfaces, routes and hosts for ``s`` and attach its capture taps.

    ``capture_root`` is the directory the CaptureConfig output_dir template is
    resolved against; it is required when the scenario declares taps.
    ``trace=True`` keeps every transmitted overlay frame in ``f.trace``.
    """
    from .tcp import ClientHost
    from .victims import VictimHost, victim_state_for

    f = Fabric(s, capture_root)
    if trace:
        f.trace = []
    for node in s.nodes:
        if node.role is not NodeRole.STORAGE or node.overlay_subnet is not None:
            for name, kind in ((DATAPATH_IFACE, InterfaceKind.VETH_DATAPATH),
                               (BRIDGE_IFACE, InterfaceKind.VETH_BRIDGE)):
                f.interfaces[(node.name, name)] = Interface(node.name, name, kind)
        if node.storage_plane_addr is not None:
            f.interfaces[(node.name, STORAGE_IFACE)] = Interface(node.name, STORAGE_IFACE, InterfaceKind.STORAGE_PLANE)
            f.storage_routes[node.storage_plane_addr] = node.name

    ips = pod_addresses(s)
    for index, pod in enumerate(s.pods):
        ip = ips[pod.name]
        mac = mac_for(pod.node, pod.name)
        f.pod_ips[pod.name] = ip
        f.pod_macs[pod.name] = mac
        f._ip_to_mac[ip] = mac
        f.routes[ip] = (pod.node, pod.name)
        f.interfaces[(pod.node, pod_iface(pod.name))] = Interface(
            pod.node, pod_iface(pod.name), InterfaceKind.POD_ETH, pod=pod.name
        )
        rng = stream_rng(s.seed, POD_STREAM, index)
        if pod.is_victim:
            f.hosts[pod.name] = VictimHost(f, pod, ip, mac, rng, victim_state_for(s, pod, rng))
        else:
            f.hosts[pod.name] = ClientHost(f, pod, ip, mac, rng)

    for tap in s.capture.taps:
        f.taps.append(attach(f, (tap.node, tap.interface), HookProgram(), s.capture, split=tap.split))
    log.info("fabric: %d pods, %d interfaces, %d taps", len(f.pod_ips), len(f.interfaces), len(f.taps))
    return f


def inject(f: Fabric, from_pod: str, p: Packet) -> None:
    f.inject(from_pod, p)


def run_until(f: Fabric, t: float) -> EventStats:
    """Process every event with ts < t (seconds) and advance the clock to t."""
    return f.run_until(int(round(t * 1_000_000)))


def open_connection(f: Fabric, client: str, server: str, dport: int, listener=None):
    """Start a three-way handshake from ``client`` to ``server:dport``."""
    return f.host(client).connect(f.pod_ips[server], dport, listener)
