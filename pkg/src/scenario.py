from __future__ import annotations

import ipaddress
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

import yaml

from .errors import ScenarioError, SubnetExhausted
from .hooks import CaptureConfig, TapSpec
from .seeding import UINT64_MAX

__all__ = [
    "NodeRole",
    "ImageRole",
    "AttackType",
    "SchedulePolicy",
    "NodeSpec",
    "PodSpec",
    "AttackSpec",
    "Scenario",
    "Violation",
    "AttackWindow",
    "parse_scenario",
    "serialize_scenario",
    "validate",
    "flow_matrix",
    "attack_windows",
    "horizon_us",
    "target_port",
    "pod_addresses",
]

US = 1_000_000

SEQUENTIAL_GAP_S = 5.0
DEFAULT_DURATION_S = 60.0
# Responses and teardown trail an attack's last generated packet by a few
# milliseconds; labels use [start, end + grace). Must stay below the gap.
LABEL_GRACE_S = 1.0

DATAPATH_IFACE = "vethwe-datapath"
BRIDGE_IFACE = "vethwe-bridge"
STORAGE_IFACE = "data0"


def pod_iface(pod: str) -> str:
    """Name of a pod's PodEth interface."""
    return f"{pod}-eth0"


class NodeRole(str, Enum):
    MASTER = "Master"
    WORKER = "Worker"
    STORAGE = "Storage"


class ImageRole(str, Enum):
    HPING3 = "Hping3"
    HULK = "Hulk"
    SLOWHTTPTEST = "Slowhttptest"
    HYDRA = "Hydra"
    METASPLOIT = "Metasploit"
    NGINX = "NginxServer"
    APACHE = "ApacheServer"
    MYSQL = "MySQLServer"
    HEARTBLEED_APACHE = "HeartbleedApache"
    BENIGN_CLIENT = "BenignClient"


class AttackType(str, Enum):
    TCP_SYN_FLOOD = "TcpSynFlood"
    ICMP_FLOOD = "IcmpFlood"
    TCP_SEQ_PREDICTION = "TcpSeqPrediction"
    HULK_GET = "HulkGet"
    SLOWLORIS = "Slowloris"
    SLOW_BODY = "SlowBody"
    SLOW_READ = "SlowRead"
    SLOW_RANGE = "SlowRange"
    BRUTE_FORCE = "BruteForce"
    HEARTBLEED = "Heartbleed"
    BENIGN = "Benign"


class SchedulePolicy(str, Enum):
    SEQUENTIAL = "Sequential"
    AS_SPECIFIED = "AsSpecified"


# Tool column of the attack catalog: which image may run which attack.
TOOL_ATTACKS: dict[ImageRole, frozenset[AttackType]] = {
    ImageRole.HPING3: frozenset(
        {AttackType.TCP_SYN_FLOOD, AttackType.ICMP_FLOOD, AttackType.TCP_SEQ_PREDICTION}
    ),
    ImageRole.HULK: frozenset({AttackType.HULK_GET}),
    ImageRole.SLOWHTTPTEST: frozenset(
        {AttackType.SLOWLORIS, AttackType.SLOW_BODY, AttackType.SLOW_READ, AttackType.SLOW_RANGE}
    ),
    ImageRole.HYDRA: frozenset({AttackType.BRUTE_FORCE}),
    ImageRole.METASPLOIT: frozenset({AttackType.HEARTBLEED}),
    ImageRole.BENIGN_CLIENT: frozenset({AttackType.BENIGN}),
}

CLIENT_ROLES = frozenset(TOOL_ATTACKS)
VICTIM_ROLES = frozenset(
    {ImageRole.NGINX, ImageRole.APACHE, ImageRole.MYSQL, ImageRole.HEARTBLEED_APACHE}
)
DEFAULT_PORTS: dict[ImageRole, tuple[int, ...]] = {
    ImageRole.NGINX: (80,),
    ImageRole.APACHE: (80,),
    ImageRole.MYSQL: (3306,),
    ImageRole.HEARTBLEED_APACHE: (443,),
}


def _plain(value: Any) -> Any:
    """Tuples → lists, numpy scalars → Python scalars (YAML-safe, comparable)."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return value.item()
    return value


@dataclass(frozen=True)
class NodeSpec:
    name: str
    role: NodeRole
    overlay_subnet: str | None = None
    storage_plane_addr: str | None = None


@dataclass(frozen=True)
class PodSpec:
    name: str
    image_role: ImageRole
    node: str
    ip: str | None = None
    ports: tuple[int, ...] | None = None

    def __post_init__(self):
        ports = self.ports
        if ports is None:
            ports = DEFAULT_PORTS.get(self.image_role, ())
        object.__setattr__(self, "ports", tuple(int(p) for p in ports))

    @property
    def is_victim(self) -> bool:
        return self.image_role in VICTIM_ROLES


@dataclass(frozen=True)
class AttackSpec:
    attack_type: AttackType
    attacker: str
    victim: str
    start: float = 0.0
    duration: float = DEFAULT_DURATION_S
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "duration", float(self.duration))
        object.__setattr__(self, "params", _plain(dict(self.params)))

    @property
    def is_benign(self) -> bool:
        return self.attack_type is AttackType.BENIGN


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[NodeSpec, ...]
    pods: tuple[PodSpec, ...] = ()
    attacks: tuple[AttackSpec, ...] = ()
    capture: CaptureConfig = field(default_factory=CaptureConfig)
    seed: int = 0
    schedule_policy: SchedulePolicy = SchedulePolicy.SEQUENTIAL

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "pods", tuple(self.pods))
        object.__setattr__(self, "attacks", tuple(self.attacks))

    def node(self, name: str) -> NodeSpec:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def pod(self, name: str) -> PodSpec:
        for p in self.pods:
            if p.name == name:
                return p
        raise KeyError(name)

    def pods_on(self, node: str) -> list[PodSpec]:
        return [p for p in self.pods if p.node == node]

    def storage_node(self) -> NodeSpec:
        nodes = [n for n in self.nodes if n.role is NodeRole.STORAGE]
        if len(nodes) != 1:
            raise ValueError(f"expected exactly one Storage node, found {len(nodes)}")
        return nodes[0]

    def with_seed(self, seed: int) -> "Scenario":
        return Scenario(self.nodes, self.pods, self.attacks, self.capture, int(seed), self.schedule_policy)

    def with_capture(self, capture: CaptureConfig) -> "Scenario":
        return Scenario(self.nodes, self.pods, self.attacks, capture, self.seed, self.schedule_policy)


@dataclass(frozen=True, order=True)
class Violation:
    code: str
    element: str
    message: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.code} [{self.element}] {self.message}".rstrip()


# ----------------------------
# Schedule
# ----------------------------

@dataclass(frozen=True)
class AttackWindow:
    """Effective window of one AttackSpec (µs, simulated clock)."""

    index: int
    spec: AttackSpec
    start_us: int
    end_us: int

    @property
    def label_end_us(self) -> int:
        return self.end_us + int(LABEL_GRACE_S * US)

    def covers(self, ts_us: int) -> bool:
        return self.start_us <= ts_us < self.label_end_us


def attack_windows(s: Scenario) -> list[AttackWindow]:
    """Effective windows in declaration order.

    Under Sequential the malicious attacks are laid out back to back with a
    fixed gap, starting at the first malicious attack's declared start.
    Benign entries always keep their declared window.
    """
    out: list[AttackWindow] = []
    cursor: float | None = None
    for i, a in enumerate(s.attacks):
        start = a.start
        if s.schedule_policy is SchedulePolicy.SEQUENTIAL and not a.is_benign:
            if cursor is not None:
                start = cursor
            cursor = start + a.duration + SEQUENTIAL_GAP_S
        start_us = int(round(start * US))
        out.append(AttackWindow(i, a, start_us, start_us + int(round(a.duration * US))))
    return out


def horizon_us(s: Scenario) -> int:
    """Simulated end of a scenario run: last window end plus one gap."""
    windows = attack_windows(s)
    if not windows:
        return 0
    return max(w.end_us for w in windows) + int(SEQUENTIAL_GAP_S * US)


def pod_addresses(s: Scenario) -> dict[str, str]:
    """Overlay address of every pod.

    Explicit addresses are kept; the rest are handed out from .2 upward
    (``.1`` is the node bridge) in declaration order.
    """
    out: dict[str, str] = {}
    taken: dict[str, set[str]] = {}
    for p in s.pods:
        if p.ip is not None:
            out[p.name] = p.ip
            taken.setdefault(p.node, set()).add(p.ip)
    for node in s.nodes:
        if node.overlay_subnet is None:
            continue
        net = ipaddress.IPv4Network(node.overlay_subnet)
        used = taken.setdefault(node.name, set())
        free = (str(net.network_address + i) for i in range(2, net.num_addresses - 1))
        for p in s.pods:
            if p.node != node.name or p.name in out:
                continue
            for ip in free:
                if ip not in used:
                    out[p.name] = ip
                    used.add(ip)
                    break
            else:
                raise SubnetExhausted(f"no free address left in {net} for pod {p.name!r}")
    return out


def target_port(spec: AttackSpec, victim: PodSpec) -> int | None:
    """L4 port an attack aims at (None for ICMP)."""
    if spec.attack_type is AttackType.ICMP_FLOOD:
        return None
    if "dport" in spec.params:
        return int(spec.params["dport"])
    return victim.ports[0] if victim.ports else None


def flow_matrix(s: Scenario, include_benign: bool = False) -> frozenset[tuple[str, str, AttackType]]:
    """(attacker pod, victim pod, attack type) per attack entry."""
    return frozenset(
        (a.attacker, a.victim, a.attack_type)
        for a in s.attacks
        if include_benign or not a.is_benign
    )


# ----------------------------
# Validation
# ----------------------------

def _network(cidr: str | None):
    try:
        return ipaddress.IPv4Network(cidr, strict=True)
    except (ValueError, TypeError):
        return None


def _address(addr: str | None):
    try:
        return ipaddress.IPv4Address(addr)
    except (ValueError, TypeError):
        return None


def _interfaces_of(s: Scenario, node: NodeSpec) -> set[str]:
    overlay = node.role is not NodeRole.STORAGE or node.overlay_subnet is not None
    names = {DATAPATH_IFACE, BRIDGE_IFACE} if overlay else set()
    names |= {pod_iface(p.name) for p in s.pods if p.node == node.name}
    if node.storage_plane_addr is not None:
        names.add(STORAGE_IFACE)
    return names


def _duplicates(names: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    dup: list[str] = []
    for n in names:
        if n in seen and n not in dup:
            dup.append(n)
        seen.add(n)
    return dup


def validate(s: Scenario) -> list[Violation]:
    """Collect every invariant violation (exhaustive, never raises).

    The result is sorted, so it does not depend on the order of pods/attacks.
    """
    from .generators import GeneratorConfig  # local: generators import this module

    out: list[Violation] = []
    add = lambda code, element, msg="": out.append(Violation(code, element, msg))  # noqa: E731

    if not 0 <= int(s.seed) <= UINT64_MAX:
        add("InvalidSeed", "seed", f"{s.seed} is not a 64-bit unsigned integer")

    # -- nodes
    for name in _duplicates(n.name for n in s.nodes):
        add("DuplicateName", f"node:{name}")
    nodes = {n.name: n for n in s.nodes}
    storage = [n for n in s.nodes if n.role is NodeRole.STORAGE]
    if len(storage) != 1:
        add("StorageNodeCount", "nodes", f"expected exactly one Storage node, found {len(storage)}")

    subnets: dict[str, ipaddress.IPv4Network] = {}
    for n in s.nodes:
        if n.overlay_subnet is None:
            if n.role is not NodeRole.STORAGE:
                add("MissingSubnet", f"node:{n.name}", "Master/Worker nodes need an overlay subnet")
            continue
        net = _network(n.overlay_subnet)
        if net is None:
            add("InvalidAddress", f"node:{n.name}", f"bad CIDR {n.overlay_subnet!r}")
        elif net.prefixlen != 24:
            add("SubnetPrefix", f"node:{n.name}", f"{net} is not a /24")
        else:
            subnets[n.name] = net
    names = sorted(subnets)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if subnets[a].overlaps(subnets[b]):
                add("SubnetOverlap", f"node:{a}|node:{b}", f"{subnets[a]} overlaps {subnets[b]}")

    storage_addrs: list[str] = []
    for n in s.nodes:
        if n.storage_plane_addr is None:
            if n.role is NodeRole.STORAGE:
                add("MissingStorageAddr", f"node:{n.name}", "the Storage node needs a storage-plane address")
            continue
        addr = _address(n.storage_plane_addr)
        if addr is None:
            add("InvalidAddress", f"node:{n.name}", f"bad address {n.storage_plane_addr!r}")
            continue
        storage_addrs.append(str(addr))
        for owner, net in subnets.items():
            if addr in net:
                add("StorageAddrInOverlay", f"node:{n.name}", f"{addr} lies inside {owner}'s {net}")
    for addr in _duplicates(storage_addrs):
        add("DuplicateAddress", f"storage:{addr}")

    # -- pods
    for name in _duplicates(p.name for p in s.pods):
        add("DuplicateName", f"pod:{name}")
    pods = {p.name: p for p in s.pods}
    pod_ips: list[str] = []
    for p in s.pods:
        el = f"pod:{p.name}"
        node = nodes.get(p.node)
        if node is None:
            add("UnknownNode", el, f"node {p.node!r} does not exist")
        elif node.role is NodeRole.STORAGE:
            add("PlacementOnStorage", el, "pods cannot run on the Storage node")
        if p.ip is not None:
            addr = _address(p.ip)
            net = subnets.get(p.node)
            if addr is None:
                add("InvalidAddress", el, f"bad address {p.ip!r}")
            else:
                pod_ips.append(str(addr))
                if net is not None and addr not in net:
                    add("AddressOutsideSubnet", el, f"{addr} is outside {net}")
                elif net is not None and int(addr) - int(net.network_address) in (0, 1, 255):
                    add("ReservedAddress", el, f"{addr} is reserved (network/bridge/broadcast)")
        if p.image_role in CLIENT_ROLES and p.ports:
            add("PortExposure", el, f"{p.image_role.value} pods expose no ports")
        if p.image_role in VICTIM_ROLES and not p.ports:
            add("PortExposure", el, f"{p.image_role.value} pods expose at least one port")
        if any(not 0 < port < 65536 for port in p.ports):
            add("InvalidPort", el, f"ports {list(p.ports)}")
    for ip in _duplicates(pod_ips):
        add("DuplicateAddress", f"ip:{ip}")

    # -- attacks
    windows = attack_windows(s)
    for w in windows:
        a = w.spec
        el = f"attack:{w.index}:{a.attack_type.value}:{a.attacker}->{a.victim}"
        attacker, victim = pods.get(a.attacker), pods.get(a.victim)
        if attacker is None:
            add("UnknownPod", el, f"attacker {a.attacker!r} does not exist")
        if victim is None:
            add("UnknownPod", el, f"victim {a.victim!r} does not exist")
        if a.attacker == a.victim:
            add("SelfAttack", el)
        if a.duration <= 0 or not math.isfinite(a.duration):
            add("NonPositiveDuration", el, f"duration {a.duration}")
        if a.start < 0 or not math.isfinite(a.start):
            add("NegativeStart", el, f"start {a.start}")
        if attacker is not None and a.attack_type not in TOOL_ATTACKS.get(attacker.image_role, ()):
            add("ToolMismatch", el, f"{attacker.image_role.value} cannot run {a.attack_type.value}")
        if victim is not None:
            if not victim.is_victim:
                add("NotAVictim", el, f"{victim.name} is a {victim.image_role.value}")
            try:
                port = target_port(a, victim)
            except (TypeError, ValueError):
                pass  # reported as InvalidParam below
            else:
                if a.attack_type is not AttackType.ICMP_FLOOD and port not in victim.ports:
                    add("VictimPortClosed", el, f"{victim.name} does not expose port {port}")
        hijack = a.params.get("hijack_client")
        if hijack is not None and str(hijack) not in pods:
            add("UnknownPod", el, f"hijack client {hijack!r} does not exist")
        for code, problem in GeneratorConfig.check_params(a.attack_type, a.params):
            add(code, el, problem)

    # same pair, overlapping windows → labels could not tell them apart
    by_pair: dict[frozenset, list[AttackWindow]] = {}
    for w in windows:
        by_pair.setdefault(frozenset((w.spec.attacker, w.spec.victim)), []).append(w)
    for group in by_pair.values():
        for i, first in enumerate(group):
            for second in group[i + 1:]:
                if first.spec.is_benign and second.spec.is_benign:
                    continue
                if first.start_us < second.label_end_us and second.start_us < first.label_end_us:
                    add(
                        "OverlappingPair",
                        f"attack:{first.index}|attack:{second.index}",
                        "same attacker/victim pair with overlapping windows",
                    )

    # -- capture
    cap = s.capture
    if not cap.rotation_interval > 0:
        add("InvalidRotation", "capture", f"rotation_interval {cap.rotation_interval}")
    if not 0 < cap.snaplen <= 262144:
        add("InvalidSnaplen", "capture", f"snaplen {cap.snaplen}")
    for key in _duplicates(f"{t.node}/{t.interface}" for t in cap.taps):
        add("DuplicateTap", f"tap:{key}")
    for t in cap.taps:
        el = f"tap:{t.node}/{t.interface}"
        node = nodes.get(t.node)
        if node is None:
            add("UnknownNode", el, f"node {t.node!r} does not exist")
            continue
        if t.interface not in _interfaces_of(s, node):
            add("UnknownInterface", el, f"{t.node} has no interface {t.interface!r}")
        if t.interface == STORAGE_IFACE:
            add("TapOnStoragePlane", el, "the storage plane is never captured")
        if node.storage_plane_addr is None:
            add("TapWithoutStoragePlane", el, "captures must be transferable to storage")

    return sorted(set(out))


# ----------------------------
# Scenario file (YAML) round-trip
# ----------------------------

_TOP_KEYS = ("seed", "schedule_policy", "nodes", "pods", "attacks", "capture")


def _enum(cls, value, where: str):
    try:
        return cls(value)
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise ScenarioError(f"{where}: unknown {cls.__name__} {value!r} (expected one of: {allowed})") from None


def _require(entry: Any, keys: tuple[str, ...], where: str) -> dict:
    if not isinstance(entry, dict):
        raise ScenarioError(f"{where}: expected a mapping, got {type(entry).__name__}")
    missing = [k for k in keys if k not in entry]
    if missing:
        raise ScenarioError(f"{where}: missing key(s) {missing}")
    return entry


def _cast(cast, value, where: str):
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}: expected {cast.__name__}, got {value!r}") from None


def _list(doc: dict, key: str) -> list:
    value = doc.get(key) or []
    if not isinstance(value, list):
        raise ScenarioError(f"{key}: expected a list")
    return value


def parse_scenario(text: str) -> Scenario:
    """Parse scenario-file contents (YAML) into a Scenario.

    Raises
    ------
    ScenarioError
        Syntax errors carry the line/column reported by the YAML parser;
        structural errors name the offending element (unknown enum variant,
        duplicate name, reference to an undefined node or pod).
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None) or getattr(e, "context_mark", None)
        problem = getattr(e, "problem", None) or str(e)
        if mark is not None:
            raise ScenarioError(f"syntax error: {problem}", mark.line + 1, mark.column + 1) from None
        raise ScenarioError(f"syntax error: {problem}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be a mapping")
    unknown = sorted(set(doc) - set(_TOP_KEYS))
    if unknown:
        raise ScenarioError(f"unknown top-level key(s) {unknown}")
    if "nodes" not in doc:
        raise ScenarioError("missing top-level key 'nodes'")

    nodes = []
    for i, e in enumerate(_list(doc, "nodes")):
        e = _require(e, ("name", "role"), f"nodes[{i}]")
        nodes.append(NodeSpec(
            name=str(e["name"]),
            role=_enum(NodeRole, e["role"], f"nodes[{i}].role"),
            overlay_subnet=None if e.get("overlay_subnet") is None else str(e["overlay_subnet"]),
            storage_plane_addr=None if e.get("storage_plane_addr") is None else str(e["storage_plane_addr"]),
        ))
    node_names = [n.name for n in nodes]
    for dup in _duplicates(node_names):
        raise ScenarioError(f"duplicate node name {dup!r}")

    pods = []
    for i, e in enumerate(_list(doc, "pods")):
        e = _require(e, ("name", "image_role", "node"), f"pods[{i}]")
        if str(e["node"]) not in node_names:
            raise ScenarioError(f"pods[{i}]: pod {e['name']!r} placed on undefined node {e['node']!r}")
        ports = e.get("ports")
        if ports is not None and not isinstance(ports, list):
            raise ScenarioError(f"pods[{i}].ports: expected a list, got {ports!r}")
        pods.append(PodSpec(
            name=str(e["name"]),
            image_role=_enum(ImageRole, e["image_role"], f"pods[{i}].image_role"),
            node=str(e["node"]),
            ip=None if e.get("ip") is None else str(e["ip"]),
            ports=None if ports is None else tuple(_cast(int, p, f"pods[{i}].ports[{k}]") for k, p in enumerate(ports)),
        ))
    pod_names = [p.name for p in pods]
    for dup in _duplicates(pod_names):
        raise ScenarioError(f"duplicate pod name {dup!r}")

    attacks = []
    for i, e in enumerate(_list(doc, "attacks")):
        e = _require(e, ("attack_type", "attacker", "victim"), f"attacks[{i}]")
        for role in ("attacker", "victim"):
            if str(e[role]) not in pod_names:
                raise ScenarioError(f"attacks[{i}]: {role} references undefined pod {e[role]!r}")
        params = e.get("params") or {}
        if not isinstance(params, dict):
            raise ScenarioError(f"attacks[{i}].params: expected a mapping")
        attacks.append(AttackSpec(
            attack_type=_enum(AttackType, e["attack_type"], f"attacks[{i}].attack_type"),
            attacker=str(e["attacker"]),
            victim=str(e["victim"]),
            start=_cast(float, e.get("start", 0.0), f"attacks[{i}].start"),
            duration=_cast(float, e.get("duration", DEFAULT_DURATION_S), f"attacks[{i}].duration"),
            params=params,
        ))

    cap_doc = doc.get("capture") or {}
    if not isinstance(cap_doc, dict):
        raise ScenarioError("capture: expected a mapping")
    taps = []
    if not isinstance(cap_doc.get("taps") or [], list):
        raise ScenarioError("capture.taps: expected a list")
    for i, t in enumerate(cap_doc.get("taps") or []):
        t = _require(t, ("node", "interface"), f"capture.taps[{i}]")
        taps.append(TapSpec(str(t["node"]), str(t["interface"]), bool(t.get("split", True))))
    defaults = CaptureConfig()
    capture = CaptureConfig(
        taps=tuple(taps),
        rotation_interval=_cast(float, cap_doc.get("rotation_interval", defaults.rotation_interval),
                                "capture.rotation_interval"),
        snaplen=_cast(int, cap_doc.get("snaplen", defaults.snaplen), "capture.snaplen"),
        output_dir=str(cap_doc.get("output_dir", defaults.output_dir)),
    )

    seed = _cast(int, doc.get("seed", 0), "seed")

    return Scenario(
        nodes=tuple(nodes),
        pods=tuple(pods),
        attacks=tuple(attacks),
        capture=capture,
        seed=seed,
        schedule_policy=_enum(SchedulePolicy, doc.get("schedule_policy", "Sequential"), "schedule_policy"),
    )


def scenario_to_dict(s: Scenario) -> dict:
    """Plain (YAML/JSON-safe) representation, key order fixed."""
    def node(n: NodeSpec) -> dict:
        d = {"name": n.name, "role": n.role.value}
        if n.overlay_subnet is not None:
            d["overlay_subnet"] = n.overlay_subnet
        if n.storage_plane_addr is not None:
            d["storage_plane_addr"] = n.storage_plane_addr
        return d

    def pod(p: PodSpec) -> dict:
        d = {"name": p.name, "image_role": p.image_role.value, "node": p.node}
        if p.ip is not None:
            d["ip"] = p.ip
        d["ports"] = list(p.ports)
        return d

    def attack(a: AttackSpec) -> dict:
        d = {
            "attack_type": a.attack_type.value,
            "attacker": a.attacker,
            "victim": a.victim,
            "start": a.start,
            "duration": a.duration,
        }
        if a.params:
            d["params"] = _plain(a.params)
        return d

    return {
        "seed": int(s.seed),
        "schedule_policy": s.schedule_policy.value,
        "nodes": [node(n) for n in s.nodes],
        "pods": [pod(p) for p in s.pods],
        "attacks": [attack(a) for a in s.attacks],
        "capture": {
            "rotation_interval": float(s.capture.rotation_interval),
            "snaplen": int(s.capture.snaplen),
            "output_dir": s.capture.output_dir,
            "taps": [
                {"node": t.node, "interface": t.interface, "split": t.split}
                for t in s.capture.taps
            ],
        },
    }


def serialize_scenario(s: Scenario) -> str:
    """YAML text such that parse_scenario(serialize_scenario(s)) == s."""
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False, default_flow_style=False, allow_unicode=True)
