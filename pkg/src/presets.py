"""Built-in scenarios: the testbed topology and every attack configuration of the study.

Topology (shared by all presets)
--------------------------------
master  10.32.0.0/24   wn1  10.33.0.0/24   wn3  10.34.0.0/24
wn2     10.35.0.0/24   wn4  10.36.0.0/24   storage (no overlay)

Every node also has a storage-plane address in 192.168.100.0/24. Captures are
taken on the vethwe-datapath / vethwe-bridge pair of the two victim nodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import UnknownPreset
from .hooks import CaptureConfig, TapSpec
from .scenario import (
    BRIDGE_IFACE,
    DATAPATH_IFACE,
    AttackSpec,
    AttackType,
    ImageRole,
    NodeRole,
    NodeSpec,
    PodSpec,
    Scenario,
    SchedulePolicy,
)

__all__ = ["DEFAULT_SEED", "PRESETS", "preset", "preset_names", "describe", "testbed_nodes"]

DEFAULT_SEED = 2022
ATTACK_NODES = ("master", "wn1", "wn2")
VICTIM_NODES = ("wn3", "wn4")


def testbed_nodes() -> tuple[NodeSpec, ...]:
    return (
        NodeSpec("master", NodeRole.MASTER, "10.32.0.0/24", "192.168.100.10"),
        NodeSpec("wn1", NodeRole.WORKER, "10.33.0.0/24", "192.168.100.11"),
        NodeSpec("wn2", NodeRole.WORKER, "10.35.0.0/24", "192.168.100.12"),
        NodeSpec("wn3", NodeRole.WORKER, "10.34.0.0/24", "192.168.100.13"),
        NodeSpec("wn4", NodeRole.WORKER, "10.36.0.0/24", "192.168.100.14"),
        NodeSpec("storage", NodeRole.STORAGE, None, "192.168.100.2"),
    )


def victim_side_capture(rotation_interval: float = 60.0) -> CaptureConfig:
    taps = tuple(TapSpec(node, iface) for node in VICTIM_NODES for iface in (DATAPATH_IFACE, BRIDGE_IFACE))
    return CaptureConfig(taps=taps, rotation_interval=rotation_interval)


def _scenario(pods, attacks, policy: SchedulePolicy, seed: int) -> Scenario:
    return Scenario(
        nodes=testbed_nodes(),
        pods=tuple(pods),
        attacks=tuple(attacks),
        capture=victim_side_capture(),
        seed=seed,
        schedule_policy=policy,
    )


# ----------------------------
# Builders
# ----------------------------

def _fig2a(seed: int) -> Scenario:
    pods = [
        PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"),
        PodSpec("apache-wn4", ImageRole.APACHE, "wn4"),
        PodSpec("hping3-wn1", ImageRole.HPING3, "wn1"),
        PodSpec("hulk-wn2", ImageRole.HULK, "wn2"),
    ]
    attacks = [
        AttackSpec(AttackType.TCP_SYN_FLOOD, "hping3-wn1", "nginx-wn3"),
        AttackSpec(AttackType.HULK_GET, "hulk-wn2", "apache-wn4"),
    ]
    return _scenario(pods, attacks, SchedulePolicy.SEQUENTIAL, seed)


DDOS_VARIANTS: dict[str, AttackType] = {
    "synflood": AttackType.TCP_SYN_FLOOD,
    "icmpflood": AttackType.ICMP_FLOOD,
    "tcpseq": AttackType.TCP_SEQ_PREDICTION,
    "slowloris": AttackType.SLOWLORIS,
    "slowbody": AttackType.SLOW_BODY,
    "slowread": AttackType.SLOW_READ,
    "slowrange": AttackType.SLOW_RANGE,
}

HIJACK_SPORT_BASE = 40001
TCPSEQ_ATTACK_START = 5.0
TCPSEQ_SESSION_DURATION = 70.0


def _fig2b(variant: str, seed: int) -> Scenario:
    """Two attacker pods per attacker node: one aimed at wn3, one at wn4."""
    attack_type = DDOS_VARIANTS[variant]
    tool = ImageRole.HPING3 if attack_type in (
        AttackType.TCP_SYN_FLOOD, AttackType.ICMP_FLOOD, AttackType.TCP_SEQ_PREDICTION
    ) else ImageRole.SLOWHTTPTEST
    if attack_type is AttackType.SLOW_RANGE:
        victims = [
            PodSpec("apache-wn3", ImageRole.APACHE, "wn3", ip="10.34.0.2"),
            PodSpec("apache-wn4", ImageRole.APACHE, "wn4"),
        ]
    else:
        victims = [
            PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"),
            PodSpec("apache-wn4", ImageRole.APACHE, "wn4"),
        ]
    prefix = tool.value.lower()
    pods = list(victims)
    attacks = []
    start = TCPSEQ_ATTACK_START if attack_type is AttackType.TCP_SEQ_PREDICTION else 0.0
    for n, node in enumerate(ATTACK_NODES):
        for v, victim in enumerate(victims):
            name = f"{prefix}-{node}-{v}"
            pods.append(PodSpec(name, tool, node))
            params = {}
            if attack_type is AttackType.TCP_SEQ_PREDICTION:
                params = {"hijack_client": "client-master", "hijack_sport": HIJACK_SPORT_BASE + 3 * v + n}
            attacks.append(AttackSpec(attack_type, name, victim.name, start=start, params=params))

    if attack_type is AttackType.TCP_SEQ_PREDICTION:
        # the sessions being hijacked: three per victim, one per attacker aimed at it
        pods.append(PodSpec("client-master", ImageRole.BENIGN_CLIENT, "master"))
        for v, victim in enumerate(victims):
            for n in range(len(ATTACK_NODES)):
                attacks.append(AttackSpec(
                    AttackType.BENIGN, "client-master", victim.name,
                    start=0.0, duration=TCPSEQ_SESSION_DURATION,
                    params={"mode": "persistent", "sport": HIJACK_SPORT_BASE + 3 * v + n},
                ))
    return _scenario(pods, attacks, SchedulePolicy.AS_SPECIFIED, seed)


def _fig2c(seed: int) -> Scenario:
    pods = [
        PodSpec("mysql-wn3", ImageRole.MYSQL, "wn3"),
        PodSpec("hydra-wn1", ImageRole.HYDRA, "wn1"),
    ]
    attacks = [AttackSpec(AttackType.BRUTE_FORCE, "hydra-wn1", "mysql-wn3")]
    return _scenario(pods, attacks, SchedulePolicy.SEQUENTIAL, seed)


def _fig2d(seed: int) -> Scenario:
    pods = [
        PodSpec("heartbleed-wn3", ImageRole.HEARTBLEED_APACHE, "wn3"),
        PodSpec("heartbleed-wn4", ImageRole.HEARTBLEED_APACHE, "wn4"),
        PodSpec("metasploit-wn1", ImageRole.METASPLOIT, "wn1"),
        PodSpec("metasploit-wn2", ImageRole.METASPLOIT, "wn2"),
    ]
    attacks = [
        AttackSpec(AttackType.HEARTBLEED, "metasploit-wn1", "heartbleed-wn3"),
        AttackSpec(AttackType.HEARTBLEED, "metasploit-wn2", "heartbleed-wn4"),
    ]
    return _scenario(pods, attacks, SchedulePolicy.SEQUENTIAL, seed)


_VICTIM_KINDS = (
    ("nginx", ImageRole.NGINX),
    ("apache", ImageRole.APACHE),
    ("mysql", ImageRole.MYSQL),
)


def _large(tool: ImageRole, attack_type: AttackType, victims_per_node: int, seed: int) -> Scenario:
    """Large DDoS layout.

    Victims per node are ordered (nginx, apache, mysql[, nginx-2, apache-2,
    mysql-2]). Each worker attacker node runs ``2 * victims_per_node`` pods;
    its i-th pod targets victim ``i mod victims_per_node`` on wn3 for the first
    half and on wn4 for the second. The master runs two pods aimed at the
    nginx victim of wn3 and wn4.
    """
    pods: list[PodSpec] = []
    victims: dict[str, list[str]] = {}
    for node in VICTIM_NODES:
        names = []
        for k in range(victims_per_node):
            label, role = _VICTIM_KINDS[k % 3]
            suffix = "" if k < 3 else "-2"
            name = f"{label}{suffix}-{node}"
            pods.append(PodSpec(name, role, node))
            names.append(name)
        victims[node] = names

    prefix = tool.value.lower()
    attacks = []
    for node in ("wn1", "wn2"):
        for i in range(2 * victims_per_node):
            name = f"{prefix}-{node}-{i}"
            pods.append(PodSpec(name, tool, node))
            target = victims[VICTIM_NODES[i // victims_per_node]][i % victims_per_node]
            attacks.append(AttackSpec(attack_type, name, target))
    for j, node in enumerate(VICTIM_NODES):
        name = f"{prefix}-master-{j}"
        pods.append(PodSpec(name, tool, "master"))
        attacks.append(AttackSpec(attack_type, name, victims[node][0]))
    return _scenario(pods, attacks, SchedulePolicy.AS_SPECIFIED, seed)


def _benign_baseline(seed: int) -> Scenario:
    pods = [
        PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"),
        PodSpec("apache-wn4", ImageRole.APACHE, "wn4"),
        PodSpec("client-wn1", ImageRole.BENIGN_CLIENT, "wn1"),
        PodSpec("client-wn2", ImageRole.BENIGN_CLIENT, "wn2"),
    ]
    attacks = [
        AttackSpec(AttackType.BENIGN, "client-wn1", "nginx-wn3", duration=150.0),
        AttackSpec(AttackType.BENIGN, "client-wn2", "apache-wn4", duration=150.0),
    ]
    return _scenario(pods, attacks, SchedulePolicy.SEQUENTIAL, seed)


# ----------------------------
# Registry
# ----------------------------

@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    build: Callable[[int], Scenario]


def _registry() -> dict[str, Preset]:
    out = [
        Preset("fig2a-dos", "DoS: TcpSynFlood hping3(wn1)->nginx(wn3), then HulkGet hulk(wn2)->apache(wn4); "
               "2 attackers, 2 victims", _fig2a),
    ]
    for variant, attack_type in DDOS_VARIANTS.items():
        victims = "apache(wn3, 10.34.0.2), apache(wn4)" if variant == "slowrange" else "nginx(wn3), apache(wn4)"
        extra = "; hijacks 6 persistent benign sessions" if variant == "tcpseq" else ""
        out.append(Preset(
            f"fig2b-ddos-{variant}",
            f"DDoS: {attack_type.value} from 6 attackers (2 each on master, wn1, wn2) -> {victims}{extra}",
            lambda seed, v=variant: _fig2b(v, seed),
        ))
    out += [
        Preset("fig2c-bruteforce", "BruteForce: hydra(wn1)->mysql(wn3); 1 attacker, 1 victim", _fig2c),
        Preset("fig2d-heartbleed", "Heartbleed: metasploit(wn1)->heartbleed(wn3), metasploit(wn2)->heartbleed(wn4); "
               "2 attackers, 2 victims", _fig2d),
        Preset("fig3-large-ddos", "Large DDoS: TcpSynFlood, 14 attackers -> 6 victims",
               lambda seed: _large(ImageRole.HPING3, AttackType.TCP_SYN_FLOOD, 3, seed)),
        Preset("fig4-large-ddos", "Large DDoS: Slowloris, 26 attackers -> 12 victims",
               lambda seed: _large(ImageRole.SLOWHTTPTEST, AttackType.SLOWLORIS, 6, seed)),
        Preset("benign-baseline", "Benign: 2 clients -> nginx(wn3), apache(wn4) for 150 s", _benign_baseline),
    ]
    return {p.name: p for p in out}


PRESETS: dict[str, Preset] = _registry()


def preset_names() -> list[str]:
    return list(PRESETS)


def describe(name: str) -> str:
    return _lookup(name).description


def _lookup(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r} (known: {', '.join(PRESETS)})") from None


def preset(name: str, seed: int = DEFAULT_SEED) -> Scenario:
    """Scenario of the named preset.

    Raises
    ------
    UnknownPreset
        ``name`` is not one of ``preset_names()``.
    """
    return _lookup(name).build(int(seed))
