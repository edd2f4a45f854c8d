"""Packet-level attack and benign-traffic generators.

One generator per AttackSpec, bound to the attacker pod's ClientHost and
driven entirely by the fabric clock. Every random draw comes from the
attack's own stream ``stream_rng(seed, ATTACK_STREAM, index)``, so a
generator is a pure function of (config, window, seed).

Frames a generator initiates are stamped inside ``[start, end)``; whatever is
still open at ``end - 1 µs`` is reset.
"""
from __future__ import annotations

import dataclasses
import logging
import math
import string
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, partial
from typing import TYPE_CHECKING, Any, Callable

import numpy as np

from .packets import Icmp, Tcp, TcpFlags, seq_add
from .protocols import (
    CONTENT_HANDSHAKE,
    CONTENT_HEARTBEAT,
    TLS1_1,
    TlsRecord,
    build_request,
    handshake_message,
    heartbeat_request,
    mysql_auth,
    mysql_packet,
    parse_heartbeat,
    parse_mysql_greeting,
    parse_records,
    read_mysql_packet,
    response_length,
)
from .scenario import (
    US,
    AttackSpec,
    AttackType,
    AttackWindow,
    Scenario,
    attack_windows,
    pod_addresses,
    target_port,
)
from .seeding import ATTACK_STREAM, stream_rng
from .tcp import ConnectionEvents, ConnectionHandle

if TYPE_CHECKING:
    from .fabric import Fabric
    from .tcp import ClientHost

__all__ = [
    "GeneratorConfig",
    "GenStatus",
    "Generator",
    "SynFlood",
    "IcmpFlood",
    "SeqPrediction",
    "HulkGet",
    "SlowHttp",
    "BruteForce",
    "Heartbleed",
    "BenignHttp",
    "SessionPlan",
    "persistent_plan",
    "hijack_target",
    "default_wordlist",
    "GENERATORS",
    "schedule_attacks",
    "gen_syn_flood",
    "gen_icmp_flood",
    "gen_tcp_seq_prediction",
    "gen_hulk_get",
    "gen_slow_variant",
    "gen_brute_force",
    "gen_heartbleed",
    "gen_benign_http",
]

log = logging.getLogger(__name__)

F = TcpFlags

# New connections / attempts stop this long before the window end so their
# exchanges complete inside the window.
SETTLE_US = 500_000
PERSISTENT_CLOSE_US = 250_000
HEARTBEAT_TIMEOUT_US = 500_000
PROBE_SPACING_US = 10
MAX_HEARTBEAT_LEN = 65532  # record length field is 16 bits, minus the 3-byte header
MAX_READ_WINDOW = 16  # slow read advertises at most this many bytes

ALNUM = np.array(list(string.ascii_letters + string.digits))

USER_AGENTS = (
    "Mozilla/5.0 (X11; U; Linux x86_64; en-US; rv:1.9.1.3) Gecko/20090913 Firefox/3.5.3",
    "Mozilla/5.0 (Windows; U; Windows NT 6.1; en; rv:1.9.1.3) Gecko/20090824 Firefox/3.5.3 (.NET CLR 3.5.30729)",
    "Mozilla/5.0 (Windows; U; Windows NT 5.2; en-US; rv:1.9.1.3) Gecko/20090824 Firefox/3.5.3 (.NET CLR 3.5.30729)",
    "Mozilla/5.0 (Windows; U; Windows NT 6.1; en-US; rv:1.9.1.1) Gecko/20090718 Firefox/3.5.1",
    "Mozilla/5.0 (Windows; U; Windows NT 5.1; en-US) AppleWebKit/532.1 (KHTML, like Gecko) Chrome/4.0.219.6 Safari/532.1",
)
BENIGN_USER_AGENT = "Mozilla/5.0 (X11; Linux x86_64; rv:96.0) Gecko/20100101 Firefox/96.0"
SLOWHTTPTEST_USER_AGENT = "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_7_3) AppleWebKit/534.55.3 (KHTML, like Gecko) Version/5.1.3 Safari/534.53.10"

# Spoofed segment body; never equal to anything a benign session sends.
INJECTED_PAYLOAD = b"GET /admin/export?all=1 HTTP/1.1\r\nHost: hijacked\r\n\r\n"

_USERS = ("admin", "root", "user", "test", "mysql", "oracle", "guest", "dbadmin", "backup", "support")
_PASSWORDS = (
    "123456", "password", "12345678", "qwerty", "123456789", "12345", "1234", "111111",
    "1234567", "dragon", "123123", "baseball", "abc123", "football", "monkey", "letmein",
    "696969", "shadow", "master", "666666", "qwertyuiop", "123321", "mustang", "1234567890",
    "michael", "654321", "superman", "1qaz2wsx", "7777777", "121212", "000000", "qazwsx",
    "123qwe", "killer", "trustno1", "jordan", "jennifer", "zxcvbnm", "asdfgh", "hunter",
    "buster", "soccer", "harley", "batman", "andrew", "tigger", "sunshine", "iloveyou",
    "2000", "charlie",
)


def default_wordlist() -> tuple[tuple[str, str], ...]:
    """500 (user, password) pairs, users outer, passwords inner."""
    return tuple((u, p) for u in _USERS for p in _PASSWORDS)


# ----------------------------
# Configuration
# ----------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    """Generator knobs; every field can be overridden from an attack's ``params``."""

    rate_pps: float = 1000.0
    payload_size: int = 56
    conn_rate: float = 50.0
    request_path_pool: tuple[str, ...] = ("/", "/index.html", "/search", "/login", "/api/items")
    connections: int = 200
    connect_rate: float = 50.0
    interval: float = 10.0
    content_length: int = 4096
    read_window: int = 16
    range_count: int = 50
    wordlist: tuple[tuple[str, str], ...] = field(default_factory=default_wordlist)
    true_credentials: tuple[str, str] = ("root", "Tr0ub4dor&3")
    attempt_rate: float = 20.0
    heartbeat_claimed_len: int = 16384
    heartbeat_actual_len: int = 16
    heartbeat_rate: float = 1.0
    vulnerable: bool = True
    patched_behavior: str = "echo"
    probe_width: int = 16
    probe_stride: int = 1
    probe_interval: float = 0.1
    hijack_client: str | None = None
    hijack_sport: int | None = None
    mode: str = "request"
    keep_prob: float = 0.5
    sport: int | None = None
    dport: int | None = None

    @classmethod
    def from_params(cls, attack_type: AttackType, params: dict | None = None) -> "GeneratorConfig":
        """Defaults for ``attack_type`` overridden by ``params``.

        Raises
        ------
        ValueError
            Unknown key, unconvertible value or a violated constraint.
        """
        problems = cls.check_params(attack_type, params or {})
        if problems:
            raise ValueError("; ".join(msg for _, msg in problems))
        return cls._build(attack_type, params or {})

    @classmethod
    def _build(cls, attack_type: AttackType, params: dict) -> "GeneratorConfig":
        values = dict(_TYPE_DEFAULTS.get(attack_type, {}))
        for key, value in params.items():
            values[key] = _coerce(key, value)
        return cls(**values)

    @classmethod
    def check_params(cls, attack_type: AttackType, params: dict) -> list[tuple[str, str]]:
        """(code, message) for every problem in ``params``; empty when usable."""
        out: list[tuple[str, str]] = []
        allowed = _PARAMS_FOR[attack_type] | {"dport"}
        clean = {}
        for key, value in params.items():
            if key not in allowed:
                out.append(("UnknownParam", f"unknown parameter {key!r} for {attack_type.value}"))
                continue
            try:
                clean[key] = _coerce(key, value)
            except (TypeError, ValueError) as e:
                out.append(("InvalidParam", f"{key}: {e}"))
        if out:
            return out
        cfg = cls._build(attack_type, clean)
        return [("InvalidParam", msg) for msg in cfg.problems(attack_type)]

    def problems(self, attack_type: AttackType) -> list[str]:
        out = []
        positive = {
            AttackType.TCP_SYN_FLOOD: ("rate_pps",),
            AttackType.ICMP_FLOOD: ("rate_pps",),
            AttackType.TCP_SEQ_PREDICTION: ("probe_interval",),
            AttackType.HULK_GET: ("conn_rate",),
            AttackType.BRUTE_FORCE: ("attempt_rate",),
            AttackType.HEARTBLEED: ("heartbeat_rate",),
            AttackType.BENIGN: ("conn_rate", "interval"),
        }.get(attack_type, ("connect_rate", "interval"))
        for name in positive:
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                out.append(f"{name} must be > 0, got {value}")
        if attack_type is AttackType.BRUTE_FORCE and not self.wordlist:
            out.append("wordlist must not be empty")
        if attack_type is AttackType.HEARTBLEED:
            if not 0 <= self.heartbeat_actual_len <= self.heartbeat_claimed_len <= MAX_HEARTBEAT_LEN:
                out.append(
                    f"need 0 <= heartbeat_actual_len ({self.heartbeat_actual_len}) <= "
                    f"heartbeat_claimed_len ({self.heartbeat_claimed_len}) <= {MAX_HEARTBEAT_LEN}"
                )
            if self.patched_behavior not in ("echo", "silent"):
                out.append(f"patched_behavior must be 'echo' or 'silent', got {self.patched_behavior!r}")
        if attack_type in _SLOW_TYPES and self.connections < 1:
            out.append(f"connections must be >= 1, got {self.connections}")
        if self.range_count < 1:
            out.append(f"range_count must be >= 1, got {self.range_count}")
        if self.content_length < 1:
            out.append(f"content_length must be >= 1, got {self.content_length}")
        if not 1 <= self.read_window <= MAX_READ_WINDOW:
            out.append(f"read_window must be in [1, {MAX_READ_WINDOW}], got {self.read_window}")
        if self.probe_width < 1 or self.probe_stride < 1:
            out.append("probe_width and probe_stride must be >= 1")
        if not 0 <= self.payload_size <= 1472:
            out.append(f"payload_size must be in [0, 1472], got {self.payload_size}")
        if self.mode not in ("request", "persistent"):
            out.append(f"mode must be 'request' or 'persistent', got {self.mode!r}")
        if not 0 < self.keep_prob <= 1:
            out.append(f"keep_prob must be in (0, 1], got {self.keep_prob}")
        for name in ("sport", "dport", "hijack_sport"):
            port = getattr(self, name)
            if port is not None and not 0 < port < 65536:
                out.append(f"{name} {port} is not a valid port")
        if not self.request_path_pool:
            out.append("request_path_pool must not be empty")
        return out


_SLOW_TYPES = frozenset({AttackType.SLOWLORIS, AttackType.SLOW_BODY, AttackType.SLOW_READ, AttackType.SLOW_RANGE})

_TYPE_DEFAULTS: dict[AttackType, dict[str, Any]] = {
    AttackType.BENIGN: {"conn_rate": 1.0, "interval": 2.0},
}

_SLOW_PARAMS = frozenset({"connections", "connect_rate", "interval"})
_PARAMS_FOR: dict[AttackType, frozenset[str]] = {
    AttackType.TCP_SYN_FLOOD: frozenset({"rate_pps"}),
    AttackType.ICMP_FLOOD: frozenset({"rate_pps", "payload_size"}),
    AttackType.TCP_SEQ_PREDICTION: frozenset(
        {"probe_width", "probe_stride", "probe_interval", "hijack_client", "hijack_sport"}
    ),
    AttackType.HULK_GET: frozenset({"conn_rate", "request_path_pool"}),
    AttackType.SLOWLORIS: _SLOW_PARAMS,
    AttackType.SLOW_BODY: _SLOW_PARAMS | {"content_length"},
    AttackType.SLOW_READ: _SLOW_PARAMS | {"read_window"},
    AttackType.SLOW_RANGE: _SLOW_PARAMS | {"range_count"},
    AttackType.BRUTE_FORCE: frozenset({"wordlist", "true_credentials", "attempt_rate"}),
    AttackType.HEARTBLEED: frozenset(
        {"heartbeat_claimed_len", "heartbeat_actual_len", "heartbeat_rate", "vulnerable", "patched_behavior"}
    ),
    AttackType.BENIGN: frozenset({"conn_rate", "interval", "mode", "keep_prob", "sport", "request_path_pool"}),
}

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(GeneratorConfig)}


def _coerce(key: str, value: Any) -> Any:
    kind = _FIELD_TYPES[key]
    if value is None and "None" in kind:
        return None
    if kind.startswith("float"):
        return float(value)
    if kind.startswith("int"):
        if isinstance(value, bool) or float(value) != int(value):
            raise ValueError(f"expected an integer, got {value!r}")
        return int(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValueError(f"expected true/false, got {value!r}")
        return value
    if kind.startswith("str"):
        return str(value)
    if key == "request_path_pool":
        return tuple(str(v) for v in value)
    if key == "true_credentials":
        user, password = value
        return (str(user), str(password))
    if key == "wordlist":
        pairs = []
        for pair in value:
            user, password = pair
            pairs.append((str(user), str(password)))
        return tuple(pairs)
    raise ValueError(f"unsupported parameter {key!r}")  # pragma: no cover


# ----------------------------
# Base generator
# ----------------------------

class GenStatus(str, Enum):
    SCHEDULED = "Scheduled"
    RUNNING = "Running"
    DONE = "Done"
    SKIPPED = "Skipped"


class Generator(ConnectionEvents):
    """Drives one attack window from the attacker pod.

    Subclasses implement ``begin`` and react through the ConnectionEvents
    callbacks; ``later`` keeps every self-initiated action inside the window.
    """

    def __init__(self, f: "Fabric", window: AttackWindow, cfg: GeneratorConfig | None = None):
        spec = window.spec
        self.f = f
        self.window = window
        self.cfg = cfg or GeneratorConfig.from_params(spec.attack_type, spec.params)
        self.tag = window.index
        self.host: "ClientHost" = f.host(spec.attacker)
        self.victim = f.scenario.pod(spec.victim)
        self.victim_ip = f.pod_ips[spec.victim]
        self.dport = target_port(spec, self.victim)
        self.rng = stream_rng(f.scenario.seed, ATTACK_STREAM, window.index)
        self.status = GenStatus.SCHEDULED
        self.packets = 0  # frames initiated (SYNs of connections included)
        self.open: set[ConnectionHandle] = set()

    @property
    def spec(self) -> AttackSpec:
        return self.window.spec

    @property
    def start_us(self) -> int:
        return self.window.start_us

    @property
    def end_us(self) -> int:
        return self.window.end_us

    @property
    def now(self) -> int:
        return self.f.clock_us

    def schedule(self) -> "Generator":
        self.f.schedule(self.start_us, self._begin)
        return self

    def _begin(self, _=None) -> None:
        self.status = GenStatus.RUNNING
        log.debug("start %s %s -> %s at %d us", self.spec.attack_type.value, self.spec.attacker,
                  self.spec.victim, self.now)
        self.begin()
        self.f.schedule(max(self.now, self.end_us - 1), self._end)

    def _end(self, _=None) -> None:
        for h in list(self.open):
            self.host.abort(h)
        self.end()
        if self.status is GenStatus.RUNNING:
            self.status = GenStatus.DONE

    def begin(self) -> None:
        raise NotImplementedError

    def end(self) -> None:
        pass

    def later(self, ts_us: int, fn: Callable[[Any], None], arg: Any = None, margin_us: int = 0) -> bool:
        """Schedule ``fn(arg)`` at ``ts_us`` if that is still before end - margin."""
        ts_us = int(ts_us)
        if ts_us >= self.end_us - margin_us:
            return False
        self.f.schedule(max(ts_us, self.now), fn, arg)
        return True

    def emit(self, l4, payload: bytes = b"", src_ip: str | None = None) -> None:
        self.packets += 1
        self.host.emit(self.host.frame(self.victim_ip, l4, payload, src_ip=src_ip, tag=self.tag))

    def connect(self, **kw) -> ConnectionHandle:
        h = self.host.connect(self.victim_ip, self.dport, self, tag=self.tag, **kw)
        self.packets += 1
        self.open.add(h)
        return h

    def send(self, h: ConnectionHandle, data: bytes) -> None:
        if h.established:
            self.packets += 1
            self.host.send(h, data)

    def close(self, h: ConnectionHandle) -> None:
        if h.established:
            self.packets += 1
            self.host.close(h)

    # ConnectionEvents
    def on_closed(self, h: ConnectionHandle) -> None:
        self.open.discard(h)

    def on_refused(self, h: ConnectionHandle) -> None:
        self.open.discard(h)
        log.debug("%s: connection to %s:%s refused", self.spec.attacker, self.victim_ip, self.dport)


def _count(duration_s: float, rate: float) -> int:
    return int(math.floor(duration_s * rate + 1e-9))


# ----------------------------
# Floods (hping3)
# ----------------------------

class SynFlood(Generator):
    """SYN-only segments at ``rate_pps``, random source port and sequence number."""

    def begin(self) -> None:
        n = _count(self.spec.duration, self.cfg.rate_pps)
        self.times = self.start_us + (np.arange(n) * (US / self.cfg.rate_pps)).astype(np.int64)
        self.sports = self.rng.integers(1024, 65536, size=n)
        self.seqs = self.rng.integers(0, 1 << 32, size=n, dtype=np.uint64)
        self._k = 0
        if n:
            self._next()

    def _next(self, _=None) -> None:
        k = self._k
        self.emit(Tcp(int(self.sports[k]), self.dport, int(self.seqs[k]), 0, int(F.SYN), 512))
        self._k = k + 1
        if self._k < len(self.times):
            self.f.schedule(int(self.times[self._k]), self._next)


class IcmpFlood(Generator):
    """Echo requests at ``rate_pps`` with one identifier and an incrementing sequence."""

    def begin(self) -> None:
        n = _count(self.spec.duration, self.cfg.rate_pps)
        self.times = self.start_us + (np.arange(n) * (US / self.cfg.rate_pps)).astype(np.int64)
        self.ident = int(self.rng.integers(0, 1 << 16))
        self.payload = bytes(self.cfg.payload_size)
        self._k = 0
        if n:
            self._next()

    def _next(self, _=None) -> None:
        k = self._k
        self.emit(Icmp(8, 0, self.ident, k & 0xFFFF), self.payload)
        self._k = k + 1
        if self._k < len(self.times):
            self.f.schedule(int(self.times[self._k]), self._next)


# ----------------------------
# Persistent benign sessions and the hijack that targets them
# ----------------------------

@dataclass(frozen=True)
class SessionPlan:
    """Client side of a persistent benign session, replayable from the scenario alone."""

    index: int
    client: str
    server: str
    client_ip: str
    server_ip: str
    sport: int
    dport: int
    isn: int
    start_us: int
    request_us: tuple[int, ...]
    payloads: tuple[bytes, ...]
    close_us: int

    @cached_property
    def data(self) -> dict[int, bytes]:
        """Sequence number -> payload of every request segment."""
        out, seq = {}, seq_add(self.isn, 1)
        for payload in self.payloads:
            out[seq] = payload
            seq = seq_add(seq, len(payload))
        return out

    @cached_property
    def control_seqs(self) -> frozenset[int]:
        """Sequence numbers of the payload-free segments (SYN, ACKs, FIN, last ACK)."""
        seqs = {self.isn}
        seq = seq_add(self.isn, 1)
        seqs.add(seq)
        for payload in self.payloads:
            seq = seq_add(seq, len(payload))
            seqs.add(seq)
        seqs.add(seq_add(seq, 1))
        return frozenset(seqs)

    def expected(self, seq: int, payload: bytes, length: int | None = None) -> bool:
        """Whether a client->server segment (seq, payload) is one this session sends.

        ``payload`` may be snaplen-truncated; ``length`` is then its size on the
        wire. A planned segment must have that size and start with ``payload``.
        """
        if length is None:
            length = len(payload)
        if not length:
            return seq in self.control_seqs
        planned = self.data.get(seq)
        return planned is not None and len(planned) == length and planned.startswith(payload)


def persistent_plan(s: Scenario, index: int) -> SessionPlan:
    """Plan of the persistent benign session declared at ``s.attacks[index]``."""
    w = attack_windows(s)[index]
    a = w.spec
    if a.attack_type is not AttackType.BENIGN:
        raise ValueError(f"attack {index} is {a.attack_type.value}, not Benign")
    cfg = GeneratorConfig.from_params(a.attack_type, a.params)
    if cfg.mode != "persistent":
        raise ValueError(f"attack {index} is a request-mode benign entry")
    rng = stream_rng(s.seed, ATTACK_STREAM, index)
    isn = int(rng.integers(0, 1 << 32))
    sport = cfg.sport if cfg.sport is not None else int(rng.integers(32768, 61000))
    ips = pod_addresses(s)
    victim = s.pod(a.victim)
    step = int(round(cfg.interval * US))
    times, payloads = [], []
    k = 0
    while w.start_us + (k + 1) * step < w.end_us - SETTLE_US:
        times.append(w.start_us + (k + 1) * step)
        payloads.append(build_request("GET", f"/session/{k}", [
            ("Host", ips[a.victim]),
            ("User-Agent", BENIGN_USER_AGENT),
            ("Accept", "text/html"),
            ("Connection", "keep-alive"),
        ]))
        k += 1
    return SessionPlan(
        index=index,
        client=a.attacker,
        server=a.victim,
        client_ip=ips[a.attacker],
        server_ip=ips[a.victim],
        sport=sport,
        dport=target_port(a, victim),
        isn=isn,
        start_us=w.start_us,
        request_us=tuple(times),
        payloads=tuple(payloads),
        close_us=max(w.start_us, w.end_us - PERSISTENT_CLOSE_US),
    )


def hijack_target(s: Scenario, index: int) -> SessionPlan | None:
    """Persistent benign session a TcpSeqPrediction attack aims at, if any.

    ``hijack_client`` / ``hijack_sport`` narrow the choice; otherwise the first
    persistent session toward the victim whose window covers the attack start.
    """
    windows = attack_windows(s)
    w = windows[index]
    params = w.spec.params
    client, sport = params.get("hijack_client"), params.get("hijack_sport")
    for b in windows:
        a = b.spec
        if not a.is_benign or a.victim != w.spec.victim:
            continue
        if a.params.get("mode") != "persistent" or (client is not None and a.attacker != client):
            continue
        if not b.start_us <= w.start_us < b.end_us:
            continue
        plan = persistent_plan(s, b.index)
        if sport is not None and plan.sport != int(sport):
            continue
        if plan.dport != target_port(w.spec, s.pod(w.spec.victim)):
            continue
        return plan
    return None


class SeqPrediction(Generator):
    """Spoofed segments probing the sequence window of an established benign session.

    Each round sends ``probe_width`` ACK+PSH segments from the benign client's
    address and port, with sequence numbers ``rcv_nxt + (i - width // 2) * stride``
    around the victim's next expected byte. The acknowledgement field is a
    guess half the sequence space away, so the victim discards every probe.
    """

    def begin(self) -> None:
        self.target = hijack_target(self.f.scenario, self.window.index)
        self.rounds = 0
        if self.target is None:
            log.warning("%s: no persistent session to %s to hijack; skipping",
                        self.spec.attacker, self.spec.victim)
            self.status = GenStatus.SKIPPED
            return
        self.key = (self.target.client_ip, self.target.sport, self.dport)
        self._round()

    def _round(self, _=None) -> None:
        c = self.f.host(self.spec.victim).conns.get(self.key)
        if c is not None and c.state == "Established":
            width, stride = self.cfg.probe_width, self.cfg.probe_stride
            ack = seq_add(c.snd_nxt, 1 << 31)
            for i in range(width):
                ts = self.now + i * PROBE_SPACING_US
                if ts >= self.end_us:
                    break
                seq = seq_add(c.rcv_nxt, (i - width // 2) * stride)
                t = Tcp(self.target.sport, self.dport, seq, ack, int(F.PSH | F.ACK), 64240)
                self.packets += 1
                self.host.emit(self.host.frame(self.victim_ip, t, INJECTED_PAYLOAD,
                                               src_ip=self.target.client_ip, tag=self.tag, ts_us=ts))
            self.rounds += 1
        self.later(self.now + int(round(self.cfg.probe_interval * US)), self._round)

    def end(self) -> None:
        if self.status is GenStatus.RUNNING and self.packets == 0:
            log.warning("%s: hijack target never established; nothing sent", self.spec.attacker)
            self.status = GenStatus.SKIPPED


# ----------------------------
# HTTP floods
# ----------------------------

class HulkGet(Generator):
    """Full connections at ``conn_rate``; one cache-busting GET each, closed after the response."""

    def begin(self) -> None:
        self.requests = 0
        self.responses = 0
        self._k = 0
        self._open()

    def _open(self, _=None) -> None:
        self.connect()
        self._k += 1
        self.later(self.start_us + int(self._k * US / self.cfg.conn_rate), self._open)

    def request(self) -> bytes:
        path = self.cfg.request_path_pool[int(self.rng.integers(len(self.cfg.request_path_pool)))]
        query = "".join(self.rng.choice(ALNUM, 8))
        return build_request("GET", f"{path}?{query}", [
            ("Host", self.victim_ip),
            ("User-Agent", USER_AGENTS[int(self.rng.integers(len(USER_AGENTS)))]),
            ("Cache-Control", "no-cache"),
            ("Accept-Charset", "ISO-8859-1,utf-8;q=0.7,*;q=0.7"),
            ("Referer", f"http://{self.victim_ip}/?{''.join(self.rng.choice(ALNUM, 5))}"),
            ("Keep-Alive", str(int(self.rng.integers(110, 121)))),
            ("Connection", "keep-alive"),
        ])

    def on_established(self, h: ConnectionHandle) -> None:
        self.send(h, self.request())
        self.requests += 1

    def on_data(self, h: ConnectionHandle, data: bytes) -> None:
        h.buffer += data
        n = response_length(h.buffer)
        if n is not None and len(h.buffer) >= n:
            self.responses += 1
            self.close(h)


class SlowHttp(Generator):
    """The four Slowhttptest modes.

    Connections ramp up at ``connect_rate`` until ``connections`` are open;
    each then writes (or acknowledges) a little every ``interval`` seconds.
    """

    def __init__(self, f: "Fabric", window: AttackWindow, cfg: GeneratorConfig | None = None,
                 kind: AttackType | None = None):
        super().__init__(f, window, cfg)
        self.kind = kind or window.spec.attack_type
        if self.kind not in _SLOW_TYPES:
            raise ValueError(f"{self.kind} is not a slow HTTP attack")
        self.body_sent: dict[ConnectionHandle, int] = {}

    def begin(self) -> None:
        self.opened = 0
        self._open()

    def _open(self, _=None) -> None:
        if self.kind is AttackType.SLOW_READ:
            self.connect(window=self.cfg.read_window, manual_ack=True)
        else:
            self.connect()
        self.opened += 1
        if self.opened < self.cfg.connections:
            self.later(self.start_us + int(self.opened * US / self.cfg.connect_rate), self._open)

    def _headers(self) -> list[tuple[str, str]]:
        return [
            ("Host", self.victim_ip),
            ("User-Agent", SLOWHTTPTEST_USER_AGENT),
            ("Referer", "https://github.com/shekyan/slowhttptest/"),
        ]

    def range_header(self) -> str:
        ranges = ["0-"] + [f"5-{k}" for k in range(self.cfg.range_count - 1)]
        return "bytes=" + ",".join(ranges)

    def first_request(self) -> bytes:
        kind = self.kind
        if kind is AttackType.SLOWLORIS:
            query = "".join(self.rng.choice(ALNUM, 8))
            return build_request("GET", f"/?{query}", self._headers(), terminate=False)
        if kind is AttackType.SLOW_BODY:
            return build_request("POST", "/", self._headers() + [
                ("Content-Length", str(self.cfg.content_length)),
                ("Content-Type", "application/x-www-form-urlencoded"),
                ("Connection", "keep-alive"),
            ])
        if kind is AttackType.SLOW_RANGE:
            return build_request("GET", "/", self._headers() + [
                ("Range", self.range_header()),
                ("Connection", "keep-alive"),
            ])
        return build_request("GET", "/", self._headers() + [("Connection", "keep-alive")])

    def on_established(self, h: ConnectionHandle) -> None:
        self.send(h, self.first_request())
        self.body_sent[h] = 0
        self.later(self.now + int(round(self.cfg.interval * US)), self._tick, h)

    def _tick(self, h: ConnectionHandle) -> None:
        if not h.established:
            return
        kind = self.kind
        if kind is AttackType.SLOWLORIS:
            self.send(h, b"X-a: b\r\n")
        elif kind is AttackType.SLOW_BODY:
            if self.body_sent[h] < self.cfg.content_length:
                self.send(h, self.rng.choice(ALNUM, 1)[0].encode())
                self.body_sent[h] += 1
        elif kind is AttackType.SLOW_READ:
            self.packets += 1
            self.host.ack(h, window=self.cfg.read_window)
        else:
            self.send(h, self.first_request())
        self.later(self.now + int(round(self.cfg.interval * US)), self._tick, h)

    def on_closed(self, h: ConnectionHandle) -> None:
        super().on_closed(h)
        self.body_sent.pop(h, None)


# ----------------------------
# Credential brute force (Hydra)
# ----------------------------

class BruteForce(Generator):
    """One connection per wordlist entry, in order, until the server answers OK."""

    def begin(self) -> None:
        self.attempts = 0
        self.ok = 0
        self.err = 0
        self.found: tuple[str, str] | None = None
        self._i = 0
        self._slot_us = self.now
        self._creds: dict[ConnectionHandle, tuple[str, str]] = {}
        self._attempt()

    @property
    def slot_us(self) -> int:
        return int(round(US / self.cfg.attempt_rate))

    def _attempt(self, _=None) -> None:
        if self.found is not None or self._i >= len(self.cfg.wordlist):
            return
        creds = self.cfg.wordlist[self._i]
        self._i += 1
        self.attempts += 1
        self._slot_us = self.now
        h = self.connect()
        self._creds[h] = creds

    def on_data(self, h: ConnectionHandle, data: bytes) -> None:
        h.buffer += data
        while (pkt := read_mysql_packet(bytes(h.buffer))) is not None:
            seq_id, payload, used = pkt
            del h.buffer[:used]
            head = payload[:1]
            if head == b"\x0a":
                _, _, salt = parse_mysql_greeting(payload)
                user, password = self._creds[h]
                self.send(h, mysql_packet(seq_id + 1, mysql_auth(user, password, salt)))
            elif head == b"\x00":
                self.ok += 1
                self.found = self._creds[h]
                log.info("%s: valid credentials for %s found after %d attempts",
                         self.spec.attacker, self.spec.victim, self.attempts)
                self.send(h, mysql_packet(0, b"\x01"))  # COM_QUIT
            elif head == b"\xff":
                self.err += 1
                self.close(h)

    def on_closed(self, h: ConnectionHandle) -> None:
        super().on_closed(h)
        self._creds.pop(h, None)
        self.later(max(self.now, self._slot_us + self.slot_us), self._attempt, margin_us=SETTLE_US)

    def on_refused(self, h: ConnectionHandle) -> None:
        super().on_refused(h)
        self.on_closed(h)


# ----------------------------
# Heartbeat over-read (Metasploit)
# ----------------------------

@dataclass(frozen=True)
class HeartbeatResult:
    request_len: int
    claimed_len: int
    response_len: int


class Heartbleed(Generator):
    """ClientHello, then one malformed heartbeat per connection at ``heartbeat_rate``."""

    def begin(self) -> None:
        self.results: list[HeartbeatResult] = []
        self.attempts = 0
        self._k = 0
        self._attempt()

    def _attempt(self, _=None) -> None:
        self.connect()
        self.attempts += 1
        self._k += 1
        self.later(self.start_us + int(self._k * US / self.cfg.heartbeat_rate), self._attempt,
                   margin_us=SETTLE_US + HEARTBEAT_TIMEOUT_US)

    def client_hello(self) -> bytes:
        body = (
            TLS1_1.to_bytes(2, "big")
            + self.rng.integers(0, 256, size=32, dtype=np.uint8).tobytes()
            + b"\x00"                                   # session id
            + b"\x00\x04\x00\x2f\x00\x35"               # two cipher suites
            + b"\x01\x00"                               # null compression
            + b"\x00\x05\x00\x0f\x00\x01\x01"           # heartbeat extension
        )
        return TlsRecord(CONTENT_HANDSHAKE, TLS1_1, handshake_message(1, body)).encode()

    def on_established(self, h: ConnectionHandle) -> None:
        self.send(h, self.client_hello())

    def on_data(self, h: ConnectionHandle, data: bytes) -> None:
        h.buffer += data
        records, used = parse_records(bytes(h.buffer))
        del h.buffer[:used]
        for rec in records:
            if rec.content_type == CONTENT_HANDSHAKE and _has_server_hello_done(rec.body):
                payload = self.rng.integers(0, 256, size=self.cfg.heartbeat_actual_len, dtype=np.uint8).tobytes()
                self.send(h, heartbeat_request(self.cfg.heartbeat_claimed_len, payload).encode())
                self.f.schedule(self.now + HEARTBEAT_TIMEOUT_US, self._timeout, h)
            elif rec.content_type == CONTENT_HEARTBEAT:
                _, _, reply = parse_heartbeat(rec.body)
                self.results.append(HeartbeatResult(
                    self.cfg.heartbeat_actual_len, self.cfg.heartbeat_claimed_len, len(reply)
                ))
                self.close(h)

    def _timeout(self, h: ConnectionHandle) -> None:
        self.close(h)

    @property
    def leaked_bytes(self) -> int:
        return sum(max(0, r.response_len - r.request_len) for r in self.results)


def _has_server_hello_done(body: bytes) -> bool:
    off = 0
    while off + 4 <= len(body):
        msg_type = body[off]
        length = int.from_bytes(body[off + 1:off + 4], "big")
        if msg_type == 14:
            return True
        off += 4 + length
    return False


# ----------------------------
# Benign clients
# ----------------------------

class BenignHttp(Generator):
    """Protocol-complete GET exchanges.

    ``request`` mode: a Poisson stream of connections (rate ``conn_rate /
    keep_prob`` thinned with probability ``keep_prob``), one GET each, closed
    with FIN after the response. ``persistent`` mode: one long-lived session
    following ``persistent_plan``.
    """

    def begin(self) -> None:
        self.requests = 0
        self.responses = 0
        self.plan: SessionPlan | None = None
        if self.cfg.mode == "persistent":
            self._start_session()
            return
        rate = self.cfg.conn_rate / self.cfg.keep_prob
        limit = self.end_us - SETTLE_US
        t = float(self.start_us)
        while True:
            t += self.rng.exponential(US / rate)
            if t > limit:
                break
            if self.rng.random() < self.cfg.keep_prob:
                self.f.schedule(int(t), self._open)

    def _open(self, _=None) -> None:
        self.connect()

    def on_established(self, h: ConnectionHandle) -> None:
        if self.plan is not None:
            return
        path = self.cfg.request_path_pool[int(self.rng.integers(len(self.cfg.request_path_pool)))]
        self.send(h, build_request("GET", path, [
            ("Host", self.victim_ip),
            ("User-Agent", BENIGN_USER_AGENT),
            ("Accept", "text/html,application/xhtml+xml"),
            ("Connection", "keep-alive"),
        ]))
        self.requests += 1

    def on_data(self, h: ConnectionHandle, data: bytes) -> None:
        h.buffer += data
        n = response_length(h.buffer)
        if n is not None and len(h.buffer) >= n:
            del h.buffer[:n]
            self.responses += 1
            if self.plan is None:
                self.close(h)

    # persistent mode
    def _start_session(self) -> None:
        plan = self.plan = persistent_plan(self.f.scenario, self.window.index)
        self.session = self.connect(sport=plan.sport, isn=plan.isn)
        for k, ts in enumerate(plan.request_us):
            self.f.schedule(ts, self._planned_request, k)
        self.f.schedule(plan.close_us, self._close_session)

    def _planned_request(self, k: int) -> None:
        if self.session.established:
            self.send(self.session, self.plan.payloads[k])
            self.requests += 1

    def _close_session(self, _=None) -> None:
        self.close(self.session)


# ----------------------------
# Registry
# ----------------------------

GENERATORS: dict[AttackType, Callable[..., Generator]] = {
    AttackType.TCP_SYN_FLOOD: SynFlood,
    AttackType.ICMP_FLOOD: IcmpFlood,
    AttackType.TCP_SEQ_PREDICTION: SeqPrediction,
    AttackType.HULK_GET: HulkGet,
    AttackType.SLOWLORIS: partial(SlowHttp, kind=AttackType.SLOWLORIS),
    AttackType.SLOW_BODY: partial(SlowHttp, kind=AttackType.SLOW_BODY),
    AttackType.SLOW_READ: partial(SlowHttp, kind=AttackType.SLOW_READ),
    AttackType.SLOW_RANGE: partial(SlowHttp, kind=AttackType.SLOW_RANGE),
    AttackType.BRUTE_FORCE: BruteForce,
    AttackType.HEARTBLEED: Heartbleed,
    AttackType.BENIGN: BenignHttp,
}


def schedule_attacks(f: "Fabric") -> list[Generator]:
    """Create and schedule one generator per attack entry of the fabric's scenario."""
    out = []
    for w in attack_windows(f.scenario):
        cfg = GeneratorConfig.from_params(w.spec.attack_type, w.spec.params)
        out.append(GENERATORS[w.spec.attack_type](f, w, cfg).schedule())
    log.info("scheduled %d generator(s)", len(out))
    return out


def _window(f: "Fabric", window: AttackWindow | int) -> AttackWindow:
    if isinstance(window, AttackWindow):
        return window
    return attack_windows(f.scenario)[int(window)]


def gen_syn_flood(f: "Fabric", window: AttackWindow | int, cfg: GeneratorConfig | None = None) -> SynFlood:
    return SynFlood(f, _window(f, window), cfg).schedule()


def gen_icmp_flood(f: "Fabric", window: AttackWindow | int, cfg: GeneratorConfig | None = None) -> IcmpFlood:
    return IcmpFlood(f, _window(f, window), cfg).schedule()


def gen_tcp_seq_prediction(
    f: "Fabric", window: AttackWindow | int, cfg: GeneratorConfig | None = None
) -> SeqPrediction:
    return SeqPrediction(f, _window(f, window), cfg).schedule()


def gen_hulk_get(f: "Fabric", window: AttackWindow | int, cfg: GeneratorConfig | None = None) -> HulkGet:
    return HulkGet(f, _window(f, window), cfg).schedule()


def gen_slow_variant(
    kind: AttackType, f: "Fabric", window: AttackWindow | int, cfg: GeneratorConfig | None = None
) -> SlowHttp:
    return SlowHttp(f, _window(f, window), cfg, kind=kind).schedule()


def gen_brute_force(f: "Fabric", window: AttackWindow | int, cfg: GeneratorConfig | None = None) -> BruteForce:
    return BruteForce(f, _window(f, window), cfg).schedule()


def gen_heartbleed(f: "Fabric", window: AttackWindow | int, cfg: GeneratorConfig | None = None) -> Heartbleed:
    return Heartbleed(f, _window(f, window), cfg).schedule()


def gen_benign_http(f: "Fabric", window: AttackWindow | int, cfg: GeneratorConfig | None = None) -> BenignHttp:
    return BenignHttp(f, _window(f, window), cfg).schedule()
