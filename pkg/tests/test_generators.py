import pytest

from src.fabric import build_fabric
from src.generators import MAX_READ_WINDOW, GeneratorConfig, GenStatus, default_wordlist, schedule_attacks
from src.hooks import finalize
from src.packets import TcpFlags, decode_frame
from src.metrics import syn_only_fraction
from src.pcap import read_pcap
from src.scenario import DATAPATH_IFACE, AttackSpec, AttackType, ImageRole, PodSpec, SchedulePolicy, horizon_us


def run(s, tmp_path):
    f = build_fabric(s, capture_root=tmp_path)
    gens = schedule_attacks(f)
    f.run_until(horizon_us(s))
    f.quiesce()
    return f, gens


def test_syn_flood_is_syn_only(small_scenario, tmp_path):
    pods = [PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"), PodSpec("hping3-wn1", ImageRole.HPING3, "wn1")]
    attack = AttackSpec(AttackType.TCP_SYN_FLOOD, "hping3-wn1", "nginx-wn3", duration=2.0, params={"rate_pps": 200})
    f, (g,) = run(small_scenario(pods, [attack]), tmp_path)

    assert g.status is GenStatus.DONE and g.packets == 400
    tap = next(t for t in f.taps if (t.node, t.interface) == ("wn3", DATAPATH_IFACE))
    paths = [pf.path for pf in finalize(tap, horizon_us(f.scenario)) if pf.direction == "in"]
    assert syn_only_fraction(paths, f.pod_ips["nginx-wn3"], 80) >= 0.99
    # random source ports may repeat; a repeated SYN is not a new half-open entry
    assert 0 < f.host("nginx-wn3").half_open_peak <= 400


def test_icmp_flood_gets_echo_replies(small_scenario, tmp_path):
    pods = [PodSpec("apache-wn4", ImageRole.APACHE, "wn4"), PodSpec("hping3-wn2", ImageRole.HPING3, "wn2")]
    attack = AttackSpec(AttackType.ICMP_FLOOD, "hping3-wn2", "apache-wn4", duration=1.0, params={"rate_pps": 50})
    f, (g,) = run(small_scenario(pods, [attack]), tmp_path)
    assert g.packets == 50
    assert f.host("apache-wn4").echo_replies == 50


def test_brute_force_stops_at_the_true_pair(small_scenario, tmp_path):
    words = [[f"user{i}", f"pw{i}"] for i in range(10)]
    pods = [PodSpec("mysql-wn3", ImageRole.MYSQL, "wn3"), PodSpec("hydra-wn1", ImageRole.HYDRA, "wn1")]
    attack = AttackSpec(AttackType.BRUTE_FORCE, "hydra-wn1", "mysql-wn3", duration=5.0,
                        params={"wordlist": words, "true_credentials": words[7]})
    f, (g,) = run(small_scenario(pods, [attack]), tmp_path)

    assert g.found == ("user7", "pw7")
    assert g.attempts == 8
    service = f.host("mysql-wn3").state.service
    assert (service.ok, service.err) == (1, 7)


@pytest.mark.parametrize("params, leak_per_reply", [
    ({"heartbeat_claimed_len": 1000, "heartbeat_actual_len": 16}, 984),
    ({"heartbeat_claimed_len": 1000, "heartbeat_actual_len": 16, "vulnerable": False}, 0),
])
def test_heartbleed_leak_is_claimed_minus_actual(small_scenario, tmp_path, params, leak_per_reply):
    pods = [PodSpec("heartbleed-wn3", ImageRole.HEARTBLEED_APACHE, "wn3"),
            PodSpec("metasploit-wn1", ImageRole.METASPLOIT, "wn1")]
    attack = AttackSpec(AttackType.HEARTBLEED, "metasploit-wn1", "heartbleed-wn3", duration=3.0,
                        params={**params, "heartbeat_rate": 2.0})
    f, (g,) = run(small_scenario(pods, [attack]), tmp_path)

    assert g.results and len(g.results) == g.attempts
    assert g.leaked_bytes == leak_per_reply * len(g.results)
    assert f.host("heartbleed-wn3").state.service.over_read_bytes == g.leaked_bytes


def test_patched_silent_server_sends_no_heartbeat_reply(small_scenario, tmp_path):
    pods = [PodSpec("heartbleed-wn3", ImageRole.HEARTBLEED_APACHE, "wn3"),
            PodSpec("metasploit-wn1", ImageRole.METASPLOIT, "wn1")]
    attack = AttackSpec(AttackType.HEARTBLEED, "metasploit-wn1", "heartbleed-wn3", duration=3.0,
                        params={"vulnerable": False, "patched_behavior": "silent"})
    f, (g,) = run(small_scenario(pods, [attack]), tmp_path)
    assert g.attempts >= 1 and g.results == []
    assert f.host("heartbleed-wn3").state.service.heartbeats >= 1


def test_slowloris_never_completes_a_request(small_scenario, tmp_path):
    pods = [PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"), PodSpec("slow-wn1", ImageRole.SLOWHTTPTEST, "wn1")]
    attack = AttackSpec(AttackType.SLOWLORIS, "slow-wn1", "nginx-wn3", duration=4.0,
                        params={"connections": 5, "connect_rate": 10, "interval": 1.0})
    f, (g,) = run(small_scenario(pods, [attack]), tmp_path)
    assert g.opened == 5
    assert f.host("nginx-wn3").state.service.completed_requests == 0


def _captured(f, node):
    tap = next(t for t in f.taps if (t.node, t.interface) == (node, DATAPATH_IFACE))
    frames = [data for pf in finalize(tap, horizon_us(f.scenario)) for _, data in read_pcap(pf.path)]
    return [h for h in map(decode_frame, frames) if h is not None]


@pytest.mark.parametrize("read_window", [8, MAX_READ_WINDOW])
def test_slow_read_paces_the_victim(small_scenario, tmp_path, read_window):
    pods = [PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"), PodSpec("slow-wn1", ImageRole.SLOWHTTPTEST, "wn1")]
    attack = AttackSpec(AttackType.SLOW_READ, "slow-wn1", "nginx-wn3", duration=4.0,
                        params={"connections": 2, "connect_rate": 10, "interval": 0.5, "read_window": read_window})
    f, (g,) = run(small_scenario(pods, [attack]), tmp_path)
    attacker, victim = f.pod_ips["slow-wn1"], f.pod_ips["nginx-wn3"]
    seen = _captured(f, "wn3")

    advertised = [h.window for h in seen if h.src == attacker and not h.flags & TcpFlags.RST]
    assert advertised and max(advertised) <= read_window
    # the victim never has more unacknowledged data out than the client window
    served = [len(h.payload) for h in seen if h.src == victim and h.payload]
    assert served and max(served) <= read_window
    assert sum(served) <= read_window * (g.opened + g.packets)
    assert f.host("nginx-wn3").state.service.completed_requests == g.opened


def test_client_connections_use_distinct_ephemeral_ports(small_scenario, tmp_path):
    pods = [PodSpec("apache-wn4", ImageRole.APACHE, "wn4"), PodSpec("hulk-wn2", ImageRole.HULK, "wn2")]
    attack = AttackSpec(AttackType.HULK_GET, "hulk-wn2", "apache-wn4", duration=4.0, params={"conn_rate": 100})
    f, (g,) = run(small_scenario(pods, [attack]), tmp_path)
    syns = [h.sport for h in _captured(f, "wn4")
            if h.src == f.pod_ips["hulk-wn2"] and h.flags == TcpFlags.SYN]
    assert len(syns) == g.requests == 400
    assert len(set(syns)) == len(syns)
    assert all(32768 <= p <= 60999 for p in syns)


def test_slow_range_draws_partial_responses(small_scenario, tmp_path):
    pods = [PodSpec("apache-wn4", ImageRole.APACHE, "wn4"), PodSpec("slow-wn2", ImageRole.SLOWHTTPTEST, "wn2")]
    attack = AttackSpec(AttackType.SLOW_RANGE, "slow-wn2", "apache-wn4", duration=3.0,
                        params={"connections": 2, "connect_rate": 10, "interval": 1.0})
    f, _ = run(small_scenario(pods, [attack]), tmp_path)
    assert f.host("apache-wn4").state.service.partial_responses > 0


def test_hulk_requests_are_answered(small_scenario, tmp_path):
    pods = [PodSpec("apache-wn4", ImageRole.APACHE, "wn4"), PodSpec("hulk-wn2", ImageRole.HULK, "wn2")]
    attack = AttackSpec(AttackType.HULK_GET, "hulk-wn2", "apache-wn4", duration=2.0, params={"conn_rate": 5})
    f, (g,) = run(small_scenario(pods, [attack]), tmp_path)
    assert g.requests == 10
    assert g.responses == g.requests == f.host("apache-wn4").state.service.completed_requests


def test_seq_prediction_probes_are_discarded(small_scenario, tmp_path):
    pods = [PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"), PodSpec("client-master", ImageRole.BENIGN_CLIENT, "master"),
            PodSpec("hping3-wn1", ImageRole.HPING3, "wn1")]
    attacks = [
        AttackSpec(AttackType.BENIGN, "client-master", "nginx-wn3", start=0.0, duration=8.0,
                   params={"mode": "persistent", "sport": 40001, "interval": 1.0}),
        AttackSpec(AttackType.TCP_SEQ_PREDICTION, "hping3-wn1", "nginx-wn3", start=2.0, duration=3.0,
                   params={"hijack_client": "client-master", "hijack_sport": 40001, "probe_interval": 0.5}),
    ]
    f, (benign, hijack) = run(small_scenario(pods, attacks, SchedulePolicy.AS_SPECIFIED), tmp_path)

    assert hijack.status is GenStatus.DONE and hijack.rounds > 0
    assert f.host("nginx-wn3").discarded >= hijack.packets > 0
    assert benign.requests > 0 and benign.responses == benign.requests


def test_seq_prediction_without_target_is_skipped(small_scenario, tmp_path):
    pods = [PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"), PodSpec("hping3-wn1", ImageRole.HPING3, "wn1")]
    attack = AttackSpec(AttackType.TCP_SEQ_PREDICTION, "hping3-wn1", "nginx-wn3", duration=1.0)
    _, (g,) = run(small_scenario(pods, [attack]), tmp_path)
    assert g.status is GenStatus.SKIPPED and g.packets == 0


def test_config_defaults_and_errors():
    cfg = GeneratorConfig.from_params(AttackType.BENIGN, {})
    assert (cfg.conn_rate, cfg.interval) == (1.0, 2.0)
    assert GeneratorConfig.from_params(AttackType.TCP_SYN_FLOOD, {"rate_pps": 10}).rate_pps == 10.0
    assert len(default_wordlist()) == 500
    with pytest.raises(ValueError, match="unknown parameter"):
        GeneratorConfig.from_params(AttackType.TCP_SYN_FLOOD, {"connections": 3})
    with pytest.raises(ValueError):
        GeneratorConfig.from_params(AttackType.HEARTBLEED, {"heartbeat_actual_len": 10, "heartbeat_claimed_len": 5})
