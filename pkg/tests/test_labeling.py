import pytest

from src.fabric import build_fabric
from src.generators import INJECTED_PAYLOAD, hijack_target, schedule_attacks
from src.hooks import finalize
from src.labeling import (
    INFRASTRUCTURE,
    LABEL_COLUMNS,
    CapturedRecord,
    Labeler,
    LabelKind,
    audit_ground_truth,
    label_packet,
    labels_frame,
)
from src.packets import Ethernet, FrameHeader, IPv4, IpProto, Packet, Tcp, TcpFlags, mac_for
from src.presets import preset
from src.scenario import US, AttackSpec, AttackType, ImageRole, PodSpec, attack_windows, horizon_us


MAC_A, MAC_B = mac_for("wn1", "hping3"), mac_for("wn3", "nginx")


def header(src, dst, proto=IpProto.TCP, sport=1234, dport=80, seq=0, payload=b""):
    return FrameHeader(src, dst, proto, sport, dport, int(TcpFlags.ACK), seq, 0, 64240, 63, -1, payload)


def test_pair_and_window_decide_the_label():
    s = preset("fig2a-dos")
    lab = Labeler(s)
    syn = header("10.33.0.2", "10.34.0.2")

    lb = lab.label(10 * US, syn)
    assert lb.kind is LabelKind.ATTACK and lb.attack_type == "TcpSynFlood"
    assert (lb.initiator, lb.responder, lb.window) == ("hping3-wn1", "nginx-wn3", 0)
    # responses carry the attack's label too
    assert lab.label(10 * US, header("10.34.0.2", "10.33.0.2", sport=80, dport=1234)) == lb
    # grace after the window end, then nothing
    assert lab.label(60 * US + US // 2, syn) == lb
    assert lab.unmatched == 0
    assert lab.label(61 * US, syn) == INFRASTRUCTURE
    assert lab.unmatched == 1


def test_unknown_addresses_and_non_ip_are_infrastructure():
    lab = Labeler(preset("fig2a-dos"))
    assert lab.label(US, header("10.33.0.2", "10.99.0.1")) == INFRASTRUCTURE
    assert lab.label(US, None) == INFRASTRUCTURE
    # hulk pair outside its window
    assert lab.label(64 * US, header("10.35.0.2", "10.36.0.2")) == INFRASTRUCTURE
    assert lab.unmatched == 3


def test_hijacked_session_segments_split_by_session_plan():
    s = preset("fig2b-ddos-tcpseq")
    lab = Labeler(s)
    w = next(w for w in attack_windows(s) if w.spec.attack_type is AttackType.TCP_SEQ_PREDICTION)
    plan = hijack_target(s, w.index)
    seq, payload = next(iter(plan.data.items()))

    planned = header(plan.client_ip, plan.server_ip, sport=plan.sport, dport=plan.dport, seq=seq, payload=payload)
    assert lab.label(10 * US, planned).kind is LabelKind.BENIGN

    forged = planned._replace(payload=INJECTED_PAYLOAD)
    lb = lab.label(10 * US, forged)
    assert lb.kind is LabelKind.ATTACK and lb.attack_type == "TcpSeqPrediction" and lb.window == w.index

    # before the hijack window starts the same bytes belong to the session
    assert lab.label(w.start_us - 1, forged).kind is LabelKind.BENIGN


def test_label_packet_decodes_the_frame():
    s = preset("fig2a-dos")
    rec = CapturedRecord("x.pcap", 0, 70 * US, b"\x00" * 10)
    out = label_packet(s, rec)
    assert (out.file, out.record, out.label) == ("x.pcap", 0, INFRASTRUCTURE)


# ----------------------------
# Audit against the origin tags
# ----------------------------

def _mixed_workload(small_scenario):
    pods = [
        PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"),
        PodSpec("apache-wn4", ImageRole.APACHE, "wn4"),
        PodSpec("hping3-wn1", ImageRole.HPING3, "wn1"),
        PodSpec("client-wn2", ImageRole.BENIGN_CLIENT, "wn2"),
    ]
    attacks = [
        AttackSpec(AttackType.TCP_SYN_FLOOD, "hping3-wn1", "nginx-wn3", duration=1.0, params={"rate_pps": 50}),
        AttackSpec(AttackType.ICMP_FLOOD, "hping3-wn1", "apache-wn4", duration=1.0, params={"rate_pps": 20}),
        AttackSpec(AttackType.BENIGN, "client-wn2", "nginx-wn3", duration=10.0, params={"conn_rate": 2.0}),
    ]
    return small_scenario(pods, attacks)


@pytest.fixture
def captured(small_scenario, tmp_path):
    s = _mixed_workload(small_scenario)
    f = build_fabric(s, capture_root=tmp_path)
    schedule_attacks(f)
    f.run_until(horizon_us(s))
    f.quiesce()
    keys, tags = [], {}
    for tap in f.taps:
        for pf in finalize(tap, horizon_us(s)):
            keys.append(pf.path.relative_to(tmp_path).as_posix())
        for name, seq in tap.tags.items():
            tags[(tap.directory / name).relative_to(tmp_path).as_posix()] = seq
    labels, unmatched = labels_frame(s, tmp_path, sorted(keys))
    return s, labels, tags, unmatched


def test_audit_passes_on_fresh_labels(captured):
    s, labels, tags, unmatched = captured
    report = audit_ground_truth(s, tags, labels)
    assert report.passed and report.coverage == 1.0
    assert report.total == len(labels) > 0
    assert unmatched == 0
    assert set(labels["kind"]) == {"Attack", "Benign"}
    assert set(labels.loc[labels["kind"] == "Attack", "attack_type"]) == {"TcpSynFlood", "IcmpFlood"}
    assert list(labels.columns) == LABEL_COLUMNS


def test_audit_flags_corrupted_label(captured):
    s, labels, tags, _ = captured
    bad = labels.copy()
    idx = bad.index[bad["attack_type"] == "TcpSynFlood"][0]
    bad.loc[idx, "attack_type"] = "IcmpFlood"
    report = audit_ground_truth(s, tags, bad)
    assert report.mismatches == 1 and not report.passed
    assert report.examples[0]["attack_type_true"] == "TcpSynFlood"


def test_audit_flags_missing_records(captured):
    s, labels, tags, _ = captured
    report = audit_ground_truth(s, tags, labels.iloc[1:])
    assert report.labeled == report.total - 1
    assert report.coverage < 1.0 and not report.passed


def test_audit_of_empty_capture_passes_vacuously(tmp_path):
    s = preset("fig2a-dos")
    labels, _ = labels_frame(s, tmp_path, [])
    report = audit_ground_truth(s, {}, labels)
    assert report.total == 0 and report.coverage == 1.0 and report.passed


def test_truncated_forged_segment_is_not_taken_for_the_plan():
    s = preset("fig2b-ddos-tcpseq")
    lab = Labeler(s)
    w = next(w for w in attack_windows(s) if w.spec.attack_type is AttackType.TCP_SEQ_PREDICTION)
    plan = hijack_target(s, w.index)
    seq, payload = next(iter(plan.data.items()))
    planned = header(plan.client_ip, plan.server_ip, sport=plan.sport, dport=plan.dport, seq=seq, payload=payload)

    # snaplen kept only a prefix of a planned request: still the session's
    cut = planned._replace(payload=payload[:8], payload_len=len(payload))
    assert lab.label(10 * US, cut).kind is LabelKind.BENIGN
    # same captured prefix, but the segment on the wire was longer than planned
    forged = planned._replace(payload=payload[:8], payload_len=len(payload) + len(INJECTED_PAYLOAD))
    assert lab.label(10 * US, forged).kind is LabelKind.ATTACK
    # a header-only capture of a data segment at a control sequence number
    assert seq in plan.control_seqs
    bare = planned._replace(payload=b"", payload_len=len(INJECTED_PAYLOAD))
    assert lab.label(10 * US, bare).kind is LabelKind.ATTACK


def test_decoded_snaplen_frame_keeps_wire_length():
    s = preset("fig2b-ddos-tcpseq")
    w = next(w for w in attack_windows(s) if w.spec.attack_type is AttackType.TCP_SEQ_PREDICTION)
    plan = hijack_target(s, w.index)
    seq, payload = next(iter(plan.data.items()))
    forged = Packet(0, Ethernet(MAC_A, MAC_B), IPv4(plan.client_ip, plan.server_ip, IpProto.TCP),
                    Tcp(plan.sport, plan.dport, seq, 0, int(TcpFlags.PSH | TcpFlags.ACK)),
                    payload + INJECTED_PAYLOAD)
    frame = forged.wire()[: 14 + 20 + 20 + 8]
    out = Labeler(s).label_record(CapturedRecord("x.pcap", 0, 10 * US, frame))
    assert out.label.kind is LabelKind.ATTACK
