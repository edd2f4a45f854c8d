import pytest

from src.errors import AlreadyAttached, UnknownInterface
from src.fabric import HOP_US, build_fabric
from src.hooks import DROP, CaptureConfig, HookProgram, TapSpec, attach, finalize
from src.metrics import capture_completeness
from src.packets import Tcp, TcpFlags, decode_frame
from src.pcap import read_pcap
from src.scenario import BRIDGE_IFACE, DATAPATH_IFACE, US, ImageRole, PodSpec

T0 = 100_000


def _pods():
    return [PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"), PodSpec("hping3-wn1", ImageRole.HPING3, "wn1")]


def _syn(f, ts_us=T0, sport=1234):
    host = f.host("hping3-wn1")
    return host.frame(f.pod_ips["nginx-wn3"], Tcp(sport, 80, 1000, 0, int(TcpFlags.SYN), 512), ts_us=ts_us)


def _tap(f, node, iface):
    return next(t for t in f.taps if (t.node, t.interface) == (node, iface))


def test_overlay_path_captures_both_directions_at_hop_times(small_scenario, tmp_path):
    f = build_fabric(small_scenario(_pods(), []), capture_root=tmp_path)
    f.inject("hping3-wn1", _syn(f))
    f.run_until(US)
    f.quiesce()

    assert f.host("nginx-wn3").half_open == 1
    tap = _tap(f, "wn3", DATAPATH_IFACE)
    files = {pf.direction: pf for pf in finalize(tap, US)}
    (ts_in, frame_in), = read_pcap(files["in"].path)
    (ts_out, frame_out), = read_pcap(files["out"].path)

    h_in, h_out = decode_frame(frame_in), decode_frame(frame_out)
    assert ts_in == T0 + 4 * HOP_US
    assert h_in.flags == TcpFlags.SYN and h_in.ttl == 63
    # the SYN-ACK leaves one hop after the pod interface, TTL untouched yet
    assert ts_out == T0 + 6 * HOP_US + HOP_US
    assert h_out.flags == TcpFlags.SYN | TcpFlags.ACK and h_out.ttl == 64
    assert capture_completeness(tap, list(files.values()))["complete"]

    # nothing crossed wn4
    for t in f.taps:
        if t.node == "wn4":
            assert all(pf.packet_count == 0 for pf in finalize(t, US))


def test_rotation_and_header_only_slots(small_scenario, tmp_path):
    s = small_scenario(_pods(), [], rotation=1.0)
    f = build_fabric(s, capture_root=tmp_path)
    f.inject("hping3-wn1", _syn(f, 500_000, 1111))
    f.inject("hping3-wn1", _syn(f, 1_500_000, 2222))
    f.run_until(2 * US)
    f.quiesce()

    tap = _tap(f, "wn3", BRIDGE_IFACE)
    files = finalize(tap, 3 * US)
    assert [(pf.direction, pf.slot) for pf in files] == [
        ("in", 0), ("in", 1), ("in", 2), ("out", 0), ("out", 1), ("out", 2)
    ]
    counts = {(pf.direction, pf.slot): pf.packet_count for pf in files}
    assert counts[("in", 0)] == counts[("in", 1)] == 1
    assert counts[("in", 2)] == 0
    empty = next(pf for pf in files if pf.slot == 2)
    assert empty.size == 24 and read_pcap(empty.path) == []
    assert files[0].path.name == "wn3_vethwe-bridge_in_0.pcap"


def test_capture_precedes_drop_verdict(small_scenario, tmp_path):
    s = small_scenario(_pods(), [])
    s = s.with_capture(CaptureConfig(taps=(TapSpec("wn4", DATAPATH_IFACE),)))
    f = build_fabric(s, capture_root=tmp_path)
    tap = attach(f, ("wn3", DATAPATH_IFACE), HookProgram("drop", lambda p: DROP), s.capture)

    f.inject("hping3-wn1", _syn(f))
    f.run_until(US)
    f.quiesce()

    assert f.stats.dropped == 1
    assert f.host("nginx-wn3").half_open == 0
    assert sum(pf.packet_count for pf in finalize(tap, US)) == 1


def test_attach_errors(small_scenario, tmp_path):
    s = small_scenario(_pods(), [])
    f = build_fabric(s, capture_root=tmp_path)
    with pytest.raises(AlreadyAttached):
        attach(f, ("wn3", DATAPATH_IFACE), HookProgram(), s.capture)
    with pytest.raises(UnknownInterface):
        attach(f, ("wn3", "eth9"), HookProgram(), s.capture)


def test_unroutable_frame_is_dropped(small_scenario, tmp_path):
    f = build_fabric(small_scenario(_pods(), []), capture_root=tmp_path)
    host = f.host("hping3-wn1")
    f.inject("hping3-wn1", host.frame("10.99.0.9", Tcp(1, 80, 0, 0, int(TcpFlags.SYN)), ts_us=T0))
    f.run_until(US)
    assert f.stats.injected == 1 and f.stats.dropped == 1 and f.stats.delivered == 0


def test_schedule_in_the_past_is_rejected(small_scenario, tmp_path):
    f = build_fabric(small_scenario(_pods(), []), capture_root=tmp_path)
    f.run_until(US)
    with pytest.raises(ValueError):
        f.schedule(US - 1, lambda _: None)


def test_hook_sees_every_frame_once(small_scenario, tmp_path):
    s = small_scenario(_pods(), [])
    s = s.with_capture(CaptureConfig(taps=(TapSpec("wn4", DATAPATH_IFACE),)))
    f = build_fabric(s, capture_root=tmp_path)
    tap = attach(f, ("wn3", DATAPATH_IFACE), HookProgram("drop", lambda p: DROP), s.capture)

    for i in range(10):
        f.inject("hping3-wn1", _syn(f, T0 + i * 1000, 2000 + i))
    f.run_until(US)

    assert tap.invocations == 10
    assert capture_completeness(tap, finalize(tap, US))["complete"]


def test_rotation_boundary_at_sixty_seconds(small_scenario, tmp_path):
    f = build_fabric(small_scenario(_pods(), []), capture_root=tmp_path)
    f.inject("hping3-wn1", _syn(f, 59_900_000, 1111))
    f.inject("hping3-wn1", _syn(f, 60_100_000, 2222))
    f.run_until(61 * US)
    f.quiesce()

    files = finalize(_tap(f, "wn3", DATAPATH_IFACE), 61 * US)
    counts = {(pf.direction, pf.slot): pf.packet_count for pf in files}
    assert counts[("in", 0)] == 1 and counts[("in", 1)] == 1
