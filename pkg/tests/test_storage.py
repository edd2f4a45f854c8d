import pytest

from src.errors import TransferError
from src.fabric import build_fabric
from src.generators import schedule_attacks
from src.hooks import finalize
from src.manifest import FileEntry
from src.metrics import plane_isolation
from src.pcap import file_sha256
from src.scenario import AttackSpec, AttackType, ImageRole, NodeRole, PodSpec, horizon_us
from src.storage import CHUNK, FIRST_SPORT, TransferFault, transfer_sport, transfer_to_storage


def _flood(small_scenario):
    pods = [PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"), PodSpec("hping3-wn1", ImageRole.HPING3, "wn1")]
    attack = AttackSpec(AttackType.TCP_SYN_FLOOD, "hping3-wn1", "nginx-wn3", duration=1.0)
    return small_scenario(pods, [attack])


@pytest.fixture
def staged(small_scenario, tmp_path):
    s = _flood(small_scenario)
    staging = tmp_path / "staging"
    f = build_fabric(s, capture_root=staging)
    schedule_attacks(f)
    f.run_until(horizon_us(s))
    f.quiesce()
    entries = [FileEntry.from_pcap(pf, staging) for tap in f.taps for pf in finalize(tap, horizon_us(s))]
    return f, staging, entries


def test_transfer_moves_every_file_over_the_storage_plane(staged, tmp_path):
    f, staging, entries = staged
    assert max(e.size for e in entries) > CHUNK
    dest = tmp_path / "out"

    receipt = transfer_to_storage(f, entries, source_root=staging, dest_root=dest)

    assert receipt.ok and receipt.storage_node == "storage"
    assert len(receipt.entries) == len(entries) and receipt.failed == []
    for e in entries:
        assert file_sha256(dest / e.path) == e.sha256
        assert not (staging / e.path).exists()
    iso = plane_isolation(f)
    assert iso["isolated"] and iso["storage_packets"] > 0
    assert receipt.to_dict()["files"][0]["path"].startswith("nodes/")


def test_interrupted_transfer_is_reported_and_source_kept(staged, tmp_path):
    f, staging, entries = staged
    victim = max(entries, key=lambda e: e.size)
    dest = tmp_path / "out"

    receipt = transfer_to_storage(f, entries, source_root=staging, dest_root=dest,
                                  fault=TransferFault(victim.path, 100))

    assert not receipt.ok
    assert receipt.failed == [victim.path]
    assert (staging / victim.path).exists()
    others = [e for e in entries if e.path != victim.path]
    assert all((dest / e.path).exists() and not (staging / e.path).exists() for e in others)


def test_empty_inventory_gives_empty_receipt(staged, tmp_path):
    f, staging, _ = staged
    receipt = transfer_to_storage(f, [], source_root=staging, dest_root=tmp_path / "out")
    assert receipt.ok and receipt.entries == []


def test_missing_storage_node_is_an_error(small_scenario, tmp_path):
    s = _flood(small_scenario)
    s = type(s)(tuple(n for n in s.nodes if n.role is not NodeRole.STORAGE), s.pods, s.attacks, s.capture, s.seed)
    f = build_fabric(s, capture_root=tmp_path)
    with pytest.raises(TransferError):
        transfer_to_storage(f, [], source_root=tmp_path, dest_root=tmp_path / "out")


@pytest.mark.parametrize("k, port", [(0, FIRST_SPORT), (15535, 65535), (15536, FIRST_SPORT), (40000, FIRST_SPORT + 8928)])
def test_transfer_source_ports_stay_in_range(k, port):
    assert transfer_sport(k) == port
