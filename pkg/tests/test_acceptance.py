"""Full-length preset runs checked against their intended attack matrix."""
import pytest
from scapy.all import IP, TCP, rdpcap

from src.labeling import read_labels
from src.manifest import LABELS_NAME, load_manifest, verify_files
from src.presets import preset
from src.scenario import flow_matrix
from src.simulation import run_preset

pytestmark = pytest.mark.slow


def _attack_triples(labels):
    attack = labels[labels["kind"] == "Attack"]
    return set(zip(attack["initiator"], attack["responder"], attack["attack_type"]))


@pytest.mark.parametrize("name", ["fig2a-dos", "fig2c-bruteforce", "fig2d-heartbleed"])
def test_preset_labels_match_the_attack_matrix(name, tmp_path):
    result = run_preset(name, tmp_path)
    assert result.ok
    assert result.audit.coverage == 1.0 and result.audit.mismatches == 0

    labels = read_labels(tmp_path / LABELS_NAME)
    expected = {(a, v, t.value) for a, v, t in flow_matrix(preset(name))}
    assert _attack_triples(labels) == expected

    m = load_manifest(tmp_path)
    assert verify_files(m, tmp_path) == []


def test_fig2a_capture_reads_with_scapy(tmp_path):
    result = run_preset("fig2a-dos", tmp_path)
    busiest = max(result.files, key=lambda e: e.packet_count)
    frames = rdpcap(str(tmp_path / busiest.path))
    assert len(frames) == busiest.packet_count
    tcp = [f for f in frames if f.haslayer(TCP)]
    assert tcp and all(f[IP].version == 4 for f in tcp)
