import pandas as pd
import pytest

from src.errors import FlowLabelConflict
from src.flows import FLOW_COLUMNS, IDLE_TIMEOUT_US, _assign_flows, extract_flows, packet_table, write_flows
from src.labeling import read_labels
from src.manifest import LABELS_NAME
from src.scenario import DATAPATH_IFACE, AttackSpec, AttackType, ImageRole, PodSpec
from src.simulation import run_scenario


@pytest.fixture
def dataset(small_scenario, tmp_path):
    pods = [
        PodSpec("nginx-wn3", ImageRole.NGINX, "wn3"),
        PodSpec("hping3-wn1", ImageRole.HPING3, "wn1"),
        PodSpec("client-wn2", ImageRole.BENIGN_CLIENT, "wn2"),
    ]
    attacks = [
        AttackSpec(AttackType.TCP_SYN_FLOOD, "hping3-wn1", "nginx-wn3", duration=1.0, params={"rate_pps": 20}),
        AttackSpec(AttackType.BENIGN, "client-wn2", "nginx-wn3", duration=6.0, params={"conn_rate": 2.0}),
    ]
    result = run_scenario(small_scenario(pods, attacks), tmp_path)
    assert result.ok
    return tmp_path, result.files, read_labels(tmp_path / LABELS_NAME)


def test_flows_carry_one_label_each(dataset):
    root, files, labels = dataset
    flows = extract_flows(root, files, labels)
    assert list(flows.columns) == FLOW_COLUMNS + ["kind", "attack_type", "initiator", "responder", "mixed"]
    assert not flows["mixed"].any()
    assert set(flows["kind"]) == {"Attack", "Benign"}

    syn = flows[(flows["attack_type"] == "TcpSynFlood") & (flows["interface"] == DATAPATH_IFACE)]
    assert len(syn) > 0
    # forward direction is the SYN; the backward packet is the SYN-ACK
    assert (syn["dst"] == "10.34.0.2").all() and (syn["dport"] == 80).all()
    assert (syn["packets_bwd"] <= syn["packets_fwd"]).all()
    assert syn["packets_fwd"].sum() == 20

    benign = flows[flows["kind"] == "Benign"]
    assert (benign["fin"] >= 2).all() and (benign["packets_bwd"] > 0).all()


def test_packet_counts_add_up(dataset):
    root, files, labels = dataset
    flows = extract_flows(root, files)
    assert (flows["packets_fwd"] + flows["packets_bwd"]).sum() == len(packet_table(root, files)) == len(labels)


def test_label_disagreement_inside_a_flow(dataset):
    root, files, labels = dataset
    pk = packet_table(root, files)
    # a record of a multi-packet benign flow relabelled as attack
    benign = labels[labels["kind"] == "Benign"].iloc[0]
    bad = labels.copy()
    hit = (bad["file"] == benign["file"]) & (bad["record"] == benign["record"])
    bad.loc[hit, ["kind", "attack_type"]] = ["Attack", "HulkGet"]
    assert len(pk) == len(labels)

    with pytest.raises(FlowLabelConflict):
        extract_flows(root, files, bad, strict=True)
    flows = extract_flows(root, files, bad, strict=False)
    assert flows["mixed"].sum() == 1
    assert flows.loc[flows["mixed"], "kind"].iloc[0] == "Benign"


def test_idle_gap_splits_a_flow():
    row = dict(node="wn3", interface="vethwe-datapath", proto=6, ep_a="10.33.0.2:1000", ep_b="10.34.0.2:80")
    pk = pd.DataFrame([
        {**row, "ts_us": 0, "file": "f", "record": 0},
        {**row, "ts_us": IDLE_TIMEOUT_US, "file": "f", "record": 1},
        {**row, "ts_us": 2 * IDLE_TIMEOUT_US + 1, "file": "f", "record": 2},
    ])
    assert _assign_flows(pk)["flow"].tolist() == [0, 0, 1]


def test_write_flows(dataset, tmp_path):
    root, files, labels = dataset
    flows = extract_flows(root, files, labels)
    csv_path, pq_path = write_flows(flows, tmp_path / "flows")
    assert len(pd.read_csv(csv_path)) == len(flows)
    assert len(pd.read_parquet(pq_path, engine="fastparquet")) == len(flows)

    _, none = write_flows(flows.iloc[0:0], tmp_path / "empty")
    assert none is None
