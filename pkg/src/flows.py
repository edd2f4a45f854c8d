# src/flows.py
from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd

from .errors import FlowLabelConflict
from .manifest import FileEntry
from .packets import TcpFlags, decode_frame
from .pcap import iter_pcap

__all__ = ["IDLE_TIMEOUT_US", "FLOW_COLUMNS", "packet_table", "extract_flows", "write_flows"]

log = logging.getLogger(__name__)

IDLE_TIMEOUT_US = 120 * 1_000_000
_FLOW_KEY = ["node", "interface", "proto", "ep_a", "ep_b"]
_LABEL = ["kind", "attack_type", "initiator", "responder"]

FLOW_COLUMNS = [
    "flow", "node", "interface", "proto", "src", "sport", "dst", "dport",
    "start_us", "duration_us", "packets_fwd", "packets_bwd", "bytes_fwd", "bytes_bwd",
    "syn", "fin", "rst", "mean_iat_us",
]


def packet_table(root: str | Path, files: Iterable[FileEntry]) -> pd.DataFrame:
    """One row per captured IPv4 record: file, record, capture point, 5-tuple, length, TCP flags."""
    root = Path(root)
    rows = []
    for e in files:
        for i, (ts, frame, wirelen) in enumerate(iter_pcap(root / e.path)):
            h = decode_frame(frame)
            if h is None:
                continue
            a, b = f"{h.src}:{h.sport}", f"{h.dst}:{h.dport}"
            rows.append((e.path, i, e.node, e.interface, ts, h.proto, h.src, h.sport, h.dst, h.dport,
                         wirelen, h.flags, *sorted((a, b))))
    return pd.DataFrame(rows, columns=[
        "file", "record", "node", "interface", "ts_us", "proto", "src", "sport", "dst", "dport",
        "length", "flags", "ep_a", "ep_b",
    ])


def _assign_flows(pk: pd.DataFrame) -> pd.DataFrame:
    pk = pk.sort_values(_FLOW_KEY + ["ts_us", "file", "record"], kind="mergesort").reset_index(drop=True)
    same_key = (pk[_FLOW_KEY] == pk[_FLOW_KEY].shift()).all(axis=1)
    gap = pk["ts_us"].diff()
    new = ~same_key | (gap > IDLE_TIMEOUT_US)
    pk["flow"] = new.cumsum() - 1
    return pk


def extract_flows(
    root: str | Path,
    files: Iterable[FileEntry],
    labels: pd.DataFrame | None = None,
    strict: bool = True,
) -> pd.DataFrame:
    """Bidirectional flow features per capture point.

    Records are grouped by (node, interface, protocol, endpoint pair) across
    every file of an interface, then split where the gap between consecutive
    packets exceeds IDLE_TIMEOUT_US. The forward direction is the one of the
    flow's first packet.

    With ``labels`` the flow carries its member packets' label. Members must
    agree on kind, attack type, initiator and responder; disagreement raises
    FlowLabelConflict when ``strict``, otherwise the majority label is kept
    and the flow is marked ``mixed``.
    """
    pk = packet_table(root, files)
    cols = FLOW_COLUMNS + ([*_LABEL, "mixed"] if labels is not None else [])
    if pk.empty:
        return pd.DataFrame(columns=cols)
    pk = _assign_flows(pk)

    first = pk.groupby("flow").first()
    fwd = (pk["src"].to_numpy() == first["src"].to_numpy()[pk["flow"]]) & (
        pk["sport"].to_numpy() == first["sport"].to_numpy()[pk["flow"]]
    )
    pk["fwd"] = fwd
    pk["len_fwd"] = np.where(fwd, pk["length"], 0)
    pk["len_bwd"] = np.where(fwd, 0, pk["length"])
    pk["syn"] = (pk["flags"] & int(TcpFlags.SYN)) != 0
    pk["fin"] = (pk["flags"] & int(TcpFlags.FIN)) != 0
    pk["rst"] = (pk["flags"] & int(TcpFlags.RST)) != 0
    pk["iat"] = pk.groupby("flow")["ts_us"].diff()

    g = pk.groupby("flow")
    out = pd.DataFrame({
        "flow": first.index,
        "node": first["node"],
        "interface": first["interface"],
        "proto": first["proto"],
        "src": first["src"],
        "sport": first["sport"],
        "dst": first["dst"],
        "dport": first["dport"],
        "start_us": g["ts_us"].min(),
        "duration_us": g["ts_us"].max() - g["ts_us"].min(),
        "packets_fwd": g["fwd"].sum(),
        "packets_bwd": g["fwd"].size() - g["fwd"].sum(),
        "bytes_fwd": g["len_fwd"].sum(),
        "bytes_bwd": g["len_bwd"].sum(),
        "syn": g["syn"].sum(),
        "fin": g["fin"].sum(),
        "rst": g["rst"].sum(),
        "mean_iat_us": g["iat"].mean().fillna(0.0),
    }).reset_index(drop=True)

    if labels is not None:
        lab = pk[["flow", "file", "record"]].merge(labels[["file", "record", *_LABEL]], on=["file", "record"], how="left")
        lab[_LABEL] = lab[_LABEL].fillna("")
        counts = lab.groupby(["flow", *_LABEL]).size().rename("n").reset_index()
        n_labels = counts.groupby("flow").size()
        mixed = n_labels[n_labels > 1]
        if len(mixed) and strict:
            f0 = int(mixed.index[0])
            row = out.loc[out["flow"] == f0].iloc[0]
            raise FlowLabelConflict(
                f"{len(mixed)} flow(s) with mixed labels, e.g. {row['src']}:{row['sport']} -> "
                f"{row['dst']}:{row['dport']} on {row['node']}/{row['interface']}"
            )
        majority = counts.sort_values(["flow", "n"], ascending=[True, False], kind="mergesort").drop_duplicates("flow")
        out = out.merge(majority.drop(columns="n"), on="flow", how="left")
        out["mixed"] = out["flow"].isin(mixed.index)
        if len(mixed):
            log.warning("%d flow(s) with mixed labels; kept the majority label", len(mixed))

    ints = ["sport", "dport", "proto", "start_us", "duration_us", "packets_fwd", "packets_bwd",
            "bytes_fwd", "bytes_bwd", "syn", "fin", "rst"]
    out = out.astype({c: "int64" for c in ints})
    log.info("%d flow(s) from %d packet(s)", len(out), len(pk))
    return out[cols]


def write_flows(df: pd.DataFrame, out_dir: str | Path) -> tuple[Path, Path | None]:
    """flows.csv and flows.parquet (fastparquet) under ``out_dir``; no parquet for an empty table."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, pq_path = out_dir / "flows.csv", out_dir / "flows.parquet"
    df.to_csv(csv_path, index=False, lineterminator="\n")
    if df.empty:
        return csv_path, None
    df.to_parquet(pq_path, index=False, engine="fastparquet")
    return csv_path, pq_path
