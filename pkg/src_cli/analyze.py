import argparse
from pathlib import Path

import pandas as pd

from src.labeling import read_labels
from src.manifest import LABELS_NAME, load_manifest


def summarize(labels: pd.DataFrame, windows: pd.DataFrame) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Per-label and per-window packet counts of a label index.

    Parameters
    ----------
    labels : pd.DataFrame
        Label index (one row per captured record).
    windows : pd.DataFrame
        Attack windows from the manifest (index, attack_type, attacker, victim, start_us, end_us).

    Returns
    -------
    (by_label, by_window) : tuple of DataFrames
    """
    cls = labels["attack_type"].where(labels["kind"] == "Attack", labels["kind"])
    by_label = (labels.assign(label=cls)
                      .groupby("label")
                      .agg(records=("record", "size"), files=("file", "nunique"),
                           first_us=("ts_us", "min"), last_us=("ts_us", "max"))
                      .reset_index())
    counts = (labels[labels["window"] >= 0]
              .groupby("window")
              .agg(records=("record", "size"), files=("file", "nunique"))
              .reset_index())
    by_window = windows.merge(counts, left_on="index", right_on="window", how="left").drop(columns="window")
    by_window[["records", "files"]] = by_window[["records", "files"]].fillna(0).astype("int64")
    by_window["duration_s"] = (by_window["end_us"] - by_window["start_us"]) / 1e6
    return by_label, by_window


def main():
    """Summarize a dataset directory into compact CSVs for reporting.

    Two summaries:
    1) records per label class (attack type, Benign, Infrastructure).
    2) records per scenario window (attack or benign entry).

    Notes
    -----
    - Idempotent: a directory without a label index prints [skip].
    - Each dataset gets its own pair of CSVs, named after the directory.
    """
    ap = argparse.ArgumentParser(description="Summarize dataset label indexes into tidy CSVs.")
    ap.add_argument("datasets", nargs="+", help="dataset directories written by `testbed run`")
    ap.add_argument("--summary", default="results/summary", help="summary output dir")
    args = ap.parse_args()

    out = Path(args.summary); out.mkdir(parents=True, exist_ok=True)

    for d in map(Path, args.datasets):
        path = d / LABELS_NAME
        if not path.exists():
            print(f"[skip] missing {path}")
            continue
        m = load_manifest(d)
        windows = pd.DataFrame([w.__dict__ for w in m.attack_windows],
                               columns=["index", "attack_type", "attacker", "victim", "start_us", "end_us"])
        by_label, by_window = summarize(read_labels(path), windows)
        for name, df in ((f"{d.name}_labels.csv", by_label), (f"{d.name}_windows.csv", by_window)):
            df.to_csv(out / name, index=False)
            print(f"[ok] wrote {out / name}")


if __name__ == "__main__":
    main()
