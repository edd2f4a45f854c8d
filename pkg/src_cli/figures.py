from __future__ import annotations
import argparse
from pathlib import Path
import numpy as np
import pandas as pd
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from src.labeling import read_labels
from src.manifest import LABELS_NAME
from src.plotstyle import apply_plot_style, label_color


def timeline(labels: pd.DataFrame, bin_s: float = 1.0, interface: str | None = None) -> pd.DataFrame:
    """Packets per time bin and label class (rows: bin start in s, columns: class)."""
    df = labels
    if interface is not None:
        df = df[df["file"].str.contains(f"_{interface}_", regex=False)]
    cls = df["attack_type"].where(df["kind"] == "Attack", df["kind"])
    t = (df["ts_us"] // int(bin_s * 1e6)) * bin_s
    table = pd.crosstab(t, cls).sort_index()
    if len(table):
        full = np.arange(table.index.min(), table.index.max() + bin_s, bin_s)
        table = table.reindex(full, fill_value=0)
    table.index.name = "t_s"
    return table


def main():
    """Traffic timeline of a dataset: packets per second by label class.

    Inputs
    ------
    dataset : directory written by `testbed run` (needs labels.csv).
    --interface : restrict to one capture interface, e.g. vethwe-datapath.
    --bin : bin width in seconds.

    Output
    ------
    results/figures/timeline_{dataset}.(png|pdf)
    """
    ap = argparse.ArgumentParser(
        description="Timeline figure: packets per second per label",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    ap.add_argument("dataset", help="dataset directory")
    ap.add_argument("--interface", default="vethwe-datapath", help="capture interface ('' = all)")
    ap.add_argument("--bin", type=float, default=1.0, help="bin width (s)")
    ap.add_argument("--out", default="results/figures", help="figure output dir")
    args = ap.parse_args()
    apply_plot_style()

    d = Path(args.dataset)
    path = d / LABELS_NAME
    if not path.exists():
        print(f"[skip] missing {path}")
        return
    table = timeline(read_labels(path), args.bin, args.interface or None)
    if table.empty:
        print(f"[skip] {path} has no records")
        return

    out = Path(args.out); out.mkdir(parents=True, exist_ok=True)
    plt.figure(figsize=(7.5, 3.8))
    for name in table.columns:
        plt.plot(table.index, table[name] / args.bin, label=name, color=label_color(name))
    plt.yscale("symlog", linthresh=10)
    plt.xlabel("Simulated time (s)"); plt.ylabel("Packets / s")
    plt.title(f"{d.name} ({args.interface or 'all interfaces'})")
    plt.legend(bbox_to_anchor=(1.02, 1), loc="upper left")
    plt.tight_layout()
    out1 = out / f"timeline_{d.name}.png"
    plt.savefig(out1, dpi=150); plt.savefig(out1.with_suffix(".pdf")); plt.close()
    print(f"[ok] wrote {out1}")


if __name__ == "__main__":
    main()
