"""
scripts/benchmark_runtime.py

Wall-clock runtimes of the built-in presets.

This script measures, for a representative set of presets:

  * each preset on its own (one `testbed run --preset` per scenario)
  * the whole set in one call, sequential (--jobs 1) and on 4 worker processes (--jobs 4)

Every run writes into a scratch directory under results/bench/ that is
removed afterwards. Timings are written to results/benchmark_runtime.csv
with columns:
  component, variant, runtime_sec
"""

from __future__ import annotations

import csv
import shutil
import subprocess
import sys
import time
from pathlib import Path


PY = sys.executable

PRESETS = ["fig2a-dos", "fig2b-ddos-synflood", "fig2c-bruteforce", "fig2d-heartbleed"]
SEED = "2022"
SCRATCH = Path("results") / "bench"


def _time_cmd(cmd: list[str]) -> float:
    """Run a subprocess and return wall-clock runtime in seconds."""
    start = time.perf_counter()
    subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)
    end = time.perf_counter()
    return end - start


def run_presets(names: list[str], jobs: int, tag: str) -> float:
    """Run `names` through one CLI call and return its runtime.

    Parameters
    ----------
    names : list of str
        Preset names passed as repeated --preset flags.
    jobs : int
        Worker processes for the CLI (1 keeps the sequential code path).
    tag : str
        Scratch sub-directory for this measurement.
    """
    out = SCRATCH / tag
    cmd = [PY, "-m", "src_cli.testbed", "-q", "run", "--out", str(out), "--seed", SEED, "--jobs", str(jobs)]
    for name in names:
        cmd.extend(["--preset", name])
    try:
        return _time_cmd(cmd)
    finally:
        shutil.rmtree(out, ignore_errors=True)


def main() -> None:
    outdir = Path("results")
    outdir.mkdir(parents=True, exist_ok=True)
    out_csv = outdir / "benchmark_runtime.csv"

    rows: list[dict[str, object]] = []

    for name in PRESETS:
        print(f"[benchmark] {name}...")
        t = run_presets([name], jobs=1, tag=name)
        print(f"  {name}: {t:.3f} s")
        rows.append({"component": name, "variant": "single", "runtime_sec": t})

    print("[benchmark] all presets (sequential: --jobs 1)...")
    t_seq = run_presets(PRESETS, jobs=1, tag="all_seq")
    print(f"  sequential: {t_seq:.3f} s")
    rows.append({"component": "All", "variant": "sequential", "runtime_sec": t_seq})

    print("[benchmark] all presets (parallel: --jobs 4)...")
    t_par = run_presets(PRESETS, jobs=4, tag="all_par")
    print(f"  parallel: {t_par:.3f} s")
    rows.append({"component": "All", "variant": "parallel", "runtime_sec": t_par})

    with out_csv.open("w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["component", "variant", "runtime_sec"])
        writer.writeheader()
        writer.writerows(rows)

    print(f"[ok] wrote {out_csv}")


if __name__ == "__main__":
    main()
