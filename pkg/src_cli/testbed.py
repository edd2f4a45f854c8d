import argparse
import logging
import multiprocessing as mp
import os
import sys
from pathlib import Path

from src.errors import (
    FlowLabelConflict,
    PcapFormatError,
    ScenarioError,
    ScenarioInvalid,
    SubnetExhausted,
    TransferError,
    UnknownPreset,
)
from src.flows import extract_flows, write_flows
from src.labeling import LABEL_COLUMNS, labels_frame, read_labels
from src.manifest import LABELS_NAME, MANIFEST_NAME, load_manifest, verify_files
from src.presets import describe, preset, preset_names
from src.scenario import AttackType, parse_scenario, validate
from src.simulation import run_scenario

# exit codes
EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_AUDIT = 3

log = logging.getLogger("testbed")

_TAGS = {logging.DEBUG: "[debug]", logging.INFO: "[info]", logging.WARNING: "[warn]", logging.ERROR: "[error]"}


class _TagFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        tag = _TAGS.get(record.levelno, f"[{record.levelname.lower()}]")
        return f"{tag} {record.getMessage()}"


def _setup_logging(verbose: int, quiet: bool) -> None:
    level = logging.WARNING if quiet else logging.DEBUG if verbose else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_TagFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level)


def _emit(porcelain: bool, record: dict, human: str) -> None:
    if porcelain:
        print(" ".join(f"{k}={v}" for k, v in record.items()))
    else:
        print(human)


def _print_violations(violations) -> None:
    for v in violations:
        print(f"[invalid] {v}")


# ----------------------------
# run
# ----------------------------

def _run_one(task):
    """Worker for one scenario; returns (name, exit code, summary)."""
    name, source, out, seed, rotation = task
    try:
        if source == "preset":
            s = preset(name) if seed is None else preset(name, seed)
        else:
            s = parse_scenario(Path(name).read_text(encoding="utf-8"))
            if seed is not None:
                s = s.with_seed(seed)
        result = run_scenario(s, out, rotation)
    except (ScenarioError, UnknownPreset, SubnetExhausted) as e:
        return name, EXIT_INVALID, {"error": str(e)}
    except ScenarioInvalid as e:
        return name, EXIT_INVALID, {"error": str(e), "violations": [str(v) for v in e.violations]}
    except (OSError, TransferError, PcapFormatError) as e:
        return name, EXIT_IO, {"error": str(e)}
    code = EXIT_OK if result.ok else EXIT_AUDIT
    return name, code, result.summary()


def cmd_run(args) -> int:
    if bool(args.scenario) == bool(args.preset):
        print("[error] give exactly one of --scenario or --preset", file=sys.stderr)
        return EXIT_INVALID
    out = Path(args.out)
    if args.scenario:
        tasks = [(args.scenario, "file", out, args.seed, args.rotation)]
    elif len(args.preset) == 1:
        tasks = [(args.preset[0], "preset", out, args.seed, args.rotation)]
    else:
        tasks = [(name, "preset", out / name, args.seed, args.rotation) for name in args.preset]

    if args.jobs == 1 or len(tasks) == 1:
        results = [_run_one(t) for t in tasks]
    else:
        n_workers = args.jobs if args.jobs > 0 else (os.cpu_count() or 1)
        log.info("running %d scenarios on %d worker processes", len(tasks), n_workers)
        with mp.Pool(processes=n_workers) as pool:
            results = pool.map(_run_one, tasks)

    worst = EXIT_OK
    for name, code, summary in results:
        if "violations" in summary:
            _print_violations(summary["violations"])
        if args.porcelain:
            _emit(True, {"scenario": name, "exit": code, **{k: v for k, v in summary.items() if k != "violations"}}, "")
        elif code == EXIT_OK:
            print(f"[ok] {name}: {summary['records']} records in {summary['files']} files, "
                  f"manifest {summary['manifest_sha256'][:16]} -> {summary['out']}")
        elif code == EXIT_AUDIT:
            print(f"[fail] {name}: {summary['mismatches']} label mismatch(es), coverage {summary['coverage']}, "
                  f"{summary['transfer_failed']} failed transfer(s)")
        else:
            print(f"[error] {name}: {summary['error']}")
        worst = max(worst, code)
    return worst


# ----------------------------
# validate / presets
# ----------------------------

def cmd_validate(args) -> int:
    try:
        s = parse_scenario(Path(args.path).read_text(encoding="utf-8"))
    except OSError as e:
        print(f"[error] {e}", file=sys.stderr)
        return EXIT_IO
    except ScenarioError as e:
        print(f"[invalid] {e}")
        return EXIT_INVALID
    violations = validate(s)
    if args.porcelain:
        for v in violations:
            _emit(True, {"code": v.code, "element": v.element}, "")
    else:
        _print_violations(violations)
        if not violations:
            print(f"[ok] {args.path}: no violations")
    return EXIT_INVALID if violations else EXIT_OK


def cmd_presets(args) -> int:
    for name in preset_names():
        _emit(args.porcelain, {"name": name}, f"{name:<24} {describe(name)}")
    return EXIT_OK


# ----------------------------
# audit / flows on a dataset directory
# ----------------------------

def _load(dataset: Path):
    if not (dataset / MANIFEST_NAME).is_file():
        raise FileNotFoundError(f"{dataset}: no {MANIFEST_NAME}")
    m = load_manifest(dataset)
    return m, parse_scenario(m.scenario)


def cmd_audit(args) -> int:
    dataset = Path(args.dir)
    try:
        m, s = _load(dataset)
    except (OSError, ValueError) as e:
        print(f"[error] {e}")
        return EXIT_IO

    problems = verify_files(m, dataset)
    if not problems:
        try:
            fresh, _ = labels_frame(s, dataset, [e.path for e in m.files])
            stored = read_labels(dataset / LABELS_NAME)
            if len(fresh) != len(stored):
                problems.append(f"{LABELS_NAME}: {len(stored)} rows, captures hold {len(fresh)} records")
            else:
                diff = (fresh[LABEL_COLUMNS].reset_index(drop=True) != stored[LABEL_COLUMNS].reset_index(drop=True)).any(axis=1)
                for _, row in fresh[diff.to_numpy()].head(5).iterrows():
                    problems.append(f"{row['file']}: record {row['record']} label differs")
                if diff.any():
                    problems.append(f"{LABELS_NAME}: {int(diff.sum())} label(s) differ from the captures")
        except PcapFormatError as e:
            problems.append(str(e))

    for p in problems:
        _emit(args.porcelain, {"problem": p.replace(" ", "_")}, f"[fail] {p}")
    if problems:
        return EXIT_AUDIT
    _emit(args.porcelain, {"dataset": dataset, "files": len(m.files), "records": m.labels.get("records"),
                           "manifest_sha256": m.digest()},
          f"[ok] {dataset}: {len(m.files)} files and {m.labels.get('records')} labels consistent")
    return EXIT_OK


def cmd_flows(args) -> int:
    dataset = Path(args.dir)
    try:
        m, s = _load(dataset)
        labels = read_labels(dataset / LABELS_NAME)
    except (OSError, ValueError) as e:
        print(f"[error] {e}")
        return EXIT_IO
    # hijacked sessions mix benign and attack packets in one flow
    strict = not any(a.attack_type is AttackType.TCP_SEQ_PREDICTION for a in s.attacks)
    try:
        flows = extract_flows(dataset, m.files, labels, strict=strict)
    except (PcapFormatError, FlowLabelConflict) as e:
        print(f"[error] {e}")
        return EXIT_AUDIT
    csv_path, _ = write_flows(flows, dataset)
    n_attack = int((flows["kind"] == "Attack").sum()) if len(flows) else 0
    _emit(args.porcelain, {"flows": len(flows), "attack_flows": n_attack, "path": csv_path},
          f"[ok] wrote {csv_path} ({len(flows)} flows, {n_attack} attack)")
    return EXIT_OK


# ----------------------------
# entry point
# ----------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="testbed",
        description="Synthesize labelled attack-traffic datasets on a simulated container testbed.",
    )
    ap.add_argument("-v", "--verbose", action="count", default=0, help="debug logging on stderr")
    ap.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--porcelain", action="store_true", help="key=value lines on stdout")

    r = sub.add_parser("run", parents=[common], help="run a scenario and write its dataset")
    r.add_argument("--scenario", help="scenario YAML file")
    r.add_argument("--preset", action="append", help="preset name (repeatable)")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, default=None, help="seed override (u64)")
    r.add_argument("--rotation", type=float, default=None, help="capture rotation interval override (s)")
    r.add_argument("--jobs", type=int, default=1,
                   help="worker processes for several presets (1 = sequential, 0 = use all cores)")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", parents=[common], help="check a scenario file")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    a = sub.add_parser("audit", parents=[common], help="re-verify a dataset directory")
    a.add_argument("dir")
    a.set_defaults(func=cmd_audit)

    f = sub.add_parser("flows", parents=[common], help="write the flow-feature table of a dataset")
    f.add_argument("dir")
    f.set_defaults(func=cmd_flows)

    p = sub.add_parser("presets", parents=[common], help="list the built-in scenarios")
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose, args.quiet)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
