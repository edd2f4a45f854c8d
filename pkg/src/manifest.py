# src/manifest.py
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

from .pcap import PcapFile, file_sha256
from .scenario import Scenario, attack_windows, serialize_scenario

__all__ = [
    "MANIFEST_NAME",
    "LABELS_NAME",
    "FileEntry",
    "WindowEntry",
    "DatasetManifest",
    "build_manifest",
    "write_manifest",
    "load_manifest",
    "verify_files",
    "canonical_json",
]

MANIFEST_NAME = "manifest.json"
LABELS_NAME = "labels.csv"
SCHEMA_VERSION = 1


def canonical_json(obj) -> str:
    """Sorted keys, two-space indent, LF line ends, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@dataclass(frozen=True)
class FileEntry:
    """One capture file of the dataset; ``path`` is relative to the dataset root (posix)."""

    path: str
    node: str
    interface: str
    direction: str
    slot: int
    packet_count: int
    sha256: str
    size: int

    @classmethod
    def from_pcap(cls, pf: PcapFile, root: str | Path) -> "FileEntry":
        return cls(
            path=pf.path.relative_to(root).as_posix(),
            node=pf.node,
            interface=pf.interface,
            direction=pf.direction,
            slot=pf.slot,
            packet_count=pf.packet_count,
            sha256=pf.sha256,
            size=pf.size,
        )


@dataclass(frozen=True)
class WindowEntry:
    index: int
    attack_type: str
    attacker: str
    victim: str
    start_us: int
    end_us: int


@dataclass
class DatasetManifest:
    scenario_sha256: str
    scenario: str
    seed: int
    files: list[FileEntry]
    labels: dict
    attack_windows: list[WindowEntry]
    receipt: dict | None = None
    audit: dict | None = None
    schema: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["files"] = sorted(d["files"], key=lambda e: e["path"])
        return d

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def entry(self, path: str) -> FileEntry | None:
        return next((e for e in self.files if e.path == path), None)


def build_manifest(
    s: Scenario,
    files: Iterable[FileEntry],
    labels: dict,
    receipt: dict | None = None,
    audit: dict | None = None,
) -> DatasetManifest:
    """Assemble the manifest of a finished run.

    ``labels`` describes the label index: ``{"path", "sha256", "records"}``.
    A failed audit is refused; a dataset without perfect labels is not shipped.
    """
    if audit is not None and not audit.get("passed", False):
        raise ValueError("refusing to build a manifest for a run whose audit failed")
    text = serialize_scenario(s)
    files = sorted(files, key=lambda e: e.path)
    seen = [e.path for e in files]
    if len(set(seen)) != len(seen):
        raise ValueError("a capture file is listed more than once")
    records = sum(e.packet_count for e in files)
    if labels.get("records") != records:
        raise ValueError(f"label index covers {labels.get('records')} records, files hold {records}")
    windows = [
        WindowEntry(w.index, w.spec.attack_type.value, w.spec.attacker, w.spec.victim, w.start_us, w.end_us)
        for w in attack_windows(s)
    ]
    return DatasetManifest(
        scenario_sha256=hashlib.sha256(text.encode("utf-8")).hexdigest(),
        scenario=text,
        seed=s.seed,
        files=files,
        labels=dict(labels),
        attack_windows=windows,
        receipt=receipt,
        audit=audit,
    )


def write_manifest(m: DatasetManifest, out_dir: str | Path) -> Path:
    path = Path(out_dir) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(m.to_json())
    return path


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    try:
        return DatasetManifest(
            scenario_sha256=d["scenario_sha256"],
            scenario=d["scenario"],
            seed=int(d["seed"]),
            files=[FileEntry(**e) for e in d["files"]],
            labels=d["labels"],
            attack_windows=[WindowEntry(**w) for w in d["attack_windows"]],
            receipt=d.get("receipt"),
            audit=d.get("audit"),
            schema=int(d.get("schema", SCHEMA_VERSION)),
            extra=d.get("extra", {}),
        )
    except (KeyError, TypeError) as e:
        raise ValueError(f"{path}: malformed manifest ({e})") from None


def verify_files(m: DatasetManifest, root: str | Path) -> list[str]:
    """Problems with the files a manifest lists (missing, size or hash differs)."""
    root = Path(root)
    problems = []
    for e in m.files:
        p = root / e.path
        if not p.is_file():
            problems.append(f"{e.path}: missing")
        elif p.stat().st_size != e.size:
            problems.append(f"{e.path}: size {p.stat().st_size} != {e.size}")
        elif file_sha256(p) != e.sha256:
            problems.append(f"{e.path}: sha256 mismatch")
    labels = m.labels.get("path")
    if labels:
        p = root / labels
        if not p.is_file():
            problems.append(f"{labels}: missing")
        elif file_sha256(p) != m.labels.get("sha256"):
            problems.append(f"{labels}: sha256 mismatch")
    return problems
