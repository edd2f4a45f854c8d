# src/simulation.py
from __future__ import annotations

import dataclasses
import logging
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ScenarioInvalid
from .fabric import EventStats, build_fabric
from .generators import GenStatus, schedule_attacks
from .hooks import finalize
from .labeling import AuditReport, audit_ground_truth, labels_frame
from .manifest import LABELS_NAME, DatasetManifest, FileEntry, build_manifest, write_manifest
from .metrics import capture_completeness, plane_isolation
from .pcap import file_sha256
from .presets import preset
from .scenario import Scenario, horizon_us, validate
from .storage import TransferReceipt, transfer_to_storage

__all__ = ["RunResult", "run_scenario", "run_preset", "STAGING_DIR"]

log = logging.getLogger(__name__)

STAGING_DIR = ".staging"


@dataclass
class RunResult:
    out_dir: Path
    audit: AuditReport
    receipt: TransferReceipt
    stats: EventStats
    files: list[FileEntry]
    unmatched: int = 0
    manifest: DatasetManifest | None = None
    manifest_path: Path | None = None
    completeness: list[dict] = field(default_factory=list)
    isolation: dict = field(default_factory=dict)
    generators: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.audit.passed and self.receipt.ok and self.manifest is not None

    def summary(self) -> dict:
        """Flat key/value view of the run (porcelain output, benchmark rows)."""
        return {
            "out": str(self.out_dir),
            "files": len(self.files),
            "records": self.audit.total,
            "coverage": f"{self.audit.coverage:.6f}",
            "mismatches": self.audit.mismatches,
            "unmatched": self.unmatched,
            "transferred": len(self.receipt.entries) - len(self.receipt.failed),
            "transfer_failed": len(self.receipt.failed),
            "injected": self.stats.injected,
            "delivered": self.stats.delivered,
            "dropped": self.stats.dropped,
            "manifest_sha256": self.manifest.digest() if self.manifest is not None else "",
            "ok": self.ok,
        }


def run_scenario(s: Scenario, out_dir: str | Path, rotation: float | None = None) -> RunResult:
    """
    Run a scenario end to end and write its dataset under ``out_dir``.

    Workflow
    --------
    1) Validate; a scenario with violations is refused (ScenarioInvalid).
    2) Build the fabric with captures rooted in ``<out>/.staging``, schedule
       every generator and run the event loop to the horizon.
    3) Finalize the taps, label every record from headers + scenario, and
       audit the labels against the origin tags the fabric kept.
    4) Move the captures to ``<out>`` over the storage plane.
    5) Write ``labels.csv`` and, when audit and transfer both pass,
       ``manifest.json``.

    Parameters
    ----------
    s : Scenario
        Scenario to run (its seed decides every random draw).
    out_dir : str | Path
        Dataset directory; previous captures in it are replaced.
    rotation : float | None
        Override of the capture rotation interval in seconds.
    """
    if rotation is not None:
        s = s.with_capture(dataclasses.replace(s.capture, rotation_interval=float(rotation)))
    violations = validate(s)
    if violations:
        raise ScenarioInvalid(violations)

    out = Path(out_dir)
    staging = out / STAGING_DIR
    for stale in (staging, out / "nodes"):
        if stale.exists():
            shutil.rmtree(stale)
    out.mkdir(parents=True, exist_ok=True)

    f = build_fabric(s, capture_root=staging)
    gens = schedule_attacks(f)
    horizon = horizon_us(s)
    stats = f.run_until(horizon)
    f.quiesce()
    for g in gens:
        if g.status is GenStatus.SKIPPED:
            log.warning("generator %d (%s) was skipped", g.tag, g.spec.attack_type.value)
    log.info("simulated %.1f s: %d injected, %d delivered, %d dropped",
             horizon / 1e6, stats.injected, stats.delivered, stats.dropped)

    inventory = []
    completeness = []
    for tap in f.taps:
        files = finalize(tap, horizon)
        inventory.extend(files)
        completeness.append(capture_completeness(tap, files))
    entries = sorted((FileEntry.from_pcap(pf, staging) for pf in inventory), key=lambda e: e.path)

    labels, unmatched = labels_frame(s, staging, [e.path for e in entries])
    tags = {
        (tap.directory / name).relative_to(staging).as_posix(): seq
        for tap in f.taps
        for name, seq in tap.tags.items()
    }
    audit = audit_ground_truth(s, tags, labels)
    labels_path = out / LABELS_NAME
    labels.to_csv(labels_path, index=False, lineterminator="\n")

    if entries:
        receipt = transfer_to_storage(f, entries, source_root=staging, dest_root=out)
    else:
        receipt = TransferReceipt(storage_node="")
    if receipt.ok and staging.exists():
        shutil.rmtree(staging)

    result = RunResult(
        out_dir=out,
        audit=audit,
        receipt=receipt,
        stats=stats,
        files=entries,
        unmatched=unmatched,
        completeness=completeness,
        isolation=plane_isolation(f),
        generators={st.value: sum(g.status is st for g in gens) for st in GenStatus},
    )
    if audit.passed and receipt.ok:
        result.manifest = build_manifest(
            s,
            entries,
            labels={"path": LABELS_NAME, "sha256": file_sha256(labels_path), "records": int(len(labels))},
            receipt=receipt.to_dict(),
            audit=audit.to_dict(),
        )
        result.manifest_path = write_manifest(result.manifest, out)
        log.info("manifest %s (sha256 %s)", result.manifest_path, result.manifest.digest()[:16])
    else:
        log.warning("no manifest written: audit passed=%s, transfer ok=%s", audit.passed, receipt.ok)
    return result


def run_preset(name: str, out_dir: str | Path, seed: int | None = None, rotation: float | None = None) -> RunResult:
    return run_scenario(preset(name, seed) if seed is not None else preset(name), out_dir, rotation)

