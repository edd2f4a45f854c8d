# src/labeling.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import pandas as pd

from .generators import SessionPlan, hijack_target
from .packets import FrameHeader, IpProto, decode_frame
from .pcap import iter_pcap
from .scenario import AttackType, AttackWindow, Scenario, attack_windows, pod_addresses

__all__ = [
    "LabelKind",
    "Label",
    "INFRASTRUCTURE",
    "CapturedRecord",
    "LabelRecord",
    "Labeler",
    "label_packet",
    "label_file",
    "labels_frame",
    "oracle_frame",
    "AuditReport",
    "audit_ground_truth",
    "LABEL_COLUMNS",
    "read_labels",
]

log = logging.getLogger(__name__)

LABEL_COLUMNS = ["file", "record", "ts_us", "kind", "attack_type", "initiator", "responder", "window"]
_KEY = ["file", "record"]
_FIELDS = ["kind", "attack_type", "initiator", "responder", "window"]


class LabelKind(str, Enum):
    ATTACK = "Attack"
    BENIGN = "Benign"
    INFRASTRUCTURE = "Infrastructure"


@dataclass(frozen=True)
class Label:
    """Class of one captured record.

    Attack: (attack_type, attacker, victim). Benign: (client, server).
    ``window`` is the index of the scenario entry the record is attributed to.
    """

    kind: LabelKind
    attack_type: str = ""
    initiator: str = ""
    responder: str = ""
    window: int = -1

    @classmethod
    def of_window(cls, w: AttackWindow) -> "Label":
        a = w.spec
        if a.is_benign:
            return cls(LabelKind.BENIGN, "", a.attacker, a.victim, w.index)
        return cls(LabelKind.ATTACK, a.attack_type.value, a.attacker, a.victim, w.index)


INFRASTRUCTURE = Label(LabelKind.INFRASTRUCTURE)


class CapturedRecord(NamedTuple):
    """One pcap record as read back from disk (no audit metadata)."""

    file: str
    index: int
    ts_us: int
    frame: bytes


@dataclass(frozen=True)
class LabelRecord:
    file: str
    record: int
    ts_us: int
    label: Label

    def row(self) -> tuple:
        lb = self.label
        return (self.file, self.record, self.ts_us, lb.kind.value, lb.attack_type,
                lb.initiator, lb.responder, lb.window)


# ----------------------------
# Labeling from headers + scenario
# ----------------------------

class Labeler:
    """Labels records using only addresses, ports, timestamps and the scenario.

    Pod identity comes from the overlay address plan. A record belongs to the
    window of its (unordered) pod pair that covers its timestamp. The one
    exception is traffic on a hijacked benign session: inside a
    TcpSeqPrediction window, segments on the session's client->server tuple
    that the session's replayable plan does not send are the attacker's.
    """

    def __init__(self, s: Scenario):
        self.scenario = s
        self.pod_of_ip = {ip: pod for pod, ip in pod_addresses(s).items()}
        self.by_pair: dict[frozenset[str], list[AttackWindow]] = {}
        self.hijacks: dict[tuple[str, int, str, int], list[tuple[AttackWindow, SessionPlan]]] = {}
        self.unmatched = 0
        for w in attack_windows(s):
            self.by_pair.setdefault(frozenset((w.spec.attacker, w.spec.victim)), []).append(w)
            if w.spec.attack_type is AttackType.TCP_SEQ_PREDICTION:
                plan = hijack_target(s, w.index)
                if plan is not None:
                    key = (plan.client_ip, plan.sport, plan.server_ip, plan.dport)
                    self.hijacks.setdefault(key, []).append((w, plan))

    def _unmatched(self, ts_us: int, h: FrameHeader | None) -> Label:
        self.unmatched += 1
        if h is None:
            log.debug("non-IP record at %d µs", ts_us)
        else:
            log.debug("no window for %s -> %s at %d µs", h.src, h.dst, ts_us)
        return INFRASTRUCTURE

    def label(self, ts_us: int, h: FrameHeader | None) -> Label:
        if h is None:
            return self._unmatched(ts_us, h)
        if h.proto == IpProto.TCP and self.hijacks:
            for w, plan in self.hijacks.get((h.src, h.sport, h.dst, h.dport), ()):
                if w.covers(ts_us) and not plan.expected(h.seq, h.payload, h.payload_len):
                    return Label.of_window(w)
        a, b = self.pod_of_ip.get(h.src), self.pod_of_ip.get(h.dst)
        if a is None or b is None:
            return self._unmatched(ts_us, h)
        for w in self.by_pair.get(frozenset((a, b)), ()):
            if w.covers(ts_us):
                return Label.of_window(w)
        return self._unmatched(ts_us, h)

    def label_record(self, rec: CapturedRecord) -> LabelRecord:
        return LabelRecord(rec.file, rec.index, rec.ts_us, self.label(rec.ts_us, decode_frame(rec.frame)))


def label_packet(s: Scenario, record: CapturedRecord) -> LabelRecord:
    """Label a single captured record. Use a Labeler directly for bulk work."""
    return Labeler(s).label_record(record)


def label_file(labeler: Labeler, path: str | Path, key: str) -> list[LabelRecord]:
    """Labels of every record of one capture file; ``key`` names the file in the index."""
    return [
        labeler.label_record(CapturedRecord(key, i, ts, frame))
        for i, (ts, frame, _) in enumerate(iter_pcap(path))
    ]


def labels_frame(s: Scenario, root: str | Path, files: Iterable[str]) -> tuple[pd.DataFrame, int]:
    """Label index over ``files`` (paths relative to ``root``).

    Returns
    -------
    (labels, unmatched) : tuple
        One row per record, columns LABEL_COLUMNS, plus the number of records
        that matched no window (labelled Infrastructure).
    """
    root = Path(root)
    labeler = Labeler(s)
    rows: list[tuple] = []
    for key in files:
        rows.extend(r.row() for r in label_file(labeler, root / key, key))
    if labeler.unmatched:
        log.warning("%d record(s) matched no scenario window", labeler.unmatched)
    df = pd.DataFrame(rows, columns=LABEL_COLUMNS)
    return df.astype({"record": "int64", "ts_us": "int64", "window": "int64"}), labeler.unmatched


# ----------------------------
# Audit against the origin metadata
# ----------------------------

def oracle_frame(s: Scenario, tags: Mapping[str, Sequence[int | None]]) -> pd.DataFrame:
    """Expected label of every record, derived from the audit tags the fabric
    attached at emission time (``tags[file][record]`` = scenario entry index)."""
    windows = attack_windows(s)
    rows = []
    for key, seq in tags.items():
        for i, tag in enumerate(seq):
            lb = INFRASTRUCTURE if tag is None else Label.of_window(windows[tag])
            rows.append((key, i, lb.kind.value, lb.attack_type, lb.initiator, lb.responder, lb.window))
    df = pd.DataFrame(rows, columns=_KEY + _FIELDS)
    return df.astype({"record": "int64", "window": "int64"})


@dataclass
class AuditReport:
    total: int
    labeled: int
    mismatches: int
    extra: int = 0
    examples: list[dict] = field(default_factory=list)

    @property
    def coverage(self) -> float:
        return 1.0 if self.total == 0 else self.labeled / self.total

    @property
    def passed(self) -> bool:
        return self.labeled == self.total and self.mismatches == 0 and self.extra == 0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "labeled": self.labeled,
            "coverage": self.coverage,
            "mismatches": self.mismatches,
            "extra": self.extra,
            "passed": self.passed,
        }


def audit_ground_truth(
    s: Scenario,
    tags: Mapping[str, Sequence[int | None]],
    labels: pd.DataFrame,
    max_examples: int = 5,
) -> AuditReport:
    """Compare a label index against the origin-metadata oracle.

    Attack labels must agree on type, attacker, victim and window; Benign
    labels on client and server; Infrastructure on the kind alone.
    """
    oracle = oracle_frame(s, tags)
    merged = oracle.merge(
        labels[_KEY + _FIELDS], on=_KEY, how="outer", suffixes=("_true", ""), indicator=True
    )
    both = merged[merged["_merge"] == "both"]
    extra = int((merged["_merge"] == "right_only").sum())

    kind = both["kind_true"]
    same = both["kind"] == kind
    for col in ("initiator", "responder"):
        same &= (both[col] == both[f"{col}_true"]) | (kind == LabelKind.INFRASTRUCTURE.value)
    attack = kind == LabelKind.ATTACK.value
    for col in ("attack_type", "window"):
        same &= (both[col] == both[f"{col}_true"]) | ~attack
    bad = both[~same]

    examples = bad.drop(columns="_merge").head(max_examples).to_dict("records")
    report = AuditReport(
        total=len(oracle), labeled=len(both), mismatches=len(bad), extra=extra, examples=examples
    )
    log.info("audit: %d/%d labelled, %d mismatch(es), %d extra", report.labeled, report.total,
             report.mismatches, report.extra)
    return report


def read_labels(path: str | Path) -> pd.DataFrame:
    """Load a label index written by run_scenario (empty strings stay strings)."""
    return pd.read_csv(path, keep_default_na=False, dtype={
        "file": str, "kind": str, "attack_type": str, "initiator": str, "responder": str,
    })
