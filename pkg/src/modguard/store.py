"""Append-only persistence: flags, reports, verdicts, epoch snapshots.

Layout under the data directory:

    epoch-<n>/state.json      lexicon state after the epoch's feedback
    epoch-<n>/flags.jsonl     flags emitted in the epoch
    epoch-<n>/reports.jsonl   validation reports for those flags
    epoch-<n>/verdicts.jsonl  human verdicts consumed by the epoch
    epoch-<n>/summary.json    per-stage counters and the verdict cursor
    epoch-<n>/manifest.json   sha256 of every file above
    verdicts.jsonl            global append-only human-verdict log

Snapshots are written to a temp directory and renamed into place, so an
epoch either exists completely or not at all.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .lexicon import LexiconState, load_state, save_state
from .models import (
    FlaggedInstance,
    FlagStatus,
    ValidationReport,
    check_status_transition,
)

_EPOCH_DIR_RE = re.compile(r"^epoch-(\d+)$")

SNAPSHOT_FILES = ("state.json", "flags.jsonl", "reports.jsonl", "verdicts.jsonl", "summary.json")


class FlagNotFoundError(KeyError):
    pass


class EpochNotFoundError(KeyError):
    pass


class IntegrityError(RuntimeError):
    """A snapshot file does not match its recorded checksum."""


@dataclass(frozen=True)
class VerdictRecord:
    flag_id: str
    verdict: FlagStatus  # HUMAN_TP or HUMAN_FP
    reviewer_id: str
    timestamp: str

    def __post_init__(self) -> None:
        if not self.verdict.is_human:
            raise ValueError("verdict must be HUMAN_TP or HUMAN_FP")

    def to_dict(self) -> dict:
        return {
            "flag_id": self.flag_id,
            "verdict": self.verdict.value,
            "reviewer_id": self.reviewer_id,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerdictRecord":
        return cls(
            flag_id=str(d["flag_id"]),
            verdict=FlagStatus(d["verdict"]),
            reviewer_id=str(d["reviewer_id"]),
            timestamp=str(d["timestamp"]),
        )


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_jsonl(path: Path, rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out


class JsonlAppender:
    """Durable, idempotent JSONL appends keyed by a record id field."""

    def __init__(self, path: Path, id_key: str):
        self.path = path
        self.id_key = id_key
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._seen: set[str] = set()
        for row in _read_jsonl(path):
            self._seen.add(self._identity(row))

    def _identity(self, row: dict) -> str:
        # Records for the same id but different content (e.g. superseding
        # verdicts) must all be kept; only exact duplicates are dropped.
        return json.dumps(row, sort_keys=True, separators=(",", ":"))

    def append(self, row: dict) -> bool:
        """Append a record; returns False if it was an exact duplicate."""
        if self.id_key not in row:
            raise ValueError(f"record missing id field {self.id_key!r}")
        identity = self._identity(row)
        if identity in self._seen:
            return False
        line = identity + "\n"
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())
        self._seen.add(identity)
        return True


@dataclass
class EpochData:
    epoch: int
    state: LexiconState
    flags: list[FlaggedInstance]
    reports: list[ValidationReport]
    verdicts: list[VerdictRecord]
    summary: dict


class DataStore:
    """File-backed store for all pipeline artifacts under one directory."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    # --- epochs --------------------------------------------------------------

    def epoch_dir(self, epoch: int) -> Path:
        return self.data_dir / f"epoch-{epoch}"

    def list_epochs(self) -> list[int]:
        epochs = []
        for entry in self.data_dir.iterdir():
            m = _EPOCH_DIR_RE.match(entry.name)
            if m and entry.is_dir():
                epochs.append(int(m.group(1)))
        return sorted(epochs)

    def latest_epoch(self) -> int | None:
        epochs = self.list_epochs()
        return epochs[-1] if epochs else None

    def write_snapshot(
        self,
        epoch: int,
        state: LexiconState,
        flags: list[FlaggedInstance],
        reports: list[ValidationReport],
        verdicts: list[VerdictRecord],
        summary: dict,
    ) -> Path:
        """Write a complete epoch snapshot atomically (all-or-nothing)."""
        final_dir = self.epoch_dir(epoch)
        if final_dir.exists():
            raise FileExistsError(f"epoch {epoch} snapshot already exists")
        tmp_dir = self.data_dir / f".epoch-{epoch}.tmp"
        if tmp_dir.exists():
            for f in tmp_dir.iterdir():
                f.unlink()
            tmp_dir.rmdir()
        tmp_dir.mkdir()
        save_state(state, tmp_dir / "state.json")
        _write_jsonl(tmp_dir / "flags.jsonl", (f.to_dict() for f in flags))
        _write_jsonl(tmp_dir / "reports.jsonl", (r.to_dict() for r in reports))
        _write_jsonl(tmp_dir / "verdicts.jsonl", (v.to_dict() for v in verdicts))
        with open(tmp_dir / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")
        manifest = {name: _sha256(tmp_dir / name) for name in SNAPSHOT_FILES}
        with open(tmp_dir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")
        os.rename(tmp_dir, final_dir)
        return final_dir

    def verify_epoch(self, epoch: int) -> None:
        d = self.epoch_dir(epoch)
        if not d.exists():
            raise EpochNotFoundError(f"epoch {epoch} not found")
        with open(d / "manifest.json", "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        for name, expected in manifest.items():
            actual = _sha256(d / name)
            if actual != expected:
                raise IntegrityError(f"checksum mismatch for {d / name}")

    def load_epoch(self, epoch: int) -> EpochData:
        """Reload one epoch's snapshot, verifying checksums first."""
        self.verify_epoch(epoch)
        d = self.epoch_dir(epoch)
        state = load_state(d / "state.json")
        flags = [FlaggedInstance.from_dict(r) for r in _read_jsonl(d / "flags.jsonl")]
        reports = [ValidationReport.from_dict(r) for r in _read_jsonl(d / "reports.jsonl")]
        verdicts = [VerdictRecord.from_dict(r) for r in _read_jsonl(d / "verdicts.jsonl")]
        with open(d / "summary.json", "r", encoding="utf-8") as fh:
            summary = json.load(fh)
        return EpochData(
            epoch=epoch, state=state, flags=flags, reports=reports, verdicts=verdicts,
            summary=summary,
        )

    # --- verdicts ------------------------------------------------------------

    @property
    def verdict_log(self) -> Path:
        return self.data_dir / "verdicts.jsonl"

    def append_verdict(self, record: VerdictRecord) -> None:
        JsonlAppender(self.verdict_log, "flag_id").append(record.to_dict())

    def read_verdicts(self, start: int = 0) -> list[VerdictRecord]:
        """Verdict records from line index `start` (global log, append order)."""
        rows = _read_jsonl(self.verdict_log)[start:]
        return [VerdictRecord.from_dict(r) for r in rows]

    def verdict_count(self) -> int:
        return len(_read_jsonl(self.verdict_log))

    # --- flags across epochs -------------------------------------------------

    def all_flags(self) -> list[FlaggedInstance]:
        """Every flag across sealed epochs, with human verdicts applied (latest wins)."""
        flags: list[FlaggedInstance] = []
        for epoch in self.list_epochs():
            d = self.epoch_dir(epoch)
            flags.extend(FlaggedInstance.from_dict(r) for r in _read_jsonl(d / "flags.jsonl"))
        latest_verdict: dict[str, VerdictRecord] = {v.flag_id: v for v in self.read_verdicts()}
        out = []
        for flag in flags:
            v = latest_verdict.get(flag.flag_id)
            out.append(flag.with_status(v.verdict) if v else flag)
        return out

    def find_flag(self, flag_id: str) -> FlaggedInstance:
        for flag in self.all_flags():
            if flag.flag_id == flag_id:
                return flag
        raise FlagNotFoundError(flag_id)

    def reports_by_flag(self) -> dict[str, ValidationReport]:
        out: dict[str, ValidationReport] = {}
        for epoch in self.list_epochs():
            d = self.epoch_dir(epoch)
            for row in _read_jsonl(d / "reports.jsonl"):
                report = ValidationReport.from_dict(row)
                out[report.flag_id] = report
        return out


def ingest_human_verdict(
    store: DataStore, flag_id: str, verdict: FlagStatus, reviewer_id: str, timestamp: str
) -> FlaggedInstance:
    """Record a human verdict for a flag and return the updated flag.

    Verdicts are append-only: a second verdict on the same flag creates a
    superseding record and the latest wins. The verdict participates in
    the next epoch's feedback batch.
    """
    flag = store.find_flag(flag_id)
    check_status_transition(flag.status, verdict)
    store.append_verdict(
        VerdictRecord(
            flag_id=flag_id, verdict=verdict, reviewer_id=reviewer_id, timestamp=timestamp
        )
    )
    return flag.with_status(verdict)
