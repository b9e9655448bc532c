"""Shared data model: queries, results, metadata, flags, validation reports.

Query logs are JSON-lines, one query per line with nested results. All
downstream text matching works on a canonical form produced by
:func:`normalize_text`.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

_WS_RE = re.compile(r"\s+")

WEIGHT_TOL = 1e-9


def normalize_text(text: str) -> str:
    """Canonical form for matching: NFKC, lowercase, collapsed whitespace."""
    text = unicodedata.normalize("NFKC", text)
    text = text.lower()
    return _WS_RE.sub(" ", text).strip()


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC3339 timestamp; 'Z' suffix accepted."""
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


class FlagStatus(str, Enum):
    PENDING = "PENDING"
    VALIDATED_TP = "VALIDATED_TP"
    VALIDATED_FP = "VALIDATED_FP"
    HUMAN_TP = "HUMAN_TP"
    HUMAN_FP = "HUMAN_FP"

    @property
    def is_human(self) -> bool:
        return self in (FlagStatus.HUMAN_TP, FlagStatus.HUMAN_FP)

    @property
    def is_resolved(self) -> bool:
        return self is not FlagStatus.PENDING

    @property
    def is_true_positive(self) -> bool:
        return self in (FlagStatus.VALIDATED_TP, FlagStatus.HUMAN_TP)

    @property
    def is_false_positive(self) -> bool:
        return self in (FlagStatus.VALIDATED_FP, FlagStatus.HUMAN_FP)


class StatusTransitionError(ValueError):
    """Raised on an illegal flag status transition (e.g. HUMAN_* -> VALIDATED_*)."""


def check_status_transition(old: FlagStatus, new: FlagStatus) -> None:
    """Enforce the monotone lifecycle PENDING -> VALIDATED_* -> HUMAN_*.

    A human verdict may land on any status (including replacing a prior
    human verdict via a superseding record); machine verdicts may never
    replace a human one, and nothing goes back to PENDING.
    """
    if new is FlagStatus.PENDING and old is not FlagStatus.PENDING:
        raise StatusTransitionError(f"cannot revert {old.value} to PENDING")
    if old.is_human and not new.is_human:
        raise StatusTransitionError(
            f"human verdict {old.value} cannot be overridden by {new.value}"
        )


class ValidationSource(str, Enum):
    MOCK = "MOCK"
    LLM = "LLM"
    HUMAN = "HUMAN"


@dataclass(frozen=True)
class MetadataRecord:
    age_rating: str | None = None
    genre: list[str] | None = None
    description: str | None = None

    def matching_text(self) -> str:
        """Concatenated normalized metadata text; absent fields contribute nothing."""
        parts = []
        if self.description:
            parts.append(self.description)
        if self.genre:
            parts.extend(self.genre)
        if self.age_rating:
            parts.append(self.age_rating)
        return normalize_text(" ".join(parts))

    def to_dict(self) -> dict:
        out: dict = {}
        if self.age_rating is not None:
            out["age_rating"] = self.age_rating
        if self.genre is not None:
            out["genre"] = list(self.genre)
        if self.description is not None:
            out["description"] = self.description
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "MetadataRecord":
        return cls(
            age_rating=d.get("age_rating"),
            genre=list(d["genre"]) if d.get("genre") is not None else None,
            description=d.get("description"),
        )


@dataclass(frozen=True)
class ResultRecord:
    result_id: str
    title: str
    rank: int
    metadata: MetadataRecord = field(default_factory=MetadataRecord)

    def to_dict(self) -> dict:
        return {
            "result_id": self.result_id,
            "title": self.title,
            "rank": self.rank,
            "metadata": self.metadata.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRecord":
        return cls(
            result_id=str(d["result_id"]),
            title=str(d["title"]),
            rank=int(d["rank"]),
            metadata=MetadataRecord.from_dict(d.get("metadata") or {}),
        )


@dataclass(frozen=True)
class QueryRecord:
    query_id: str
    text: str
    timestamp: datetime
    results: tuple[ResultRecord, ...] = ()

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "text": self.text,
            "timestamp": format_timestamp(self.timestamp),
            "results": [r.to_dict() for r in self.results],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QueryRecord":
        return cls(
            query_id=str(d["query_id"]),
            text=str(d["text"]),
            timestamp=parse_timestamp(str(d["timestamp"])),
            results=tuple(ResultRecord.from_dict(r) for r in d.get("results", [])),
        )


@dataclass(frozen=True)
class FlagScores:
    similarity: float
    g_query: float
    g_result: float
    g_metadata: float

    def to_dict(self) -> dict:
        return {
            "similarity": self.similarity,
            "g_query": self.g_query,
            "g_result": self.g_result,
            "g_metadata": self.g_metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlagScores":
        return cls(
            similarity=float(d["similarity"]),
            g_query=float(d["g_query"]),
            g_result=float(d["g_result"]),
            g_metadata=float(d["g_metadata"]),
        )


@dataclass(frozen=True)
class FlaggedInstance:
    flag_id: str
    query_id: str
    result_id: str
    epoch: int
    scores: FlagScores
    matched_lexicons: dict[str, tuple[str, ...]]  # surface name -> lexicon ids
    status: FlagStatus = FlagStatus.PENDING

    def with_status(self, status: FlagStatus) -> "FlaggedInstance":
        check_status_transition(self.status, status)
        return FlaggedInstance(
            flag_id=self.flag_id,
            query_id=self.query_id,
            result_id=self.result_id,
            epoch=self.epoch,
            scores=self.scores,
            matched_lexicons=self.matched_lexicons,
            status=status,
        )

    def lexicons_on(self, *surfaces: str) -> set[str]:
        out: set[str] = set()
        for s in surfaces:
            out.update(self.matched_lexicons.get(s, ()))
        return out

    def to_dict(self) -> dict:
        return {
            "flag_id": self.flag_id,
            "query_id": self.query_id,
            "result_id": self.result_id,
            "epoch": self.epoch,
            "scores": self.scores.to_dict(),
            "matched_lexicons": {k: list(v) for k, v in sorted(self.matched_lexicons.items())},
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlaggedInstance":
        return cls(
            flag_id=str(d["flag_id"]),
            query_id=str(d["query_id"]),
            result_id=str(d["result_id"]),
            epoch=int(d["epoch"]),
            scores=FlagScores.from_dict(d["scores"]),
            matched_lexicons={k: tuple(v) for k, v in d.get("matched_lexicons", {}).items()},
            status=FlagStatus(d.get("status", "PENDING")),
        )


@dataclass(frozen=True)
class ValidationReport:
    flag_id: str
    task_scores: dict[str, float]
    weights: dict[str, float]
    aggregate_v: float
    source: ValidationSource
    rationale: str | None = None

    def __post_init__(self) -> None:
        if set(self.task_scores) != set(self.weights):
            raise ValueError("task name sets of weights and scores must be identical")
        wsum = sum(self.weights.values())
        if abs(wsum - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1, got {wsum}")
        expected = sum(self.weights[t] * self.task_scores[t] for t in self.weights)
        if abs(expected - self.aggregate_v) > WEIGHT_TOL:
            raise ValueError("aggregate_v inconsistent with weighted task scores")

    def to_dict(self) -> dict:
        return {
            "flag_id": self.flag_id,
            "task_scores": dict(sorted(self.task_scores.items())),
            "weights": dict(sorted(self.weights.items())),
            "aggregate_v": self.aggregate_v,
            "source": self.source.value,
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ValidationReport":
        return cls(
            flag_id=str(d["flag_id"]),
            task_scores={k: float(v) for k, v in d["task_scores"].items()},
            weights={k: float(v) for k, v in d["weights"].items()},
            aggregate_v=float(d["aggregate_v"]),
            source=ValidationSource(d["source"]),
            rationale=d.get("rationale"),
        )


# --- ingestion ---------------------------------------------------------------


@dataclass(frozen=True)
class IngestError:
    line_number: int
    message: str


@dataclass
class IngestResult:
    records: list[QueryRecord]
    errors: list[IngestError]


class DuplicateQueryIdError(ValueError):
    """Duplicate query_id within one batch; fatal per the batch contract."""


def ingest_query_log(path, k: int) -> IngestResult:
    """Read a JSONL query log, keeping the k lowest-ranked results per query.

    Malformed lines are collected into the error report with their line
    number; duplicate query ids abort the whole batch.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    records: list[QueryRecord] = []
    errors: list[IngestError] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                record = QueryRecord.from_dict(raw)
            except (ValueError, KeyError, TypeError) as exc:
                errors.append(IngestError(lineno, f"malformed line: {exc}"))
                continue
            if record.query_id in seen_ids:
                raise DuplicateQueryIdError(
                    f"duplicate query_id {record.query_id!r} at line {lineno}"
                )
            seen_ids.add(record.query_id)
            kept = sorted(record.results, key=lambda r: r.rank)[:k]
            records.append(
                QueryRecord(
                    query_id=record.query_id,
                    text=record.text,
                    timestamp=record.timestamp,
                    results=tuple(kept),
                )
            )
    return IngestResult(records=records, errors=errors)


def validate_record(record: QueryRecord) -> list[str]:
    """Return machine-readable invariant violation codes; empty list means ok."""
    violations: list[str] = []
    if not record.query_id:
        violations.append("empty-query-id")
    if not record.text.strip():
        violations.append("empty-query")
    ranks = [r.rank for r in record.results]
    if any(rank < 1 for rank in ranks):
        violations.append("rank-below-one")
    if any(b <= a for a, b in zip(ranks, ranks[1:])):
        violations.append("non-strict-ranks")
    result_ids = [r.result_id for r in record.results]
    if len(set(result_ids)) != len(result_ids):
        violations.append("duplicate-result-id")
    return violations
