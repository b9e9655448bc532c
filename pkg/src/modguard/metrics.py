"""Weekly flag/TP/FP counts, precision, and relative F1, plus trend reports.

Recall is not computable from search logs (there is no ground truth for
what should have been flagged but wasn't), so F1 uses the recall = 1
convention, f1 = 2p / (p + 1), and is reported as "relative F1".
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable

from .models import FlaggedInstance

CSV_COLUMNS = ("week", "anomalies", "tp", "fp", "precision", "f1")


@dataclass(frozen=True)
class WeeklyMetrics:
    week: int
    anomalies: int
    tp: int
    fp: int
    precision: float
    f1: float

    def to_dict(self) -> dict:
        return {
            "week": self.week,
            "anomalies": self.anomalies,
            "tp": self.tp,
            "fp": self.fp,
            "precision": self.precision,
            "f1": self.f1,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WeeklyMetrics":
        return cls(
            week=int(d["week"]),
            anomalies=int(d["anomalies"]),
            tp=int(d["tp"]),
            fp=int(d["fp"]),
            precision=float(d["precision"]),
            f1=float(d["f1"]),
        )


def precision_f1(tp: int, fp: int) -> tuple[float, float]:
    """Precision and relative F1 at full precision; zero cases defined as 0."""
    if tp + fp == 0:
        return 0.0, 0.0
    p = tp / (tp + fp)
    return p, 2.0 * p / (p + 1.0)


def from_counts(week: int, tp: int, fp: int, anomalies: int | None = None) -> WeeklyMetrics:
    p, f1 = precision_f1(tp, fp)
    return WeeklyMetrics(
        week=week,
        anomalies=anomalies if anomalies is not None else tp + fp,
        tp=tp,
        fp=fp,
        precision=p,
        f1=f1,
    )


def summarize(flags: Iterable[FlaggedInstance], window: int) -> WeeklyMetrics:
    """Aggregate resolved flags into one week's metrics.

    Flags must carry their final status (human verdicts already take
    precedence in the status field). Unresolved flags count as anomalies
    but contribute to neither TP nor FP.
    """
    anomalies = tp = fp = 0
    for flag in flags:
        anomalies += 1
        if flag.status.is_true_positive:
            tp += 1
        elif flag.status.is_false_positive:
            fp += 1
    p, f1 = precision_f1(tp, fp)
    return WeeklyMetrics(week=window, anomalies=anomalies, tp=tp, fp=fp, precision=p, f1=f1)


@dataclass(frozen=True)
class TrendReport:
    weeks: int
    first_tp: int
    last_tp: int
    cumulative_tp: int
    precision_delta: float  # last week minus first week, full precision

    def to_dict(self) -> dict:
        return {
            "weeks": self.weeks,
            "first_tp": self.first_tp,
            "last_tp": self.last_tp,
            "cumulative_tp": self.cumulative_tp,
            "precision_delta": self.precision_delta,
        }


def trend(weekly: list[WeeklyMetrics]) -> TrendReport:
    if not weekly:
        raise ValueError("trend requires at least one week of metrics")
    ordered = sorted(weekly, key=lambda m: m.week)
    return TrendReport(
        weeks=len(ordered),
        first_tp=ordered[0].tp,
        last_tp=ordered[-1].tp,
        cumulative_tp=sum(m.tp for m in ordered),
        precision_delta=ordered[-1].precision - ordered[0].precision,
    )


def to_csv(weekly: list[WeeklyMetrics]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for m in sorted(weekly, key=lambda m: m.week):
        writer.writerow([m.week, m.anomalies, m.tp, m.fp, f"{m.precision:.4f}", f"{m.f1:.4f}"])
    return buf.getvalue()


def to_json(weekly: list[WeeklyMetrics]) -> str:
    rows = [m.to_dict() for m in sorted(weekly, key=lambda m: m.week)]
    return json.dumps(rows, sort_keys=True, indent=2) + "\n"
