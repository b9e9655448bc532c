"""Batch feedback loop: fold validation verdicts back into lexicon scores.

For every lexicon implicated in a batch of validated flags, the score is
updated as

    S(L, t+1) = alpha * S(L, t) + (1 - alpha) * (1 - mean_v(L))

where mean_v(L) averages the benign-confidence of all reports whose flag
matched L on a result or metadata surface. Human verdicts replace the
machine score with 1.0 (HUMAN_FP) or 0.0 (HUMAN_TP) before averaging.
Updated scores are stored as overrides on the lexicon state, so a lexicon
that stops being flagged keeps its last blended score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .lexicon import LexiconState, Surface, sensitivity
from .models import FlaggedInstance, FlagStatus, ValidationReport

# Query-surface matches are excluded from attribution: the flag rule
# requires a benign query, so those matches did not drive the flag.
ATTRIBUTION_SURFACES = (Surface.RESULT.value, Surface.METADATA.value)


@dataclass(frozen=True)
class FeedbackItem:
    flag: FlaggedInstance
    report: ValidationReport

    def effective_v(self) -> float:
        if self.flag.status is FlagStatus.HUMAN_FP:
            return 1.0
        if self.flag.status is FlagStatus.HUMAN_TP:
            return 0.0
        return self.report.aggregate_v


@dataclass(frozen=True)
class FeedbackBatch:
    epoch: int
    items: tuple[FeedbackItem, ...]
    alpha: float

    @property
    def batch_size(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class ScoreChange:
    lexicon_id: str
    old_score: float
    new_score: float
    mean_v: float
    n_reports: int

    def to_dict(self) -> dict:
        return {
            "lexicon_id": self.lexicon_id,
            "old_score": self.old_score,
            "new_score": self.new_score,
            "mean_v": self.mean_v,
            "n_reports": self.n_reports,
        }


def lexicon_mean_v(batch: FeedbackBatch, lexicon_id: str) -> float | None:
    """Mean benign-confidence over reports implicating the lexicon; None if none do."""
    values = [
        item.effective_v()
        for item in batch.items
        if lexicon_id in item.flag.lexicons_on(*ATTRIBUTION_SURFACES)
    ]
    if not values:
        return None
    # fsum keeps the mean exactly invariant under batch duplication
    return math.fsum(values) / len(values)


def apply_feedback(
    state: LexiconState, batch: FeedbackBatch
) -> tuple[LexiconState, list[ScoreChange]]:
    """Blend batch verdicts into lexicon scores, returning the new state.

    Lexicons absent from the batch are untouched (frequency-based score,
    or their previous override if one exists). Also returns the audit
    trail of every score change.
    """
    if not 0.0 <= batch.alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {batch.alpha}")
    overrides = dict(state.overrides)
    changes: list[ScoreChange] = []
    for lexicon_id in sorted(state.entries):
        mean_v = lexicon_mean_v(batch, lexicon_id)
        if mean_v is None:
            continue
        old = sensitivity(lexicon_id, state)
        new = batch.alpha * old + (1.0 - batch.alpha) * (1.0 - mean_v)
        overrides[lexicon_id] = new
        changes.append(
            ScoreChange(
                lexicon_id=lexicon_id,
                old_score=old,
                new_score=new,
                mean_v=mean_v,
                n_reports=sum(
                    1
                    for item in batch.items
                    if lexicon_id in item.flag.lexicons_on(*ATTRIBUTION_SURFACES)
                ),
            )
        )
    new_state = LexiconState(
        epoch=state.epoch,
        alpha=state.alpha,
        entries=state.entries,
        overrides=overrides,
    )
    return new_state, changes


def build_batch(
    epoch: int,
    alpha: float,
    flags: Iterable[FlaggedInstance],
    reports: Iterable[ValidationReport],
) -> FeedbackBatch:
    """Join flags to their reports by flag_id; flags without a report are skipped."""
    by_id = {r.flag_id: r for r in reports}
    items = tuple(
        FeedbackItem(flag=f, report=by_id[f.flag_id]) for f in flags if f.flag_id in by_id
    )
    return FeedbackBatch(epoch=epoch, items=items, alpha=alpha)
