"""Lexicon store, time-adaptive sensitivity scores, and surface aggregates.

The sensitivity score of lexicon L at epoch t blends baseline rarity and
current usage share:

    S(L, t) = alpha * (1 - f(L,0) / sum_k f(k,0)) + (1 - alpha) * f(L,t) / sum_k f(k,t)

Feedback-updated scores are layered on top as overrides: once the feedback
loop has blended verdicts into a lexicon's score, that override is what
subsequent scoring sees, until the next feedback update replaces it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .models import QueryRecord

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


class Surface(str, Enum):
    QUERY = "QUERY"
    RESULT = "RESULT"
    METADATA = "METADATA"


@dataclass(frozen=True)
class Lexicon:
    lexicon_id: str
    term: str  # normalized single word or multi-word phrase
    category: str
    added_at_epoch: int = 0

    def token_tuple(self) -> tuple[str, ...]:
        return tuple(_TOKEN_RE.findall(self.term))


@dataclass(frozen=True)
class LexiconEntry:
    lexicon: Lexicon
    f0: int  # baseline count f(L, 0)
    f_t: int  # current-epoch count f(L, t)


@dataclass(frozen=True)
class LexiconMatchSet:
    surface: Surface
    matches: tuple[str, ...]  # deduplicated lexicon ids

    @property
    def n(self) -> int:
        return len(self.matches)


@dataclass(frozen=True)
class LexiconState:
    """Immutable snapshot of all lexicon entries at one epoch."""

    epoch: int
    alpha: float
    entries: Mapping[str, LexiconEntry]
    overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    def lexicons(self) -> list[Lexicon]:
        return [e.lexicon for e in self.entries.values()]

    def total_f0(self) -> int:
        return sum(e.f0 for e in self.entries.values())

    def total_ft(self) -> int:
        return sum(e.f_t for e in self.entries.values())


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def _find_phrase(tokens: list[str], phrase: tuple[str, ...]) -> int:
    """Count non-overlapping contiguous occurrences of phrase in tokens."""
    if not phrase:
        return 0
    count = 0
    i = 0
    m = len(phrase)
    while i + m <= len(tokens):
        if tuple(tokens[i : i + m]) == phrase:
            count += 1
            i += m
        else:
            i += 1
    return count


def match(text: str, state: LexiconState, surface: Surface) -> LexiconMatchSet:
    """Match lexicons as whole-token (phrases: contiguous token) sequences.

    Each lexicon contributes at most once per surface regardless of how
    often it occurs.
    """
    tokens = tokenize(text)
    matched = [
        lid
        for lid, entry in state.entries.items()
        if _find_phrase(tokens, entry.lexicon.token_tuple()) > 0
    ]
    return LexiconMatchSet(surface=surface, matches=tuple(matched))


def count_occurrences(text: str, state: LexiconState) -> dict[str, int]:
    """Occurrence counts per lexicon in one text (non-overlapping)."""
    tokens = tokenize(text)
    counts: dict[str, int] = {}
    for lid, entry in state.entries.items():
        c = _find_phrase(tokens, entry.lexicon.token_tuple())
        if c:
            counts[lid] = c
    return counts


def sensitivity(lexicon_id: str, state: LexiconState) -> float:
    """S(L, t); a stored feedback override takes precedence over the formula.

    Degenerate sums (no baseline or no current counts at all) contribute a
    share of 0 rather than dividing by zero.
    """
    override = state.overrides.get(lexicon_id)
    if override is not None:
        return override
    entry = state.entries[lexicon_id]
    total0 = state.total_f0()
    total_t = state.total_ft()
    f0_share = entry.f0 / total0 if total0 > 0 else 0.0
    ft_share = entry.f_t / total_t if total_t > 0 else 0.0
    return state.alpha * (1.0 - f0_share) + (1.0 - state.alpha) * ft_share


def aggregate_g(matchset: LexiconMatchSet, state: LexiconState) -> float:
    """Mean sensitivity over the matched lexicons; empty matchset scores 0."""
    if matchset.n == 0:
        return 0.0
    return sum(sensitivity(lid, state) for lid in matchset.matches) / matchset.n


def observe_epoch(records: Iterable[QueryRecord], state: LexiconState) -> LexiconState:
    """Advance to the next epoch with fresh current-usage counts.

    Counts cover query texts, result titles, and metadata text. Baseline
    counts and existing feedback overrides are preserved.
    """
    from .models import normalize_text

    totals: dict[str, int] = {lid: 0 for lid in state.entries}
    for record in records:
        surfaces = [normalize_text(record.text)]
        for result in record.results:
            surfaces.append(normalize_text(result.title))
            surfaces.append(result.metadata.matching_text())
        for text in surfaces:
            for lid, c in count_occurrences(text, state).items():
                totals[lid] += c
    entries = {
        lid: LexiconEntry(lexicon=e.lexicon, f0=e.f0, f_t=totals[lid])
        for lid, e in state.entries.items()
    }
    return LexiconState(
        epoch=state.epoch + 1,
        alpha=state.alpha,
        entries=entries,
        overrides=dict(state.overrides),
    )


def add_lexicon(state: LexiconState, lexicon: Lexicon) -> LexiconState:
    """Add a new lexicon with add-one baseline smoothing (f0 = 1)."""
    if lexicon.lexicon_id in state.entries:
        raise ValueError(f"lexicon {lexicon.lexicon_id!r} already present")
    entries = dict(state.entries)
    entries[lexicon.lexicon_id] = LexiconEntry(lexicon=lexicon, f0=1, f_t=0)
    return LexiconState(
        epoch=state.epoch,
        alpha=state.alpha,
        entries=entries,
        overrides=dict(state.overrides),
    )


# --- persistence -------------------------------------------------------------


def load_lexicons(path) -> list[tuple[Lexicon, int]]:
    """Load a JSONL lexicon file; yields (lexicon, baseline f0) pairs."""
    out: list[tuple[Lexicon, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            lex = Lexicon(
                lexicon_id=str(d["lexicon_id"]),
                term=str(d["term"]),
                category=str(d["category"]),
                added_at_epoch=int(d.get("added_at_epoch", 0)),
            )
            out.append((lex, int(d.get("f0", 1))))
    return out


def bootstrap_state(lexicons: Iterable[tuple[Lexicon, int]], alpha: float) -> LexiconState:
    """Epoch-0 state from a lexicon file: current counts start at baseline."""
    entries = {
        lex.lexicon_id: LexiconEntry(lexicon=lex, f0=f0, f_t=f0) for lex, f0 in lexicons
    }
    terms = [e.lexicon.term for e in entries.values()]
    if len(set(terms)) != len(terms):
        raise ValueError("lexicon terms must be unique after normalization")
    return LexiconState(epoch=0, alpha=alpha, entries=entries)


def state_to_dict(state: LexiconState) -> dict:
    return {
        "epoch": state.epoch,
        "alpha": state.alpha,
        "entries": [
            {
                "lexicon_id": lid,
                "term": e.lexicon.term,
                "category": e.lexicon.category,
                "added_at_epoch": e.lexicon.added_at_epoch,
                "f0": e.f0,
                "f_t": e.f_t,
                "score": sensitivity(lid, state),
                "override": lid in state.overrides,
            }
            for lid, e in sorted(state.entries.items())
        ],
    }


def state_from_dict(d: dict) -> LexiconState:
    entries: dict[str, LexiconEntry] = {}
    overrides: dict[str, float] = {}
    for row in d["entries"]:
        lid = str(row["lexicon_id"])
        entries[lid] = LexiconEntry(
            lexicon=Lexicon(
                lexicon_id=lid,
                term=str(row["term"]),
                category=str(row["category"]),
                added_at_epoch=int(row.get("added_at_epoch", 0)),
            ),
            f0=int(row["f0"]),
            f_t=int(row["f_t"]),
        )
        if row.get("override"):
            overrides[lid] = float(row["score"])
    return LexiconState(
        epoch=int(d["epoch"]),
        alpha=float(d["alpha"]),
        entries=entries,
        overrides=overrides,
    )


def save_state(state: LexiconState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_dict(state), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_state(path) -> LexiconState:
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_dict(json.load(fh))
