"""Seeded synthetic fixtures: query logs, lexicons, and planted ground truth.

Three scenario archetypes mirror the taxonomy of real flagged content
without using real titles:

  - aligned: benign query, benign matching result (never flagged);
  - violation ("tp"): benign query whose matching result carries sensitive
    lexicon terms and the mock validator's violation marker in metadata;
  - overreach ("fp"): benign query whose matching result trips an
    over-weighted lexicon but is actually acceptable (no marker), so the
    validator marks it a false positive and the feedback loop decays the
    lexicon.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .models import MetadataRecord, QueryRecord, ResultRecord
from .validator import MOCK_VIOLATION_MARKER

FILLER_WORDS = [
    "family", "movie", "night", "cooking", "travel", "music", "history",
    "garden", "drama", "comedy", "sports", "nature", "classic", "kids",
    "holiday", "baking", "ocean", "wildlife", "space", "mystery",
]

# Terms for lexicons whose flags are genuine violations.
TP_LEXICON_TERMS = [
    "graphic brutality", "explicit exploitation", "hateful slurs",
    "toxic stereotype", "degrading themes", "extremist propaganda",
]

# Terms for over-weighted lexicons that mostly hit acceptable content.
FP_LEXICON_TERMS = [
    "scandal", "controversy", "rebellion", "outlaw", "vendetta", "uprising",
]

CATEGORIES = ["offensive", "sexist", "xenophobic"]


@dataclass(frozen=True)
class FixtureConfig:
    seed: int = 7
    epochs: int = 7
    queries_per_epoch: int = 20
    results_per_query: int = 5
    n_tp_lexicons: int = 3
    n_fp_lexicons: int = 3
    # Fraction of queries per archetype; remainder is aligned.
    violation_fraction: float = 0.2
    overreach_fraction: float = 0.2


@dataclass
class PlantedPair:
    query_id: str
    result_id: str
    kind: str  # "tp" | "fp"
    lexicon_id: str

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "result_id": self.result_id,
            "kind": self.kind,
            "lexicon_id": self.lexicon_id,
        }


@dataclass
class FixtureSet:
    lexicons: list[dict]
    logs: list[list[QueryRecord]]  # one list of records per epoch
    planted: list[PlantedPair] = field(default_factory=list)


def _benign_query(rng: random.Random) -> list[str]:
    return rng.sample(FILLER_WORDS, 3)


def _matching_title(rng: random.Random, query_words: list[str]) -> str:
    # Titles reuse the query words so the embedding similarity gate passes.
    extra = rng.choice(FILLER_WORDS)
    return " ".join(query_words + [extra])


def generate_fixtures(cfg: FixtureConfig) -> FixtureSet:
    rng = random.Random(cfg.seed)
    lexicons: list[dict] = []
    tp_ids: list[str] = []
    fp_ids: list[str] = []
    for i in range(cfg.n_tp_lexicons):
        lid = f"lex-tp-{i}"
        tp_ids.append(lid)
        lexicons.append(
            {
                "lexicon_id": lid,
                "term": TP_LEXICON_TERMS[i % len(TP_LEXICON_TERMS)],
                "category": CATEGORIES[i % len(CATEGORIES)],
                "f0": rng.randint(1, 3),
            }
        )
    for i in range(cfg.n_fp_lexicons):
        lid = f"lex-fp-{i}"
        fp_ids.append(lid)
        lexicons.append(
            {
                "lexicon_id": lid,
                "term": FP_LEXICON_TERMS[i % len(FP_LEXICON_TERMS)],
                "category": CATEGORIES[i % len(CATEGORIES)],
                "f0": rng.randint(1, 3),
            }
        )
    term_by_id = {d["lexicon_id"]: d["term"] for d in lexicons}

    base_time = datetime(2026, 1, 1, tzinfo=timezone.utc)
    logs: list[list[QueryRecord]] = []
    planted: list[PlantedPair] = []
    for epoch in range(cfg.epochs):
        records: list[QueryRecord] = []
        for qi in range(cfg.queries_per_epoch):
            roll = rng.random()
            if roll < cfg.violation_fraction:
                kind = "tp"
            elif roll < cfg.violation_fraction + cfg.overreach_fraction:
                kind = "fp"
            else:
                kind = "aligned"
            query_id = f"e{epoch}-q{qi}"
            qwords = _benign_query(rng)
            results = []
            for ri in range(cfg.results_per_query):
                result_id = f"{query_id}-r{ri}"
                title = _matching_title(rng, qwords)
                metadata = MetadataRecord(
                    age_rating=rng.choice(["tv-g", "tv-pg", "tv-14"]),
                    genre=[rng.choice(FILLER_WORDS)],
                    description=f"a {rng.choice(FILLER_WORDS)} program about {qwords[0]}",
                )
                if ri == 0 and kind == "tp":
                    lid = rng.choice(tp_ids)
                    metadata = MetadataRecord(
                        age_rating="tv-ma",
                        genre=["documentary"],
                        description=(
                            f"program about {qwords[0]} featuring {term_by_id[lid]} "
                            f"{MOCK_VIOLATION_MARKER}"
                        ),
                    )
                    planted.append(PlantedPair(query_id, result_id, "tp", lid))
                elif ri == 0 and kind == "fp":
                    lid = rng.choice(fp_ids)
                    metadata = MetadataRecord(
                        age_rating=rng.choice(["tv-g", "tv-pg"]),
                        genre=["documentary"],
                        description=f"wholesome {qwords[0]} story about a {term_by_id[lid]}",
                    )
                    planted.append(PlantedPair(query_id, result_id, "fp", lid))
                results.append(
                    ResultRecord(result_id=result_id, title=title, rank=ri + 1, metadata=metadata)
                )
            records.append(
                QueryRecord(
                    query_id=query_id,
                    text=" ".join(qwords),
                    timestamp=base_time + timedelta(days=epoch, minutes=qi),
                    results=tuple(results),
                )
            )
        logs.append(records)
    return FixtureSet(lexicons=lexicons, logs=logs, planted=planted)


def write_fixtures(cfg: FixtureConfig, out_dir) -> Path:
    """Write lexicons, per-epoch logs, and planted labels under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fixtures = generate_fixtures(cfg)
    with open(out / "lexicons.jsonl", "w", encoding="utf-8") as fh:
        for row in fixtures.lexicons:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    logs_dir = out / "logs"
    logs_dir.mkdir(exist_ok=True)
    for epoch, records in enumerate(fixtures.logs):
        with open(logs_dir / f"epoch-{epoch:03d}.jsonl", "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    with open(out / "labels.json", "w", encoding="utf-8") as fh:
        json.dump([p.to_dict() for p in fixtures.planted], fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "fixture-config.json", "w", encoding="utf-8") as fh:
        json.dump(cfg.__dict__, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out
