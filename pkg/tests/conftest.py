import json
from datetime import datetime, timezone

import pytest

from modguard.lexicon import Lexicon, LexiconEntry, LexiconState
from modguard.models import MetadataRecord, QueryRecord, ResultRecord


def make_state(entries: dict[str, tuple[str, int, int]], alpha: float = 0.5,
               epoch: int = 0, overrides: dict[str, float] | None = None) -> LexiconState:
    """entries: lexicon_id -> (term, f0, f_t)."""
    return LexiconState(
        epoch=epoch,
        alpha=alpha,
        entries={
            lid: LexiconEntry(
                lexicon=Lexicon(lexicon_id=lid, term=term, category="offensive"),
                f0=f0,
                f_t=ft,
            )
            for lid, (term, f0, ft) in entries.items()
        },
        overrides=overrides or {},
    )


def make_query(query_id: str, text: str, results: list[ResultRecord]) -> QueryRecord:
    return QueryRecord(
        query_id=query_id,
        text=text,
        timestamp=datetime(2026, 1, 1, tzinfo=timezone.utc),
        results=tuple(results),
    )


def make_result(result_id: str, title: str, rank: int,
                description: str | None = None, age_rating: str | None = None,
                genre: list[str] | None = None) -> ResultRecord:
    return ResultRecord(
        result_id=result_id,
        title=title,
        rank=rank,
        metadata=MetadataRecord(age_rating=age_rating, genre=genre, description=description),
    )


@pytest.fixture
def log_file(tmp_path):
    def write(lines: list[dict | str], name: str = "log.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line if isinstance(line, str) else json.dumps(line))
                fh.write("\n")
        return path

    return write
