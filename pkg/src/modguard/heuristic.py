"""Meta-heuristic filter: similarity gate, per-surface scoring, flag rule.

For each of the top-k results of a query: if cosine(query, result+metadata)
clears the similarity threshold, compute the aggregate lexicon scores of
the query, result title, and metadata surfaces, and flag the result when
the query surface looks benign (g(Q) < beta) while the result or its
metadata looks sensitive (g(r) > beta or g(m) > beta). Ties at exactly
beta never flag.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .embedder import EmbedFn, ReferenceEmbedder, cosine
from .lexicon import LexiconState, Surface, aggregate_g, match
from .models import FlaggedInstance, FlagScores, QueryRecord, normalize_text


@dataclass(frozen=True)
class FilterConfig:
    similarity_threshold: float = 0.35
    flag_threshold: float = 0.6
    upper_similarity: float | None = None  # optional near-exact-match skip
    top_k: int = 5

    def __post_init__(self) -> None:
        if not -1.0 <= self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must lie in [-1, 1]")
        if not 0.0 < self.flag_threshold < 1.0:
            raise ValueError("flag_threshold must lie in (0, 1)")
        if self.upper_similarity is not None and self.upper_similarity < self.similarity_threshold:
            raise ValueError("upper_similarity must be >= similarity_threshold")
        if self.top_k < 1:
            raise ValueError("top_k must be positive")


@dataclass
class FilterStats:
    results_seen: int = 0
    gated_similarity: int = 0
    scored: int = 0
    flagged: int = 0
    record_errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "results_seen": self.results_seen,
            "gated_similarity": self.gated_similarity,
            "scored": self.scored,
            "flagged": self.flagged,
            "record_errors": list(self.record_errors),
        }


def flag_id_for(query_id: str, result_id: str, epoch: int) -> str:
    digest = hashlib.sha256(f"{query_id}\x1f{result_id}\x1f{epoch}".encode("utf-8"))
    return digest.hexdigest()[:16]


def filter_query(
    record: QueryRecord,
    state: LexiconState,
    cfg: FilterConfig,
    embed: EmbedFn | None = None,
    stats: FilterStats | None = None,
) -> list[FlaggedInstance]:
    """Apply the flag rule to one query's top-k results, in rank order."""
    if embed is None:
        embed = ReferenceEmbedder()
    if stats is None:
        stats = FilterStats()
    query_text = normalize_text(record.text)
    v_q = embed(query_text, None)
    q_matches = match(query_text, state, Surface.QUERY)
    g_query = aggregate_g(q_matches, state)

    flags: list[FlaggedInstance] = []
    for result in record.results[: cfg.top_k]:
        stats.results_seen += 1
        title = normalize_text(result.title)
        v_r = embed(title, result.metadata)
        s = cosine(v_q, v_r)
        if s < cfg.similarity_threshold or (
            cfg.upper_similarity is not None and s > cfg.upper_similarity
        ):
            stats.gated_similarity += 1
            continue
        stats.scored += 1
        r_matches = match(title, state, Surface.RESULT)
        m_matches = match(result.metadata.matching_text(), state, Surface.METADATA)
        g_result = aggregate_g(r_matches, state)
        g_metadata = aggregate_g(m_matches, state)
        beta = cfg.flag_threshold
        if g_query < beta and (g_result > beta or g_metadata > beta):
            stats.flagged += 1
            flags.append(
                FlaggedInstance(
                    flag_id=flag_id_for(record.query_id, result.result_id, state.epoch),
                    query_id=record.query_id,
                    result_id=result.result_id,
                    epoch=state.epoch,
                    scores=FlagScores(
                        similarity=s,
                        g_query=g_query,
                        g_result=g_result,
                        g_metadata=g_metadata,
                    ),
                    matched_lexicons={
                        Surface.QUERY.value: q_matches.matches,
                        Surface.RESULT.value: r_matches.matches,
                        Surface.METADATA.value: m_matches.matches,
                    },
                )
            )
    return flags


def filter_batch(
    records: list[QueryRecord],
    state: LexiconState,
    cfg: FilterConfig,
    embed: EmbedFn | None = None,
) -> tuple[list[FlaggedInstance], FilterStats]:
    """Filter a batch of queries; per-record errors isolate to that record."""
    if embed is None:
        embed = ReferenceEmbedder()
    stats = FilterStats()
    flags: list[FlaggedInstance] = []
    for record in records:
        try:
            flags.extend(filter_query(record, state, cfg, embed=embed, stats=stats))
        except Exception as exc:  # noqa: BLE001 - per-record isolation
            stats.record_errors.append(f"{record.query_id}: {exc}")
    return flags, stats
