"""Daily offline pipeline: ingest -> observe -> filter -> validate -> feedback.

One epoch corresponds to one log file (one day). Stages run in a fixed
order and the epoch snapshot is written atomically at the end; any stage
failure aborts the epoch without writing anything.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .embedder import EmbedFn, get_embedder
from .feedback import FeedbackBatch, FeedbackItem, apply_feedback
from .fixtures import FixtureConfig, generate_fixtures, write_fixtures
from .heuristic import FilterConfig, filter_batch
from .lexicon import LexiconState, bootstrap_state, load_lexicons, observe_epoch, sensitivity
from .metrics import WeeklyMetrics, summarize
from .models import FlaggedInstance, QueryRecord, ResultRecord, ingest_query_log
from .store import DataStore, VerdictRecord, ingest_human_verdict
from .validator import Backend, ValidatorConfig, validate_batch, verdict_for


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    lexicon_path: str
    alpha: float = 0.9
    filter: FilterConfig = field(default_factory=FilterConfig)
    validator: ValidatorConfig = field(default_factory=ValidatorConfig)
    week_length: int = 7  # epochs per metrics week
    seed: int = 0
    embedder: str = "reference"
    embedding_dim: int = 256

    def embed_fn(self) -> EmbedFn:
        return get_embedder(self.embedder, dim=self.embedding_dim)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        filter_cfg = FilterConfig(**raw.get("filter", {}))
        vraw = dict(raw.get("validator", {}))
        if "backend" in vraw:
            vraw["backend"] = Backend(vraw["backend"])
        validator_cfg = ValidatorConfig(**vraw)
        return cls(
            lexicon_path=raw["lexicon_path"],
            alpha=float(raw.get("alpha", 0.9)),
            filter=filter_cfg,
            validator=validator_cfg,
            week_length=int(raw.get("week_length", 7)),
            seed=int(raw.get("seed", 0)),
            embedder=raw.get("embedder", "reference"),
            embedding_dim=int(raw.get("embedding_dim", 256)),
        )


@dataclass
class EpochSummary:
    epoch: int
    records: int
    skipped_lines: int
    results_seen: int
    gated_similarity: int
    scored: int
    flagged: int
    validated_tp: int
    validated_fp: int
    pending: int
    verdicts_consumed: int
    score_changes: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _load_or_bootstrap(store: DataStore, config: PipelineConfig) -> tuple[LexiconState, int, int]:
    """Returns (state before this epoch, this epoch number, verdict cursor)."""
    latest = store.latest_epoch()
    if latest is None:
        lexicons = load_lexicons(config.lexicon_path)
        return bootstrap_state(lexicons, config.alpha), 0, 0
    data = store.load_epoch(latest)
    cursor = int(data.summary.get("verdict_cursor", 0))
    return data.state, latest + 1, cursor


def run_epoch(log_path, config: PipelineConfig, data_dir) -> EpochSummary:
    """Run one full offline epoch over a day's query log."""
    store = DataStore(data_dir)
    prev_state, epoch, cursor = _load_or_bootstrap(store, config)

    ingest = ingest_query_log(log_path, k=config.filter.top_k)
    records = ingest.records

    # Frequency refresh first, so today's flags use today's usage shares.
    state = observe_epoch(records, prev_state)
    if state.epoch != epoch:
        state = dataclasses.replace(state, epoch=epoch)

    embed = config.embed_fn()
    flags, stats = filter_batch(records, state, config.filter, embed=embed)
    if stats.record_errors:
        raise PipelineError(f"record errors during filtering: {stats.record_errors}")

    lookup: dict[tuple[str, str], tuple[QueryRecord, ResultRecord]] = {}
    for record in records:
        for result in record.results:
            lookup[(record.query_id, result.result_id)] = (record, result)
    items = [(f, *lookup[(f.query_id, f.result_id)]) for f in flags]
    reports, failures = validate_batch(items, config.validator)

    report_by_id = {r.flag_id: r for r in reports}
    resolved_flags: list[FlaggedInstance] = []
    tp = fp = 0
    for flag in flags:
        report = report_by_id.get(flag.flag_id)
        if report is None:
            resolved_flags.append(flag)  # stays PENDING
            continue
        status = verdict_for(report.aggregate_v)
        if status.is_true_positive:
            tp += 1
        else:
            fp += 1
        resolved_flags.append(flag.with_status(status))

    # Human verdicts recorded since the last epoch join this batch (latest
    # verdict per flag wins), alongside this epoch's machine verdicts.
    new_verdicts = store.read_verdicts(cursor)
    feedback_items = [
        FeedbackItem(flag=f, report=report_by_id[f.flag_id])
        for f in resolved_flags
        if f.flag_id in report_by_id
    ]
    if new_verdicts:
        latest_verdict: dict[str, VerdictRecord] = {v.flag_id: v for v in new_verdicts}
        prior_reports = store.reports_by_flag()
        prior_flags = {f.flag_id: f for f in store.all_flags()}
        for flag_id, verdict in latest_verdict.items():
            flag = prior_flags.get(flag_id)
            report = prior_reports.get(flag_id)
            if flag is None or report is None:
                continue
            feedback_items.append(FeedbackItem(flag=flag, report=report))

    batch = FeedbackBatch(epoch=epoch, items=tuple(feedback_items), alpha=config.alpha)
    new_state, changes = apply_feedback(state, batch)

    summary = EpochSummary(
        epoch=epoch,
        records=len(records),
        skipped_lines=len(ingest.errors),
        results_seen=stats.results_seen,
        gated_similarity=stats.gated_similarity,
        scored=stats.scored,
        flagged=stats.flagged,
        validated_tp=tp,
        validated_fp=fp,
        pending=len(failures),
        verdicts_consumed=len(new_verdicts),
        score_changes=len(changes),
    )
    summary_doc = summary.to_dict()
    summary_doc["verdict_cursor"] = cursor + len(new_verdicts)
    summary_doc["audit"] = [c.to_dict() for c in changes]
    store.write_snapshot(
        epoch=epoch,
        state=new_state,
        flags=resolved_flags,
        reports=reports,
        verdicts=new_verdicts,
        summary=summary_doc,
    )
    return summary


def weekly_metrics(store: DataStore, week_length: int = 7) -> list[WeeklyMetrics]:
    """Group resolved flags by metrics week (week_length epochs each)."""
    flags = store.all_flags()
    if not flags and store.latest_epoch() is None:
        return []
    max_epoch = store.latest_epoch() or 0
    weeks = max_epoch // week_length + 1
    out = []
    for w in range(weeks):
        lo, hi = w * week_length, (w + 1) * week_length
        week_flags = [f for f in flags if lo <= f.epoch < hi]
        out.append(summarize(week_flags, window=w + 1))
    return out


@dataclass(frozen=True)
class SimulationConfig:
    seed: int = 7
    queries_per_epoch: int = 20
    week_length: int = 7
    # Lexicons whose flags get automatic HUMAN_FP verdicts after each
    # epoch, simulating editorial review of over-weighted terms.
    human_fp_lexicons: tuple[str, ...] = ()


def run_simulation(
    weeks: int,
    sim: SimulationConfig,
    data_dir,
    pipeline_config: PipelineConfig | None = None,
) -> list[WeeklyMetrics]:
    """Run a seeded multi-week synthetic evaluation; returns weekly metrics."""
    if weeks < 0:
        raise ValueError("weeks must be >= 0")
    if weeks == 0:
        return []
    data_dir = Path(data_dir)
    fixture_cfg = FixtureConfig(
        seed=sim.seed,
        epochs=weeks * sim.week_length,
        queries_per_epoch=sim.queries_per_epoch,
    )
    fixture_dir = write_fixtures(fixture_cfg, data_dir / "fixtures")
    config = pipeline_config or PipelineConfig(
        lexicon_path=str(fixture_dir / "lexicons.jsonl"),
        week_length=sim.week_length,
        seed=sim.seed,
    )
    store = DataStore(data_dir)
    for epoch in range(fixture_cfg.epochs):
        log_path = fixture_dir / "logs" / f"epoch-{epoch:03d}.jsonl"
        run_epoch(log_path, config, data_dir)
        if sim.human_fp_lexicons:
            _auto_review(store, epoch, sim.human_fp_lexicons)
    return weekly_metrics(store, week_length=sim.week_length)


def _auto_review(store: DataStore, epoch: int, lexicon_ids: tuple[str, ...]) -> None:
    from .feedback import ATTRIBUTION_SURFACES
    from .models import FlagStatus

    targets = set(lexicon_ids)
    data = store.load_epoch(epoch)
    for flag in data.flags:
        if targets & flag.lexicons_on(*ATTRIBUTION_SURFACES):
            ingest_human_verdict(
                store,
                flag.flag_id,
                FlagStatus.HUMAN_FP,
                reviewer_id="sim-editorial",
                timestamp=f"epoch-{epoch}",
            )


def lexicon_scores(state: LexiconState) -> dict[str, float]:
    return {lid: sensitivity(lid, state) for lid in state.entries}
