"""HTTP service: review queue, verdict submission, lexicon state, metrics.

Read endpoints are pure views over the data directory. Verdict writes go
through the store's append-only verdict log. The dry-run /v1/moderate
endpoint runs only the heuristic filter against the latest snapshot; it
never validates or persists.
"""

from __future__ import annotations

import os
from datetime import datetime, timezone

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .heuristic import filter_query
from .models import (
    FlagStatus,
    MetadataRecord,
    QueryRecord,
    ResultRecord,
    StatusTransitionError,
)
from .pipeline import PipelineConfig, weekly_metrics
from .store import DataStore, FlagNotFoundError

TOKEN_ENV = "MODGUARD_TOKEN"
TOKEN_HEADER = "x-modguard-token"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: dict | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details or {}


def error_response(exc: ApiError) -> JSONResponse:
    return JSONResponse(
        status_code=exc.status,
        content={"code": exc.code, "message": exc.message, "details": exc.details},
    )


class VerdictBody(BaseModel):
    verdict: str
    reviewer_id: str = Field(min_length=1)
    supersede: bool = False


class ModerateResult(BaseModel):
    result_id: str
    title: str
    rank: int
    metadata: dict = Field(default_factory=dict)


class ModerateBody(BaseModel):
    query: str = Field(min_length=1)
    results: list[ModerateResult]


def create_app(data_dir, config: PipelineConfig | None = None) -> FastAPI:
    app = FastAPI(title="modguard review service", version="0.1.0")
    store = DataStore(data_dir)
    app.state.store = store
    app.state.config = config

    def require_token(
        token: str | None = Header(default=None, alias=TOKEN_HEADER),
    ) -> None:
        expected = os.environ.get(TOKEN_ENV)
        if expected and token != expected:
            raise ApiError(401, "unauthorized", "missing or invalid token")

    @app.exception_handler(ApiError)
    async def _handle_api_error(request: Request, exc: ApiError):  # noqa: ARG001
        return error_response(exc)

    def _queue_items():
        reports = store.reports_by_flag()
        flags = store.all_flags()
        # Newest first: later epochs first, later flags within an epoch first.
        indexed = list(enumerate(flags))
        indexed.sort(key=lambda pair: (-pair[1].epoch, -pair[0]))
        return [(f, reports.get(f.flag_id)) for _, f in indexed]

    @app.get("/v1/review/queue", dependencies=[Depends(require_token)])
    def review_queue(
        epoch: int | None = None,
        status: str | None = None,
        limit: int = Query(default=50, ge=1, le=500),
        cursor: str | None = None,
    ):
        if epoch is not None and epoch not in store.list_epochs():
            raise ApiError(404, "not_found", f"unknown epoch {epoch}")
        status_filter: FlagStatus | None = None
        if status is not None:
            try:
                status_filter = FlagStatus(status)
            except ValueError:
                raise ApiError(400, "bad_request", f"unknown status {status!r}")
        offset = 0
        if cursor is not None:
            try:
                offset = int(cursor)
                if offset < 0:
                    raise ValueError
            except ValueError:
                raise ApiError(400, "bad_cursor", f"invalid cursor {cursor!r}")
        items = [
            (f, r)
            for f, r in _queue_items()
            if (epoch is None or f.epoch == epoch)
            and (status_filter is None or f.status is status_filter)
        ]
        page = items[offset : offset + limit]
        next_cursor = str(offset + limit) if offset + limit < len(items) else None
        return {
            "items": [
                {"flag": f.to_dict(), "report": r.to_dict() if r else None} for f, r in page
            ],
            "next_cursor": next_cursor,
            "total": len(items),
        }

    @app.post("/v1/review/{flag_id}/verdict", dependencies=[Depends(require_token)])
    def submit_verdict(flag_id: str, body: VerdictBody):
        try:
            verdict = FlagStatus(body.verdict)
        except ValueError:
            raise ApiError(400, "bad_request", f"unknown verdict {body.verdict!r}")
        if not verdict.is_human:
            raise ApiError(400, "bad_request", "verdict must be HUMAN_TP or HUMAN_FP")
        try:
            current = store.find_flag(flag_id)
        except FlagNotFoundError:
            raise ApiError(404, "not_found", f"unknown flag {flag_id!r}")
        if current.status.is_human and not body.supersede:
            raise ApiError(
                409,
                "verdict_conflict",
                "flag already has a human verdict; set supersede to replace it",
                {"current_status": current.status.value},
            )
        from .store import ingest_human_verdict

        try:
            updated = ingest_human_verdict(
                store,
                flag_id,
                verdict,
                reviewer_id=body.reviewer_id,
                timestamp=datetime.now(timezone.utc).isoformat(),
            )
        except StatusTransitionError as exc:
            raise ApiError(409, "verdict_conflict", str(exc))
        return {"flag": updated.to_dict()}

    @app.get("/v1/lexicons", dependencies=[Depends(require_token)])
    def lexicons(sort: str = "score"):
        latest = store.latest_epoch()
        if latest is None:
            raise ApiError(503, "no_snapshot", "no epoch snapshot exists yet")
        state = store.load_epoch(latest).state
        from .lexicon import sensitivity

        rows = [
            {
                "lexicon_id": lid,
                "term": e.lexicon.term,
                "category": e.lexicon.category,
                "f0": e.f0,
                "f_t": e.f_t,
                "score": sensitivity(lid, state),
                "override": lid in state.overrides,
            }
            for lid, e in state.entries.items()
        ]
        if sort == "score":
            rows.sort(key=lambda r: -r["score"])
        else:
            rows.sort(key=lambda r: r["lexicon_id"])
        return {"epoch": state.epoch, "lexicons": rows}

    @app.get("/v1/metrics/weekly", dependencies=[Depends(require_token)])
    def metrics_weekly():
        # A precomputed metrics file (e.g. loaded from an external report)
        # takes precedence over aggregation from the flag store.
        preloaded = store.data_dir / "metrics-weekly.json"
        if preloaded.exists():
            import json

            with open(preloaded, "r", encoding="utf-8") as fh:
                return {"weeks": json.load(fh)}
        week_length = app.state.config.week_length if app.state.config else 7
        weekly = weekly_metrics(store, week_length=week_length)
        return {"weeks": [m.to_dict() for m in weekly]}

    @app.post("/v1/moderate", dependencies=[Depends(require_token)])
    def moderate(body: ModerateBody):
        latest = store.latest_epoch()
        if latest is None:
            raise ApiError(503, "no_snapshot", "no epoch snapshot exists yet")
        state = store.load_epoch(latest).state
        config = app.state.config or PipelineConfig(lexicon_path="")
        record = QueryRecord(
            query_id="dry-run",
            text=body.query,
            timestamp=datetime.now(timezone.utc),
            results=tuple(
                ResultRecord(
                    result_id=r.result_id,
                    title=r.title,
                    rank=r.rank,
                    metadata=MetadataRecord.from_dict(r.metadata),
                )
                for r in body.results
            ),
        )
        flags = filter_query(record, state, config.filter, embed=config.embed_fn())
        return {"flags": [f.to_dict() for f in flags]}

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "latest_epoch": store.latest_epoch()}

    return app


def main() -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="modguard review service")
    parser.add_argument("--data-dir", required=True)
    parser.add_argument("--config", default=None)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8470)
    args = parser.parse_args()
    config = PipelineConfig.from_file(args.config) if args.config else None
    app = create_app(args.data_dir, config)
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
