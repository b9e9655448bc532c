"""Validation scoring of flagged query-result pairs.

Each flag is scored on a set of weighted tasks; the aggregate is the
convex combination V = sum_p w_p * score_p. Scores are oriented as
benign-confidence: 1.0 means the flag is a false positive (the content is
acceptable for the query), 0.0 means a true violation. Aggregate >= 0.5
maps to VALIDATED_FP, below to VALIDATED_TP.

Backends: a deterministic mock (default; keys off reserved marker tokens
planted in fixtures) and a generic HTTP chat-completion client.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from enum import Enum

import httpx

from .models import (
    FlaggedInstance,
    FlagStatus,
    QueryRecord,
    ResultRecord,
    ValidationReport,
    ValidationSource,
)

# Reserved marker tokens the fixture generator plants in result titles or
# metadata descriptions. Presence of the violation marker makes the mock
# score the flag as a true violation.
MOCK_VIOLATION_MARKER = "mockviolation"
MOCK_BENIGN_MARKER = "mockbenign"

TASK_NAMES = ("query_irrelevancy", "age_estimation", "policy_violation", "cot_judgment")

DEFAULT_PROMPT = (
    "Task: {task}. Given the search query, a retrieved result, and its "
    "metadata, reply with a single JSON object {{\"score\": float, "
    "\"rationale\": str}} where score in [0,1] is your confidence that the "
    "result is acceptable for this query (1 = acceptable, 0 = violation).\n"
    "Query: {query}\nResult: {result}\nMetadata: {metadata}"
)


class Backend(str, Enum):
    MOCK = "MOCK"
    HTTP_LLM = "HTTP_LLM"


@dataclass(frozen=True)
class ValidationTask:
    name: str
    weight: float
    prompt_template: str = DEFAULT_PROMPT

    def __post_init__(self) -> None:
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("task weight must lie in [0, 1]")


def default_tasks() -> list[ValidationTask]:
    w = 1.0 / len(TASK_NAMES)
    return [ValidationTask(name=n, weight=w) for n in TASK_NAMES]


@dataclass(frozen=True)
class ValidatorConfig:
    backend: Backend = Backend.MOCK
    endpoint: str | None = None
    model_name: str | None = None
    timeout: float = 30.0
    max_retries: int = 2
    tasks: tuple[ValidationTask, ...] = field(default_factory=lambda: tuple(default_tasks()))
    backoff_base: float = 0.5

    def __post_init__(self) -> None:
        if self.backend is Backend.HTTP_LLM and not (self.endpoint and self.model_name):
            raise ValueError("HTTP_LLM backend requires endpoint and model_name")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        total = sum(t.weight for t in self.tasks)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"task weights must sum to 1, got {total}")


class ValidationFailure(RuntimeError):
    """Backend could not produce a score; the flag stays PENDING."""


@dataclass
class PendingValidation:
    flag_id: str
    error: str


def verdict_for(aggregate_v: float) -> FlagStatus:
    """Map aggregate benign-confidence to a verdict; the 0.5 tie releases."""
    return FlagStatus.VALIDATED_FP if aggregate_v >= 0.5 else FlagStatus.VALIDATED_TP


def _mock_jitter(flag_id: str, task: str) -> float:
    digest = hashlib.blake2b(f"{flag_id}\x1f{task}".encode("utf-8"), digest_size=4).digest()
    frac = int.from_bytes(digest, "big") / 0xFFFFFFFF
    return (frac - 0.5) * 0.1  # +-0.05


def _mock_task_score(flag: FlaggedInstance, q: QueryRecord, r: ResultRecord, task: str) -> float:
    haystack = " ".join(
        [r.title, r.metadata.description or "", " ".join(r.metadata.genre or [])]
    ).lower()
    base = 0.1 if MOCK_VIOLATION_MARKER in haystack else 0.9
    return max(0.0, min(1.0, base + _mock_jitter(flag.flag_id, task)))


class HttpLlmClient:
    """One chat-completion request per task, retried with exponential backoff."""

    def __init__(self, cfg: ValidatorConfig, transport: httpx.BaseTransport | None = None):
        self.cfg = cfg
        self._client = httpx.Client(timeout=cfg.timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def score_task(
        self, task: ValidationTask, q: QueryRecord, r: ResultRecord
    ) -> tuple[float, str]:
        prompt = task.prompt_template.format(
            task=task.name,
            query=q.text,
            result=r.title,
            metadata=json.dumps(r.metadata.to_dict(), sort_keys=True),
        )
        body = {
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        last_error = "no attempt made"
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                time.sleep(self.cfg.backoff_base * (2 ** (attempt - 1)))
            try:
                resp = self._client.post(self.cfg.endpoint, json=body)
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                continue
            if resp.status_code >= 500:
                last_error = f"server error {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise ValidationFailure(f"unexpected status {resp.status_code}")
            try:
                content = resp.json()["choices"][0]["message"]["content"]
                parsed = json.loads(content)
                score = float(parsed["score"])
                rationale = str(parsed.get("rationale", ""))
            except (KeyError, IndexError, ValueError, TypeError) as exc:
                raise ValidationFailure(f"unparseable model output: {exc}") from exc
            if not 0.0 <= score <= 1.0:
                raise ValidationFailure(f"model score {score} outside [0, 1]")
            return score, rationale
        raise ValidationFailure(last_error)


def validate(
    flag: FlaggedInstance,
    q: QueryRecord,
    r: ResultRecord,
    cfg: ValidatorConfig,
    client: HttpLlmClient | None = None,
) -> ValidationReport:
    """Score one flag on every configured task and aggregate per the weights.

    Raises ValidationFailure if the backend cannot produce a score; never
    fabricates one.
    """
    if flag.query_id != q.query_id or flag.result_id != r.result_id:
        raise ValueError("flag does not reference the given query/result pair")
    task_scores: dict[str, float] = {}
    weights: dict[str, float] = {}
    rationales: list[str] = []
    for task in cfg.tasks:
        if cfg.backend is Backend.MOCK:
            score = _mock_task_score(flag, q, r, task.name)
            rationale = ""
        else:
            if client is None:
                raise ValidationFailure("no HTTP client configured")
            score, rationale = client.score_task(task, q, r)
        task_scores[task.name] = score
        weights[task.name] = task.weight
        if rationale:
            rationales.append(f"{task.name}: {rationale}")
    aggregate = sum(weights[t] * task_scores[t] for t in weights)
    return ValidationReport(
        flag_id=flag.flag_id,
        task_scores=task_scores,
        weights=weights,
        aggregate_v=aggregate,
        source=ValidationSource.MOCK if cfg.backend is Backend.MOCK else ValidationSource.LLM,
        rationale="\n".join(rationales) or None,
    )


def validate_batch(
    items: list[tuple[FlaggedInstance, QueryRecord, ResultRecord]],
    cfg: ValidatorConfig,
    client: HttpLlmClient | None = None,
) -> tuple[list[ValidationReport], list[PendingValidation]]:
    """Validate flags in input order; failures are isolated per flag."""
    owns_client = False
    if cfg.backend is Backend.HTTP_LLM and client is None:
        client = HttpLlmClient(cfg)
        owns_client = True
    reports: list[ValidationReport] = []
    failures: list[PendingValidation] = []
    try:
        for flag, q, r in items:
            try:
                reports.append(validate(flag, q, r, cfg, client=client))
            except ValidationFailure as exc:
                failures.append(PendingValidation(flag_id=flag.flag_id, error=str(exc)))
    finally:
        if owns_client and client is not None:
            client.close()
    return reports, failures
