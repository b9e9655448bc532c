import json
import random

import httpx
import pytest

from modguard.models import FlaggedInstance, FlagScores, FlagStatus, ValidationReport, ValidationSource
from modguard.validator import (
    MOCK_VIOLATION_MARKER,
    Backend,
    HttpLlmClient,
    PendingValidation,
    ValidationFailure,
    ValidationTask,
    ValidatorConfig,
    default_tasks,
    validate,
    validate_batch,
    verdict_for,
)

from conftest import make_query, make_result


def make_flag(query_id="q1", result_id="r1"):
    return FlaggedInstance(
        flag_id=f"flag-{query_id}-{result_id}",
        query_id=query_id,
        result_id=result_id,
        epoch=0,
        scores=FlagScores(similarity=0.5, g_query=0.0, g_result=0.0, g_metadata=0.8),
        matched_lexicons={"METADATA": ("l1",)},
    )


def make_pair(violation: bool, query_id="q1", result_id="r1"):
    description = f"something {MOCK_VIOLATION_MARKER}" if violation else "benign description"
    result = make_result(result_id, "church songs special", 1, description=description)
    q = make_query(query_id, "church songs", [result])
    return make_flag(query_id, result_id), q, result


class TestMockBackend:
    cfg = ValidatorConfig()

    def test_planted_violation_scores_near_zero(self):
        flag, q, r = make_pair(violation=True)
        report = validate(flag, q, r, self.cfg)
        assert all(s <= 0.15 for s in report.task_scores.values())
        assert report.aggregate_v < 0.5
        assert verdict_for(report.aggregate_v) is FlagStatus.VALIDATED_TP
        assert report.source is ValidationSource.MOCK

    def test_benign_scores_near_one(self):
        flag, q, r = make_pair(violation=False)
        report = validate(flag, q, r, self.cfg)
        assert all(s >= 0.85 for s in report.task_scores.values())
        assert verdict_for(report.aggregate_v) is FlagStatus.VALIDATED_FP

    def test_deterministic(self):
        flag, q, r = make_pair(violation=True)
        a = validate(flag, q, r, self.cfg)
        b = validate(flag, q, r, self.cfg)
        assert a == b

    def test_mismatched_pair_rejected(self):
        flag, q, r = make_pair(violation=False)
        other = make_query("other", "x", [r])
        with pytest.raises(ValueError):
            validate(flag, other, r, self.cfg)


class TestAggregation:
    def test_uniform_weights_all_ones(self):
        report = ValidationReport(
            flag_id="f",
            task_scores={t.name: 1.0 for t in default_tasks()},
            weights={t.name: t.weight for t in default_tasks()},
            aggregate_v=1.0,
            source=ValidationSource.MOCK,
        )
        assert report.aggregate_v == 1.0
        assert verdict_for(report.aggregate_v) is FlagStatus.VALIDATED_FP

    def test_hand_evaluated_two_tasks_tie(self):
        # weights {0.5, 0.5}, scores {0.2, 0.8} -> 0.5, tie releases as FP
        v = 0.5 * 0.2 + 0.5 * 0.8
        assert v == pytest.approx(0.5)
        assert verdict_for(v) is FlagStatus.VALIDATED_FP

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ValidationReport(
                flag_id="f",
                task_scores={"a": 0.5},
                weights={"a": 0.6},
                aggregate_v=0.3,
                source=ValidationSource.MOCK,
            )

    def test_task_name_sets_must_match(self):
        with pytest.raises(ValueError):
            ValidationReport(
                flag_id="f",
                task_scores={"a": 0.5},
                weights={"b": 1.0},
                aggregate_v=0.5,
                source=ValidationSource.MOCK,
            )

    def test_range_and_permutation_invariance(self):
        rng = random.Random(42)
        for _ in range(200):
            names = [f"t{i}" for i in range(rng.randint(1, 6))]
            raw = [rng.random() for _ in names]
            total = sum(raw)
            weights = {n: w / total for n, w in zip(names, raw)}
            scores = {n: rng.random() for n in names}
            v = sum(weights[n] * scores[n] for n in names)
            assert 0.0 <= v <= 1.0
            shuffled = list(names)
            rng.shuffle(shuffled)
            v2 = sum(weights[n] * scores[n] for n in shuffled)
            assert v2 == pytest.approx(v, abs=1e-12)


def _chat_response(score: float, rationale: str = "because") -> dict:
    content = json.dumps({"score": score, "rationale": rationale})
    return {"choices": [{"message": {"content": content}}]}


def http_cfg(**kw) -> ValidatorConfig:
    defaults = dict(
        backend=Backend.HTTP_LLM,
        endpoint="http://llm.test/v1/chat/completions",
        model_name="test-model",
        max_retries=1,
        backoff_base=0.0,
    )
    defaults.update(kw)
    return ValidatorConfig(**defaults)


class TestHttpBackend:
    def test_scores_parsed_from_chat_response(self):
        cfg = http_cfg()

        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, json=_chat_response(0.25))

        client = HttpLlmClient(cfg, transport=httpx.MockTransport(handler))
        flag, q, r = make_pair(violation=False)
        report = validate(flag, q, r, cfg, client=client)
        assert all(s == 0.25 for s in report.task_scores.values())
        assert report.aggregate_v == pytest.approx(0.25)
        assert report.source is ValidationSource.LLM
        assert "because" in (report.rationale or "")

    def test_retry_then_success(self):
        cfg = http_cfg(max_retries=2)
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(503)
            return httpx.Response(200, json=_chat_response(0.9))

        client = HttpLlmClient(cfg, transport=httpx.MockTransport(handler))
        task = cfg.tasks[0]
        _, q, r = make_pair(violation=False)
        score, _ = client.score_task(task, q, r)
        assert score == 0.9
        assert calls["n"] == 2

    def test_persistent_5xx_fails_without_fabricating(self):
        cfg = http_cfg()

        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(500)

        client = HttpLlmClient(cfg, transport=httpx.MockTransport(handler))
        flag, q, r = make_pair(violation=False)
        with pytest.raises(ValidationFailure):
            validate(flag, q, r, cfg, client=client)

    def test_unparseable_output_fails(self):
        cfg = http_cfg()

        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, json={"choices": [{"message": {"content": "not json"}}]})

        client = HttpLlmClient(cfg, transport=httpx.MockTransport(handler))
        flag, q, r = make_pair(violation=False)
        with pytest.raises(ValidationFailure):
            validate(flag, q, r, cfg, client=client)

    def test_requires_endpoint_and_model(self):
        with pytest.raises(ValueError):
            ValidatorConfig(backend=Backend.HTTP_LLM)


class TestValidateBatch:
    def test_empty(self):
        reports, failures = validate_batch([], ValidatorConfig())
        assert reports == [] and failures == []

    def test_partial_http_failure_isolated(self):
        cfg = http_cfg()
        pairs = []
        for i in range(3):
            result = make_result(f"r{i}", "church songs special", 1, description="benign")
            q = make_query(f"q{i}", f"distinct query {i}", [result])
            pairs.append((make_flag(f"q{i}", f"r{i}"), q, result))

        def handler(request: httpx.Request) -> httpx.Response:
            body = json.loads(request.content)
            if "distinct query 1" in body["messages"][0]["content"]:
                return httpx.Response(500)
            return httpx.Response(200, json=_chat_response(0.7))

        client = HttpLlmClient(cfg, transport=httpx.MockTransport(handler))
        reports, failures = validate_batch(pairs, cfg, client=client)
        assert len(reports) == 2
        assert len(failures) == 1
        assert isinstance(failures[0], PendingValidation)
        assert failures[0].flag_id == "flag-q1-r1"

    def test_fixture_split_matches_labels(self):
        pairs = [make_pair(i % 2 == 0, f"q{i}", f"r{i}") for i in range(10)]
        reports, failures = validate_batch(pairs, ValidatorConfig())
        assert not failures
        for (flag, _, _), report in zip(pairs, reports):
            expected = FlagStatus.VALIDATED_TP if int(flag.query_id[1:]) % 2 == 0 else FlagStatus.VALIDATED_FP
            assert verdict_for(report.aggregate_v) is expected
            assert report.flag_id == flag.flag_id

    def test_preserves_input_order(self):
        pairs = [make_pair(False, f"q{i}", f"r{i}") for i in range(5)]
        reports, _ = validate_batch(pairs, ValidatorConfig())
        assert [r.flag_id for r in reports] == [p[0].flag_id for p in pairs]


class TestTaskConfig:
    def test_default_tasks_cover_all_judgment_axes(self):
        names = {t.name for t in default_tasks()}
        assert names == {"query_irrelevancy", "age_estimation", "policy_violation", "cot_judgment"}
        assert sum(t.weight for t in default_tasks()) == pytest.approx(1.0, abs=1e-9)

    def test_nonuniform_weights_must_normalize(self):
        with pytest.raises(ValueError):
            ValidatorConfig(tasks=(ValidationTask("a", 0.5), ValidationTask("b", 0.4)))
