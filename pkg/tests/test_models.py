import json

import pytest

from modguard.models import (
    DuplicateQueryIdError,
    FlaggedInstance,
    FlagScores,
    FlagStatus,
    QueryRecord,
    StatusTransitionError,
    ingest_query_log,
    normalize_text,
    validate_record,
)

from conftest import make_query, make_result


def sample_line(query_id="q1", n_results=8):
    return {
        "query_id": query_id,
        "text": "church songs",
        "timestamp": "2026-01-01T00:00:00Z",
        "results": [
            {
                "result_id": f"r{i}",
                "title": f"title {i}",
                "rank": i + 1,
                "metadata": {"age_rating": "tv-pg", "genre": ["music"], "description": "d"},
            }
            for i in range(n_results)
        ],
    }


class TestNormalize:
    def test_nfkc_lower_collapse(self):
        assert normalize_text("  Ｃhurch\t SONGS ") == "church songs"

    def test_idempotent(self):
        s = normalize_text("Some  TEXT here")
        assert normalize_text(s) == s


class TestIngest:
    def test_truncates_to_k(self, log_file):
        path = log_file([sample_line(f"q{i}") for i in range(3)])
        result = ingest_query_log(path, k=5)
        assert len(result.records) == 3
        assert all(len(r.results) == 5 for r in result.records)
        # retained results are the k smallest ranks
        assert [r.rank for r in result.records[0].results] == [1, 2, 3, 4, 5]

    def test_empty_file(self, log_file):
        path = log_file([])
        result = ingest_query_log(path, k=5)
        assert result.records == []
        assert result.errors == []

    def test_malformed_line_recorded_with_line_number(self, log_file):
        path = log_file([sample_line("q1"), '{"query_id": "q2", "text":'])
        result = ingest_query_log(path, k=5)
        assert len(result.records) == 1
        assert len(result.errors) == 1
        assert result.errors[0].line_number == 2

    def test_duplicate_query_id_fatal(self, log_file):
        path = log_file([sample_line("q1"), sample_line("q1")])
        with pytest.raises(DuplicateQueryIdError):
            ingest_query_log(path, k=5)

    def test_unreadable_file_fatal(self, tmp_path):
        with pytest.raises(OSError):
            ingest_query_log(tmp_path / "missing.jsonl", k=5)

    def test_round_trip(self, log_file):
        line = sample_line("q1", n_results=2)
        record = QueryRecord.from_dict(line)
        assert QueryRecord.from_dict(record.to_dict()) == record


class TestValidateRecord:
    def test_well_formed_ok(self):
        record = make_query("q1", "church songs", [make_result("r1", "t", 1)])
        assert validate_record(record) == []

    def test_non_strict_ranks(self):
        record = make_query(
            "q1", "x", [make_result("r1", "t", 1), make_result("r2", "t", 1), make_result("r3", "t", 2)]
        )
        assert "non-strict-ranks" in validate_record(record)

    def test_empty_query(self):
        record = make_query("q1", "   ", [])
        assert "empty-query" in validate_record(record)


class TestFlagLifecycle:
    def make_flag(self, status=FlagStatus.PENDING):
        return FlaggedInstance(
            flag_id="f1",
            query_id="q1",
            result_id="r1",
            epoch=0,
            scores=FlagScores(similarity=0.5, g_query=0.0, g_result=0.7, g_metadata=0.0),
            matched_lexicons={"RESULT": ("lex-1",)},
            status=status,
        )

    def test_pending_to_validated_to_human(self):
        flag = self.make_flag()
        flag = flag.with_status(FlagStatus.VALIDATED_TP)
        flag = flag.with_status(FlagStatus.HUMAN_FP)
        assert flag.status is FlagStatus.HUMAN_FP

    def test_human_cannot_revert_to_validated(self):
        flag = self.make_flag(FlagStatus.HUMAN_TP)
        with pytest.raises(StatusTransitionError):
            flag.with_status(FlagStatus.VALIDATED_FP)

    def test_nothing_reverts_to_pending(self):
        flag = self.make_flag(FlagStatus.VALIDATED_TP)
        with pytest.raises(StatusTransitionError):
            flag.with_status(FlagStatus.PENDING)

    def test_serialization_round_trip(self):
        flag = self.make_flag(FlagStatus.VALIDATED_FP)
        assert FlaggedInstance.from_dict(json.loads(json.dumps(flag.to_dict()))) == flag
