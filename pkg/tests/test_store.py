import json

import pytest

from modguard.models import (
    FlaggedInstance,
    FlagScores,
    FlagStatus,
    StatusTransitionError,
    ValidationReport,
    ValidationSource,
)
from modguard.store import (
    DataStore,
    EpochNotFoundError,
    FlagNotFoundError,
    IntegrityError,
    JsonlAppender,
    VerdictRecord,
    ingest_human_verdict,
)

from conftest import make_state


def make_flag(i=0, epoch=0, status=FlagStatus.PENDING):
    return FlaggedInstance(
        flag_id=f"f{i}",
        query_id=f"q{i}",
        result_id=f"r{i}",
        epoch=epoch,
        scores=FlagScores(similarity=0.5, g_query=0.0, g_result=0.7, g_metadata=0.0),
        matched_lexicons={"RESULT": ("l1",)},
        status=status,
    )


def make_report(flag_id="f0", v=0.5):
    return ValidationReport(
        flag_id=flag_id,
        task_scores={"t": v},
        weights={"t": 1.0},
        aggregate_v=v,
        source=ValidationSource.MOCK,
    )


def write_epoch(store, epoch=0, flags=None, reports=None):
    store.write_snapshot(
        epoch=epoch,
        state=make_state({"l1": ("badword", 1, 1)}, epoch=epoch),
        flags=flags if flags is not None else [make_flag(epoch * 10, epoch=epoch)],
        reports=reports or [],
        verdicts=[],
        summary={"epoch": epoch, "verdict_cursor": 0},
    )


class TestJsonlAppender:
    def test_idempotent_append(self, tmp_path):
        a = JsonlAppender(tmp_path / "x.jsonl", "id")
        assert a.append({"id": "1", "v": 2}) is True
        assert a.append({"id": "1", "v": 2}) is False
        with open(tmp_path / "x.jsonl") as fh:
            assert len(fh.readlines()) == 1

    def test_idempotency_survives_reopen(self, tmp_path):
        JsonlAppender(tmp_path / "x.jsonl", "id").append({"id": "1"})
        b = JsonlAppender(tmp_path / "x.jsonl", "id")
        assert b.append({"id": "1"}) is False

    def test_many_appends_ordered(self, tmp_path):
        a = JsonlAppender(tmp_path / "x.jsonl", "id")
        for i in range(1000):
            a.append({"id": str(i)})
        with open(tmp_path / "x.jsonl") as fh:
            lines = fh.readlines()
        assert len(lines) == 1000
        assert json.loads(lines[0])["id"] == "0"
        assert json.loads(lines[-1])["id"] == "999"
        assert all(line.endswith("\n") for line in lines)


class TestSnapshots:
    def test_round_trip(self, tmp_path):
        store = DataStore(tmp_path)
        flags = [make_flag(1), make_flag(2)]
        reports = [make_report("f1", 0.3)]
        store.write_snapshot(
            epoch=0,
            state=make_state({"l1": ("badword", 2, 3)}, alpha=0.6),
            flags=flags,
            reports=reports,
            verdicts=[],
            summary={"verdict_cursor": 0},
        )
        data = store.load_epoch(0)
        assert data.flags == flags
        assert data.reports == reports
        assert data.state.alpha == 0.6
        assert data.state.entries["l1"].f_t == 3

    def test_missing_epoch(self, tmp_path):
        store = DataStore(tmp_path)
        with pytest.raises(EpochNotFoundError):
            store.load_epoch(7)

    def test_corrupted_state_detected(self, tmp_path):
        store = DataStore(tmp_path)
        write_epoch(store, 0)
        state_file = store.epoch_dir(0) / "state.json"
        state_file.write_text(state_file.read_text().replace('"alpha":0.5', '"alpha":0.9'))
        with pytest.raises(IntegrityError) as exc:
            store.load_epoch(0)
        assert "state.json" in str(exc.value)

    def test_no_partial_snapshot_on_failure(self, tmp_path):
        store = DataStore(tmp_path)
        flags = [make_flag(1)]
        bad_reports = [object()]  # will blow up during serialization
        with pytest.raises(AttributeError):
            store.write_snapshot(
                epoch=0,
                state=make_state({"l1": ("a", 1, 1)}),
                flags=flags,
                reports=bad_reports,  # type: ignore[arg-type]
                verdicts=[],
                summary={},
            )
        assert not store.epoch_dir(0).exists()
        assert store.latest_epoch() is None

    def test_epoch_listing(self, tmp_path):
        store = DataStore(tmp_path)
        for e in (0, 1, 2):
            write_epoch(store, e)
        assert store.list_epochs() == [0, 1, 2]
        assert store.latest_epoch() == 2

    def test_duplicate_epoch_rejected(self, tmp_path):
        store = DataStore(tmp_path)
        write_epoch(store, 0)
        with pytest.raises(FileExistsError):
            write_epoch(store, 0)


class TestVerdicts:
    def test_ingest_updates_status(self, tmp_path):
        store = DataStore(tmp_path)
        write_epoch(store, 0, flags=[make_flag(1, status=FlagStatus.VALIDATED_FP)])
        updated = ingest_human_verdict(store, "f1", FlagStatus.HUMAN_TP, "rev-1", "t0")
        assert updated.status is FlagStatus.HUMAN_TP
        assert store.find_flag("f1").status is FlagStatus.HUMAN_TP

    def test_pending_flag_accepts_verdict(self, tmp_path):
        store = DataStore(tmp_path)
        write_epoch(store, 0, flags=[make_flag(1)])
        assert ingest_human_verdict(store, "f1", FlagStatus.HUMAN_FP, "r", "t").status is FlagStatus.HUMAN_FP

    def test_unknown_flag(self, tmp_path):
        store = DataStore(tmp_path)
        write_epoch(store, 0)
        with pytest.raises(FlagNotFoundError):
            ingest_human_verdict(store, "nope", FlagStatus.HUMAN_FP, "r", "t")

    def test_superseding_verdict_latest_wins(self, tmp_path):
        store = DataStore(tmp_path)
        write_epoch(store, 0, flags=[make_flag(1)])
        ingest_human_verdict(store, "f1", FlagStatus.HUMAN_FP, "r", "t1")
        ingest_human_verdict(store, "f1", FlagStatus.HUMAN_TP, "r", "t2")
        assert store.find_flag("f1").status is FlagStatus.HUMAN_TP
        assert len(store.read_verdicts()) == 2

    def test_verdict_record_must_be_human(self):
        with pytest.raises(ValueError):
            VerdictRecord(flag_id="f", verdict=FlagStatus.VALIDATED_TP, reviewer_id="r", timestamp="t")

    def test_verdict_cursor_reads(self, tmp_path):
        store = DataStore(tmp_path)
        write_epoch(store, 0, flags=[make_flag(1), make_flag(2)])
        ingest_human_verdict(store, "f1", FlagStatus.HUMAN_FP, "r", "t1")
        ingest_human_verdict(store, "f2", FlagStatus.HUMAN_TP, "r", "t2")
        assert len(store.read_verdicts(0)) == 2
        assert [v.flag_id for v in store.read_verdicts(1)] == ["f2"]
        assert store.verdict_count() == 2
