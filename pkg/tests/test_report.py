import pytest

from scydomain import exceptions
from scydomain.eventlog import EventLog, read_log
from scydomain.report import build_report, inspect, render_report, verify_log


@pytest.fixture
def records(happy_log) -> list[dict]:
    return read_log(happy_log)


class TestBuildReport:
    def test_summary(self, happy_run, happy_log):
        report = build_report(happy_run.log.records, happy_log)
        assert report.scenario == "happy_realtime"
        assert report.clean
        assert report.height == happy_run.nodes["v1"].state.height
        assert report.log_path == str(happy_log)
        assert report.ledger["conserved"]
        assert report.ledger["total_supply"] == 7_000

    def test_tournament_summary(self, records):
        report = build_report(records)
        (tournament,) = report.tournaments
        assert tournament.phase == "resolved"
        assert len(tournament.ranking) == 3
        assert sorted(amount for _, amount in tournament.payments) == [
            100,
            200,
            300,
        ]
        assert {name for name, _ in tournament.payments} == {"m1", "m2", "m3"}

    def test_render(self, records):
        text = render_report(build_report(records))
        assert text.startswith("Scenario happy_realtime")
        assert "All invariants held" in text

    def test_missing_end(self, records):
        with pytest.raises(exceptions.InvariantViolation):
            build_report(records[:-1])


class TestVerifyLog:
    def test_clean_log(self, happy_log):
        assert verify_log(happy_log) == []

    def test_flipped_byte(self, happy_log, tmp_path):
        data = bytearray(happy_log.read_bytes())
        position = data.index(b'"height":') + len(b'"height":')
        data[position] = ord("9") if data[position] != ord("9") else ord("8")
        path = tmp_path / "flipped.jsonl"
        path.write_bytes(bytes(data))
        with pytest.raises(exceptions.InvariantViolation):
            verify_log(path)

    def test_truncated(self, happy_log, tmp_path):
        path = tmp_path / "truncated.jsonl"
        lines = happy_log.read_bytes().splitlines(keepends=True)
        path.write_bytes(b"".join(lines[:-1]))
        with pytest.raises(exceptions.InvariantViolation):
            verify_log(path)

    def test_logged_violation_is_reported(self, records, tmp_path):
        log = EventLog()
        for record in records:
            if record["type"] == "end":
                log.append(
                    "violation",
                    record["time"],
                    invariant="replication",
                    detail="forged",
                )
            fields = {
                k: v
                for k, v in record.items()
                if k not in ("seq", "time", "type", "chain")
            }
            log.append(record["type"], record["time"], **fields)
        found = verify_log(log.write(tmp_path / "events.jsonl"))
        assert [v.invariant for v in found] == ["replication"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            verify_log(tmp_path / "missing.jsonl")


class TestInspect:
    def test_balances(self, records):
        answer = inspect(records, "balances")
        assert "v1: 0 (staked 1000)" in answer.splitlines()

    def test_balances_show_conserved_totals(self, records):
        lines = inspect(records, "balances").splitlines()
        assert lines[-1] == "total supply: 7000 (held 7000, conserved)"
        assert any(line.startswith("reward pool: ") for line in lines)
        assert any(line.startswith("next reward pool: ") for line in lines)

    def test_ordinal_on_plain_query(self, records):
        with pytest.raises(exceptions.ArgumentTypeError):
            inspect(records, "balances 2")

    def test_tournament(self, records):
        answer = inspect(records, "tournament 0")
        assert answer.splitlines()[0].endswith(": resolved")

    def test_no_disqualifications(self, records):
        assert inspect(records, "disqualifications") == ""

    def test_unknown_tournament(self, records):
        with pytest.raises(exceptions.UnknownTarget):
            inspect(records, "tournament 99")

    def test_malformed_tournament(self, records):
        with pytest.raises(exceptions.ArgumentTypeError):
            inspect(records, "tournament first")

    def test_unknown_query(self, records):
        with pytest.raises(exceptions.InvalidChoiceError):
            inspect(records, "weather")
