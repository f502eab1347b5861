import json

import pytest

from scydomain import exceptions
from scydomain.eventlog import EventLog, read_log


@pytest.fixture
def log() -> EventLog:
    log = EventLog()
    log.append("genesis", 0, accounts={"v1": b"\x01" * 32})
    log.append("commit", 1_000, height=1, digest=b"\x02" * 32)
    log.append("end", 2_000, height=1)
    return log


def lines(path) -> list[dict]:
    return [json.loads(line) for line in path.read_bytes().splitlines()]


def rewrite(path, records) -> None:
    path.write_text(
        "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)
    )


class TestEventLog:
    def test_records_are_numbered_and_chained(self, log):
        assert [r["seq"] for r in log.records] == [0, 1, 2]
        assert log.records[1]["digest"] == "0x" + "02" * 32
        chains = {r["chain"] for r in log.records}
        assert len(chains) == 3

    def test_of_type(self, log):
        assert [r["height"] for r in log.of_type("commit")] == [1]

    def test_written_log_reads_back(self, log, tmp_path):
        path = log.write(tmp_path / "nested" / "events.jsonl")
        assert read_log(path) == log.records

    def test_same_events_same_bytes(self, log):
        again = EventLog()
        again.append("genesis", 0, accounts={"v1": b"\x01" * 32})
        again.append("commit", 1_000, height=1, digest=b"\x02" * 32)
        again.append("end", 2_000, height=1)
        assert again.to_bytes() == log.to_bytes()


class TestTampering:
    def test_edited_field(self, log, tmp_path):
        path = log.write(tmp_path / "events.jsonl")
        records = lines(path)
        records[1]["height"] = 2
        rewrite(path, records)
        with pytest.raises(exceptions.InvariantViolation) as info:
            read_log(path)
        assert info.value.invariant == "log-chain"

    def test_reordered(self, log, tmp_path):
        path = log.write(tmp_path / "events.jsonl")
        records = lines(path)
        rewrite(path, [records[0], records[2], records[1]])
        with pytest.raises(exceptions.InvariantViolation):
            read_log(path)

    def test_garbage_line(self, log, tmp_path):
        path = log.write(tmp_path / "events.jsonl")
        with path.open("ab") as f:
            f.write(b"not json\n")
        with pytest.raises(exceptions.InvariantViolation) as info:
            read_log(path)
        assert info.value.invariant == "log-format"

    def test_truncation_keeps_a_valid_prefix(self, log, tmp_path):
        path = log.write(tmp_path / "events.jsonl")
        rewrite(path, lines(path)[:2])
        assert len(read_log(path)) == 2
