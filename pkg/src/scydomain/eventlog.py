"""Append-only, hash-chained event log of a simulated run.

One canonical JSON record per line. Every record carries ``chain``, the
digest of the previous record's chain value and the record's own
canonical bytes, so an edited, reordered or truncated log is detected.
"""

import json
import logging
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from scydomain import exceptions
from scydomain.crypto import canonical_bytes, digest, to_canonical

__all__ = ["GENESIS_CHAIN", "EventLog", "read_log"]

logger = logging.getLogger(__name__)

GENESIS_CHAIN = b"\x00" * 32


class EventLog:
    """Ordered records of everything observable in a run."""

    def __init__(self) -> None:
        """Initialize an empty log."""
        self.records: list[dict[str, Any]] = []
        self._chain = GENESIS_CHAIN

    def append(self, type: str, time: int, **fields: Any) -> dict[str, Any]:
        """Append a record.

        Args:
            type (str): Record type, such as ``"apply"`` or ``"mark"``.
            time (int): Simulated time of the event.
            **fields (Any): Record content; converted to canonical form.

        Returns:
            dict[str, Any]: The stored record, chain value included.
        """
        body = to_canonical({
            "seq": len(self.records),
            "time": time,
            "type": type,
            **fields,
        })
        self._chain = digest(self._chain + canonical_bytes(body))
        record = {**body, "chain": "0x" + self._chain.hex()}
        self.records.append(record)
        return record

    def of_type(self, type: str) -> list[dict[str, Any]]:
        """Every record of one type, in log order."""
        return [r for r in self.records if r["type"] == type]

    def to_bytes(self) -> bytes:
        """The log as newline-terminated canonical JSON lines."""
        return b"".join(canonical_bytes(r) + b"\n" for r in self.records)

    def write(self, path: str | Path) -> Path:
        """Write the log to a file, creating parent folders."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        logger.info("Wrote %d log records to %s", len(self.records), path)
        return path


def _check_chain(records: Iterable[dict[str, Any]]) -> None:
    chain = GENESIS_CHAIN
    for i, record in enumerate(records):
        body = {k: v for k, v in record.items() if k != "chain"}
        if body.get("seq") != i:
            raise exceptions.InvariantViolation(
                "log-chain", f"record {i} is out of sequence"
            )
        chain = digest(chain + canonical_bytes(body))
        if record.get("chain") != "0x" + chain.hex():
            raise exceptions.InvariantViolation(
                "log-chain", f"record {i} does not match the hash chain"
            )


def read_log(path: str | Path) -> list[dict[str, Any]]:
    """Read a log file and check its hash chain.

    Raises:
        InvariantViolation: If a line does not parse or the chain breaks.
        OSError: If the file cannot be read.
    """
    records = []
    for number, line in enumerate(Path(path).read_bytes().splitlines(), 1):
        try:
            record = json.loads(line)
        except ValueError as e:
            raise exceptions.InvariantViolation(
                "log-format", f"line {number} is not JSON"
            ) from e
        if not isinstance(record, dict):
            raise exceptions.InvariantViolation(
                "log-format", f"line {number} is not a record"
            )
        records.append(record)
    _check_chain(records)
    return records
