"""Summaries, offline verification and queries over run logs."""

import dataclasses
import logging
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path
from typing import Any

import pydantic

from scydomain import exceptions, ledger
from scydomain.crypto import hex_bytes
from scydomain.eventlog import read_log
from scydomain.scenario import ScenarioScript
from scydomain.sim_net import build_genesis, truth_stream
from scydomain.state_machine import Block, transition

__all__ = [
    "QUERIES",
    "RunReport",
    "TournamentSummary",
    "build_report",
    "inspect",
    "render_report",
    "verify_log",
]

logger = logging.getLogger(__name__)

QUERIES = ["balances", "disqualifications", "tournament"]

Record = dict[str, Any]


@dataclasses.dataclass(frozen=True)
class TournamentSummary:
    """How one tournament ended."""

    index: int
    phase: str
    ranking: list[tuple[str, str]]
    payments: list[tuple[str, int]]


@dataclasses.dataclass(frozen=True)
class RunReport:
    """What a run produced, assembled from its event log.

    Attributes:
        scenario (str): Scenario name.
        scenario_digest (str): Digest of the scenario script.
        height (int): Height of the final chain.
        tournaments (list[TournamentSummary]): Closed tournaments in
            index order.
        disqualifications (list[dict[str, Any]]): Every mark, in order.
        rejections (dict[str, int]): Refused transactions per error code.
        ledger (dict[str, Any]): Final ledger summary.
        violations (list[str]): Broken invariants, empty for a clean run.
        log_path (str | None): Where the log was written.
    """

    scenario: str
    scenario_digest: str
    height: int
    tournaments: list[TournamentSummary]
    disqualifications: list[dict[str, Any]]
    rejections: dict[str, int]
    ledger: dict[str, Any]
    violations: list[str]
    log_path: str | None = None

    @property
    def clean(self) -> bool:
        """Whether the run broke no invariant."""
        return not self.violations


def _first(records: Sequence[Record], type: str) -> Record:
    for record in records:
        if record["type"] == type:
            return record
    raise exceptions.InvariantViolation("log-format", f"no {type} record")


def _names(records: Sequence[Record]) -> dict[str, str]:
    accounts = _first(records, "genesis")["accounts"]
    return {account: name for name, account in accounts.items()}


def _score(raw: Any) -> str:
    return str(Fraction(*raw))


def build_report(
    records: Sequence[Record], log_path: str | Path | None = None
) -> RunReport:
    """Summarize a run from its event log records.

    Raises:
        InvariantViolation: If the log lacks its scenario, genesis or end
            record.
    """
    names = _names(records)
    scenario = _first(records, "scenario")
    end = _first(records, "end")
    tournaments = [
        TournamentSummary(
            index=r["index"],
            phase=r["phase"],
            ranking=[(e["uuid"], _score(e["score"])) for e in r["ranking"]],
            payments=[(names.get(a, a), amount) for a, amount in r["payments"]],
        )
        for r in records
        if r["type"] == "tournament"
    ]
    marks = [
        {
            "tournament": r["tournament"],
            "node": names.get(r["account"], r["account"]),
            "reason": r["reason"],
            "challenger": r["challenger"],
        }
        for r in records
        if r["type"] == "mark"
    ]
    rejections: dict[str, int] = {}
    for r in records:
        if r["type"] == "reject":
            rejections[r["code"]] = rejections.get(r["code"], 0) + 1
    return RunReport(
        scenario=scenario["name"],
        scenario_digest=scenario["digest"],
        height=end["height"],
        tournaments=sorted(tournaments, key=lambda t: t.index),
        disqualifications=marks,
        rejections=dict(sorted(rejections.items())),
        ledger=end["ledger"],
        violations=[
            f"{r['invariant']}: {r['detail']}"
            for r in records
            if r["type"] == "violation"
        ],
        log_path=None if log_path is None else str(log_path),
    )


def render_report(report: RunReport) -> str:
    """Human-readable summary of a run."""
    lines = [
        f"Scenario {report.scenario} ({report.scenario_digest[:18]})",
        f"Final height: {report.height}",
    ]
    for t in report.tournaments:
        lines.append(f"Tournament {t.index}: {t.phase}")
        for rank, (uuid, score) in enumerate(t.ranking, 1):
            lines.append(f"  {rank}. {uuid} score {score}")
        for name, amount in t.payments:
            lines.append(f"  paid {name}: {amount}")
    for mark in report.disqualifications:
        role = "challenger" if mark["challenger"] else "miner"
        lines.append(
            f"Disqualified {role} {mark['node']} in tournament "
            f"{mark['tournament']}: {mark['reason']}"
        )
    for code, count in report.rejections.items():
        lines.append(f"Rejected {count} x {code}")
    if report.violations:
        lines.extend(f"VIOLATION {v}" for v in report.violations)
    else:
        lines.append("All invariants held")
    if report.log_path:
        lines.append(f"Log: {report.log_path}")
    return "\n".join(lines)


def _replay(
    records: Sequence[Record],
) -> list[exceptions.InvariantViolation]:
    """Rebuild the chain from genesis and compare against the log."""
    found: list[exceptions.InvariantViolation] = []
    scenario = _first(records, "scenario")
    try:
        script = ScenarioScript.model_validate(scenario["script"])
    except pydantic.ValidationError as e:
        raise exceptions.InvariantViolation(
            "log-format", "scenario record does not parse"
        ) from e
    state, _ = build_genesis(script)
    if _first(records, "genesis")["state"] != "0x" + state.digest().hex():
        found.append(
            exceptions.InvariantViolation(
                "replication", "genesis state does not match the scenario"
            )
        )
        return found
    honest = {node.name for node in script.nodes if node.honest}
    truth = truth_stream(script)
    blobs = {
        hex_bytes(r["ref"]): hex_bytes(r["data"])
        for r in records
        if r["type"] == "blob"
    }
    proposals = {
        r["digest"]: r["block"] for r in records if r["type"] == "propose"
    }
    applied: dict[int, set[str]] = {}
    for r in records:
        if r["type"] == "apply" and r["node"] in honest:
            applied.setdefault(r["height"], set()).add(r["state"])
    for commit in (r for r in records if r["type"] == "commit"):
        wire = proposals.get(commit["digest"])
        if wire is None:
            found.append(
                exceptions.InvariantViolation(
                    "log-format", f"block {commit['height']} was never proposed"
                )
            )
            return found
        try:
            state, _ = transition(
                state, Block.from_wire(hex_bytes(wire)), truth, blobs
            )
        except (exceptions.BlockRejected, exceptions.WireFormatError) as e:
            found.append(exceptions.InvariantViolation("replication", str(e)))
            return found
        if not ledger.is_conserved(state.ledger):
            found.append(
                exceptions.InvariantViolation(
                    "conservation", f"tokens leak at height {state.height}"
                )
            )
        replayed = "0x" + state.digest().hex()
        if applied.get(state.height, {replayed}) != {replayed}:
            found.append(
                exceptions.InvariantViolation(
                    "replication",
                    f"honest nodes disagree with replay at {state.height}",
                )
            )
    end = _first(records, "end")
    final = "0x" + state.digest().hex()
    for name, value in end["digests"].items():
        if name in honest and value != final:
            found.append(
                exceptions.InvariantViolation(
                    "replication", f"{name} ended on a different state"
                )
            )
    cfg = state.config
    overdue = [
        index
        for index, t in sorted(state.tournaments.items())
        if t.begun
        and not t.phase.closed
        and cfg.tournament_window(index)[1] + cfg.proposer_deadline
        < state.clock
    ]
    if overdue:
        found.append(
            exceptions.InvariantViolation(
                "completeness", f"tournaments {overdue} never resolved"
            )
        )
    return found


def verify_log(path: str | Path) -> list[exceptions.InvariantViolation]:
    """Check a run log offline.

    The hash chain is checked first. The chain of committed blocks is then
    replayed from the genesis the scenario record describes, and every
    state digest the honest nodes logged must match the replay. Tokens
    must be conserved after every block and every tournament past its
    proposer deadline must be closed.

    Args:
        path (str | Path): The log file.

    Returns:
        list[InvariantViolation]: Everything found wrong, including
            violations the run itself recorded. Empty for a clean log.

    Raises:
        InvariantViolation: If the log is malformed or its chain broken.
        OSError: If the file cannot be read.
    """
    records = read_log(path)
    found = [
        exceptions.InvariantViolation(r["invariant"], r["detail"])
        for r in records
        if r["type"] == "violation"
    ]
    found += _replay(records)
    logger.info("Verified %s: %d problems", path, len(found))
    return found


def _tournament(records: Sequence[Record], ordinal: int) -> list[str]:
    end = _first(records, "end")
    indexes = sorted(int(i) for i in end["tournaments"])
    if not 0 <= ordinal < len(indexes):
        raise exceptions.UnknownTarget(f"tournament {ordinal}")
    index = indexes[ordinal]
    names = _names(records)
    lines = [f"tournament {index}: {end['tournaments'][str(index)]}"]
    for r in records:
        if r["type"] == "tournament" and r["index"] == index:
            for rank, entry in enumerate(r["ranking"], 1):
                lines.append(
                    f"  {rank}. {entry['uuid']} {_score(entry['score'])}"
                )
            for account, amount in r["payments"]:
                lines.append(f"  {names.get(account, account)} +{amount}")
        elif r["type"] == "mark" and r["tournament"] == index:
            lines.append(
                f"  disqualified {names.get(r['account'], r['account'])}: "
                f"{r['reason']}"
            )
    return lines


def _balances(summary: Record) -> list[str]:
    stakes = summary["stakes"]
    lines = [
        f"{name}: {amount} (staked {stakes.get(name, 0)})"
        for name, amount in sorted(summary["balances"].items())
    ]
    locked = summary["locked_pools"]
    lines.append(f"reward pool: {summary['current_reward_pool']}")
    lines.append(f"next reward pool: {summary['next_reward_pool']}")
    lines.extend(
        f"locked pool {index}: {locked[index]}"
        for index in sorted(locked, key=int)
    )
    held = (
        sum(summary["balances"].values())
        + sum(stakes.values())
        + summary["current_reward_pool"]
        + summary["next_reward_pool"]
        + sum(locked.values())
    )
    conserved = held == summary["total_supply"] and summary["conserved"]
    lines.append(
        f"total supply: {summary['total_supply']} "
        f"(held {held}, {'conserved' if conserved else 'NOT conserved'})"
    )
    return lines


def inspect(records: Sequence[Record], query: str) -> str:
    """Answer a query about a run log.

    Queries are ``balances``, ``disqualifications`` and ``tournament N``
    where N counts tournaments begun during the run from zero.

    Raises:
        InvalidChoiceError: If the query is not recognized.
        ArgumentTypeError: If the ordinal is missing, malformed or given
            to a query that takes none.
        UnknownTarget: If the tournament does not exist.
    """
    words = query.split()
    if not words or words[0] not in QUERIES:
        raise exceptions.InvalidChoiceError("query", query, QUERIES)
    if words[0] == "tournament":
        if len(words) != 2 or not words[1].isdigit():
            raise exceptions.ArgumentTypeError(
                query, int, "expected 'tournament N'"
            )
        return "\n".join(_tournament(records, int(words[1])))
    if len(words) != 1:
        raise exceptions.ArgumentTypeError(
            query, str, f"'{words[0]}' takes no ordinal"
        )
    if words[0] == "balances":
        return "\n".join(_balances(_first(records, "end")["ledger"]))
    names = _names(records)
    return "\n".join(
        f"tournament {r['tournament']}: "
        f"{names.get(r['account'], r['account'])} "
        f"{'challenger' if r['challenger'] else 'miner'} {r['reason']}"
        for r in records
        if r["type"] == "mark"
    )
