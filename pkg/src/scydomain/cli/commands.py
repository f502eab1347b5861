"""The ``run``, ``verify``, ``inspect`` and ``list`` commands."""

import logging
import sys
from pathlib import Path

from scydomain import exceptions
from scydomain.cli.names import Names
from scydomain.crypto import canonical_bytes
from scydomain.eventlog import read_log
from scydomain.report import build_report, inspect, render_report, verify_log
from scydomain.scenario import bundled_scenarios, resolve_scenario
from scydomain.sim_net import run_scenario

__all__ = [
    "EXIT_CLEAN",
    "EXIT_USAGE",
    "EXIT_VIOLATION",
    "cmd_inspect",
    "cmd_list",
    "cmd_run",
    "cmd_verify",
]

logger = logging.getLogger(__name__)

EXIT_CLEAN = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

LOG_NAME = "events.jsonl"
REPORT_NAME = "report.json"


def cmd_run(args: Names) -> int:
    """Simulate a scenario and write its event log and report.

    Returns:
        int: 0 if every invariant held, 1 otherwise.

    Raises:
        ScenarioError: If the scenario does not load.
        UnknownTarget: If a fault or action names a missing node.
    """  # noqa: DOC502
    script = resolve_scenario(args.scenario)
    if args.seed is not None:
        script = script.model_copy(update={"seed": args.seed})
    result = run_scenario(script, workers=args.workers, strict=False)
    out = Path(args.out)
    log_path = result.log.write(out / LOG_NAME)
    report = build_report(result.log.records, log_path)
    (out / REPORT_NAME).write_bytes(canonical_bytes(report) + b"\n")
    print(render_report(report))
    return EXIT_CLEAN if report.clean else EXIT_VIOLATION


def cmd_verify(args: Names) -> int:
    """Check a run log offline.

    Returns:
        int: 0 for a clean log, 1 naming the first problem otherwise.
    """
    try:
        found = verify_log(args.log)
    except exceptions.InvariantViolation as e:
        found = [e]
    if found:
        for violation in found:
            print(violation, file=sys.stderr)
        return EXIT_VIOLATION
    print(f"{args.log}: ok")
    return EXIT_CLEAN


def cmd_inspect(args: Names) -> int:
    """Print the answer to a query about a run log.

    Returns:
        int: 0 on success, 1 if the log is damaged.

    Raises:
        InvalidChoiceError: If the query is unknown.
        ArgumentTypeError: If the query and its ordinal do not fit.
        UnknownTarget: If the queried tournament does not exist.
    """  # noqa: DOC502
    query = args.query if args.n is None else f"{args.query} {args.n}"
    try:
        records = read_log(args.log)
        answer = inspect(records, query)
    except exceptions.InvariantViolation as e:
        print(e, file=sys.stderr)
        return EXIT_VIOLATION
    print(answer)
    return EXIT_CLEAN


def cmd_list(args: Names) -> int:
    """Print the names of the bundled scenarios.

    Returns:
        int: Always 0.
    """
    for name in bundled_scenarios():
        print(name)
    return EXIT_CLEAN
