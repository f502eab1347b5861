"""Command-line entry point of the domain simulator."""

import logging
import sys

from scydomain import exceptions
from scydomain.cli.commands import (
    EXIT_CLEAN,
    EXIT_USAGE,
    cmd_inspect,
    cmd_list,
    cmd_run,
    cmd_verify,
)
from scydomain.cli.help_formatter import HelpFormatter
from scydomain.cli.names import Names
from scydomain.cli.parser import HELP_TOKENS, Command, CommandParser
from scydomain.report import QUERIES

__all__ = ["Command", "CommandParser", "Names", "build_parser", "main"]


def _workers(raw: str) -> int:
    value = int(raw)
    if value < 0:
        raise ValueError("workers cannot be negative")
    return value


def build_parser() -> CommandParser:
    """The parser of the ``scydomain`` console script."""
    parser = CommandParser(
        "scydomain", "Simulate, verify and inspect domain blockchain runs."
    )
    run = parser.add_command("run", cmd_run, "Run a scenario")
    run.add_argument(
        "scenario", required=True, help="Bundled scenario name or TOML path"
    )
    run.add_argument(
        "--out",
        alias="o",
        default="out",
        descriptor="DIR",
        help="Folder for the event log and report",
    )
    run.add_argument(
        "--seed", type=int, descriptor="N", help="Override the scenario seed"
    )
    run.add_argument(
        "--workers",
        type=_workers,
        descriptor="N",
        help="Threads used to validate proposals",
    )
    run.add_argument("--verbose", alias="v", num_args=0, help="Log progress")

    verify = parser.add_command("verify", cmd_verify, "Check a run log")
    verify.add_argument("log", required=True, help="Event log to replay")

    inspect = parser.add_command("inspect", cmd_inspect, "Query a run log")
    inspect.add_argument("log", required=True, help="Event log to query")
    inspect.add_argument(
        "--query",
        alias="q",
        required=True,
        descriptor="QUERY",
        choices=QUERIES,
        help="What to print",
    )
    inspect.add_argument(
        "n", type=int, help="Tournament ordinal for the tournament query"
    )

    parser.add_command("list", cmd_list, "List bundled scenarios")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run the console script.

    Args:
        argv (list[str] | None, optional): Arguments without the program
            name. Defaults to None, meaning ``sys.argv[1:]``.

    Returns:
        int: 0 clean, 1 invariant violation, 2 usage or scenario error.
    """
    args = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    formatter = HelpFormatter(parser)
    if not args or args[0] in (*HELP_TOKENS, "help"):
        print(formatter.format_help())
        return EXIT_CLEAN if args else EXIT_USAGE
    try:
        if any(token in HELP_TOKENS for token in args[1:]):
            print(formatter.format_command_help(parser.command(args[0])))
            return EXIT_CLEAN
        command, names = parser.parse(args)
        logging.basicConfig(
            level=logging.INFO if names.get("verbose") else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return command.handler(names)
    except (
        exceptions.UsageError,
        exceptions.ScenarioError,
        exceptions.UnknownTarget,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e.strerror}: {e.filename}", file=sys.stderr)
        return EXIT_USAGE
