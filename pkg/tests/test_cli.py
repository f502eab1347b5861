import pytest

from scydomain import exceptions
from scydomain.cli import build_parser, main
from scydomain.cli.argument import Argument
from scydomain.cli.help_formatter import HelpFormatter
from scydomain.cli.names import Names
from scydomain.cli.parser import CommandParser


def noop(args: Names) -> int:
    return 0


@pytest.fixture
def command():
    parser = CommandParser("prog")
    command = parser.add_command("go", noop, "Go somewhere")
    command.add_argument("target", required=True)
    command.add_argument("--out", alias="o", default="out", descriptor="DIR")
    command.add_argument("--count", type=int)
    command.add_argument("--mode", choices=["fast", "slow"])
    command.add_argument("--pair", type=int, num_args=2)
    command.add_argument("--verbose", alias="v", num_args=0)
    return command


class TestArgument:
    def test_defaults(self):
        arg = Argument("--foo", type=int)
        assert arg.alias is None
        assert arg.help is None
        assert arg.num_args == (1, 1)
        assert not arg.required
        assert arg.key == "foo"

    def test_alias_gets_a_dash(self):
        assert Argument("--foo", type=str, alias="f").alias == "-f"
        assert Argument("--foo", type=str, alias="-f").alias == "-f"

    def test_alias_must_be_a_letter(self):
        with pytest.raises(ValueError):
            Argument("--foo", type=str, alias="fo")

    def test_positional_alias(self):
        with pytest.raises(ValueError):
            Argument("foo", type=str, alias="f")

    def test_required_with_default(self):
        with pytest.raises(ValueError):
            Argument("--foo", type=str, required=True, default="x")

    def test_positional_flag(self):
        with pytest.raises(ValueError):
            Argument("foo", type=str, num_args=0)

    def test_bad_num_args(self):
        with pytest.raises(ValueError):
            Argument("--foo", type=str, num_args="*")

    def test_dashes_in_key(self):
        assert Argument("--out-dir", type=str).key == "out_dir"

    def test_stored_value_types(self):
        assert Argument("--go", type=str, num_args=0).value_type is bool
        assert Argument("--pair", type=int, num_args=2).value_type is list
        assert Argument("--count", type=int).value_type is int


class TestNames:
    def test_attribute_and_item_access(self):
        names = Names("go")
        names["out"] = "dir"
        assert names.out == names["out"] == "dir"
        assert "out" in names
        assert names.get("count", 3) == 3

    def test_missing_attribute(self):
        with pytest.raises(AttributeError):
            Names().missing  # noqa: B018

    def test_declared_type_is_enforced(self):
        names = Names()
        names.declare("count", int)
        with pytest.raises(exceptions.ArgumentTypeError):
            names["count"] = "three"

    def test_factories_declare_nothing(self):
        names = Names()
        names.declare("workers", lambda raw: int(raw))
        names["workers"] = "anything"
        assert names.workers == "anything"


class TestCommand:
    def test_defaults_fill_absent_arguments(self, command):
        names = command.parse(["home"])
        assert names.target == "home"
        assert names.out == "out"
        assert names.count is None
        assert names.verbose is False

    def test_values_convert(self, command):
        names = command.parse(
            ["home", "-o", "dir", "--count", "3", "--pair", "1", "-2", "-v"]
        )
        assert names.out == "dir"
        assert names.count == 3
        assert names.pair == [1, -2]
        assert names.verbose is True

    def test_missing_required(self, command):
        with pytest.raises(exceptions.MissingRequiredArgumentError):
            command.parse(["--count", "3"])

    def test_unknown_flag(self, command):
        with pytest.raises(exceptions.UnknownArgumentError):
            command.parse(["home", "--colour", "red"])

    def test_repeated_flag(self, command):
        with pytest.raises(exceptions.UnknownArgumentError):
            command.parse(["home", "--out", "a", "-o", "b"])

    def test_extra_positional(self, command):
        with pytest.raises(exceptions.UnknownArgumentError):
            command.parse(["home", "away"])

    def test_flag_without_value(self, command):
        with pytest.raises(exceptions.TooFewArgumentsError):
            command.parse(["home", "--count"])

    def test_too_few_values(self, command):
        with pytest.raises(exceptions.TooFewArgumentsError):
            command.parse(["home", "--pair", "1"])

    def test_bad_type(self, command):
        with pytest.raises(exceptions.ArgumentTypeError):
            command.parse(["home", "--count", "three"])

    def test_bad_choice(self, command):
        with pytest.raises(exceptions.InvalidChoiceError):
            command.parse(["home", "--mode", "medium"])

    def test_duplicate_argument(self, command):
        with pytest.raises(ValueError):
            command.add_argument("--out")


class TestCommandParser:
    def test_selects_command(self):
        parser = build_parser()
        command, names = parser.parse(["verify", "events.jsonl"])
        assert command.name == "verify"
        assert names.log == "events.jsonl"

    def test_no_command(self):
        with pytest.raises(exceptions.MissingRequiredArgumentError):
            build_parser().parse([])

    def test_unknown_command(self):
        with pytest.raises(exceptions.UnknownCommandError):
            build_parser().parse(["fly"])

    def test_duplicate_command(self):
        with pytest.raises(ValueError):
            build_parser().add_command("run", noop)

    def test_negative_workers(self):
        with pytest.raises(exceptions.ArgumentTypeError):
            build_parser().parse(["run", "spam", "--workers", "-1"])

    def test_run_switches_are_booleans(self):
        _, names = build_parser().parse(["run", "spam"])
        assert names.verbose is False
        _, names = build_parser().parse(["run", "spam", "-v", "--seed", "4"])
        assert names.verbose is True
        assert names.seed == 4

    def test_inspect_query_choices(self):
        args = ["inspect", "log", "-q", "tournament", "0"]
        _, names = build_parser().parse(args)
        assert (names.query, names.n) == ("tournament", 0)
        with pytest.raises(exceptions.InvalidChoiceError):
            build_parser().parse(["inspect", "log", "-q", "weather"])


class TestHelpFormatter:
    def test_program_help_lists_commands(self):
        text = HelpFormatter(build_parser()).format_help()
        assert text.startswith("Usage: scydomain <COMMAND> [ARGS]")
        for name in ("run", "verify", "inspect", "list"):
            assert f"    {name}" in text

    def test_command_help(self, command):
        text = HelpFormatter(CommandParser("prog")).format_command_help(
            command
        )
        assert text.splitlines()[0].startswith("Usage: prog go <TARGET>")
        assert "-o, --out DIR" in text
        assert "(default: out)" in text
        assert "{fast, slow}" in text


class TestMain:
    def test_no_arguments_prints_help(self, capsys):
        assert main([]) == 2
        assert "Usage: scydomain" in capsys.readouterr().out

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert main(["run", "-h"]) == 0
        assert "Usage: scydomain run" in capsys.readouterr().out

    def test_usage_error(self, capsys):
        assert main(["fly"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_scenario(self, tmp_path):
        assert main(["run", str(tmp_path / "missing.toml")]) == 2

    def test_list(self, capsys):
        assert main(["list"]) == 0
        assert "happy_realtime" in capsys.readouterr().out.splitlines()

    def test_run_then_verify(self, tmp_path, capsys):
        out = tmp_path / "run"
        args = ["run", "happy_realtime", "-o", str(out), "--workers", "2"]
        assert main(args) == 0
        assert (out / "report.json").is_file()
        assert "All invariants held" in capsys.readouterr().out
        assert main(["verify", str(out / "events.jsonl")]) == 0

    def test_verify_damaged_log(self, happy_log, tmp_path, capsys):
        damaged = tmp_path / "events.jsonl"
        data = happy_log.read_bytes().replace(b'"seq":3,', b'"seq":4,')
        damaged.write_bytes(data)
        assert main(["verify", str(damaged)]) == 1
        assert "log-chain" in capsys.readouterr().err

    def test_verify_missing_log(self, tmp_path):
        assert main(["verify", str(tmp_path / "missing.jsonl")]) == 2

    def test_inspect(self, happy_log, capsys):
        assert main(["inspect", str(happy_log), "-q", "balances"]) == 0
        assert "m1:" in capsys.readouterr().out

    def test_inspect_unknown_query(self, happy_log):
        assert main(["inspect", str(happy_log), "--query", "weather"]) == 2

    def test_inspect_tournament(self, happy_log, capsys):
        assert main(["inspect", str(happy_log), "-q", "tournament", "0"]) == 0
        assert capsys.readouterr().out.splitlines()[0].endswith(": resolved")

    def test_inspect_tournament_needs_ordinal(self, happy_log):
        assert main(["inspect", str(happy_log), "-q", "tournament"]) == 2
