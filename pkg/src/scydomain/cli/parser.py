"""Typed command parser for the ``scydomain`` console script."""

from collections.abc import Callable, Sequence
from typing import Any

from indexed_dict import IndexedDict

from scydomain import exceptions
from scydomain.cli.argument import Argument, Option
from scydomain.cli.names import Names

__all__ = ["Command", "CommandParser", "HELP_TOKENS"]

HELP_TOKENS = ("-h", "--help")

Handler = Callable[[Names], int]


class Command(Option):
    """A sub-command, its arguments and the function that runs it."""

    def __init__(
        self, name: str, handler: Handler, help: str | None = None
    ) -> None:
        """Initialize a command.

        Args:
            name (str): Word that selects the command.
            handler (Handler): Runs the command; returns the exit code.
            help (str | None, optional): One line summary. Defaults to None.
        """
        super().__init__(name, help=help)
        self.handler = handler
        self.arguments: list[Argument] = []

    def add_argument(
        self,
        name: str,
        *,
        type: Callable[[str], Any] = str,
        alias: str | None = None,
        help: str | None = None,
        default: Any = None,
        descriptor: str | None = None,
        num_args: int | None = None,
        required: bool = False,
        choices: Sequence[Any] | None = None,
    ) -> Argument:
        """Add an argument to the command.

        Args:
            name (str): ``--name`` for a flag, a bare name for a positional.
            type (Callable[[str], Any], optional): Converts raw tokens.
                Defaults to str.
            alias (str | None, optional): Single letter short form.
                Defaults to None.
            help (str | None, optional): Help text. Defaults to None.
            default (Any, optional): Value when absent. Defaults to None.
            descriptor (str | None, optional): Usage placeholder.
                Defaults to None.
            num_args (int | None, optional): How many values
                the argument takes. Defaults to None, exactly one.
            required (bool, optional): Whether it must be given.
                Defaults to False.
            choices (Sequence[Any] | None, optional): Allowed values.
                Defaults to None.

        Returns:
            Argument: The new argument.

        Raises:
            ValueError: If the name is already taken.

        Example:
            >>> parser = CommandParser("scydomain")
            >>> run = parser.add_command("run", handler, "Run a scenario")
            >>> run.add_argument("scenario", required=True)
            >>> run.add_argument("--seed", type=int, descriptor="N")
        """
        taken = {a.name for a in self.arguments} | {
            a.alias for a in self.arguments if a.alias
        }
        if name in taken or (alias is not None and alias in taken):
            raise ValueError(f"'{name}' is already defined for {self.name}")
        arg = Argument(
            name,
            type=type,
            alias=alias,
            help=help,
            default=default,
            descriptor=descriptor,
            num_args=num_args,
            required=required,
            choices=choices,
        )
        self.arguments.append(arg)
        return arg

    def _lookup(self) -> tuple[IndexedDict, IndexedDict]:
        flags: IndexedDict[str, Argument] = IndexedDict()
        positionals: IndexedDict[str, Argument] = IndexedDict()
        for arg in self.arguments:
            if arg.positional:
                positionals[arg.name] = arg
                continue
            flags[arg.name] = arg
            if arg.alias:
                flags[arg.alias] = arg
        return flags, positionals

    def parse(self, tokens: list[str]) -> Names:
        """Parse the tokens following the command word.

        Each flag may be given once; positionals are filled in order.

        Returns:
            Names: Converted values, with defaults for absent arguments.

        Raises:
            UnknownArgumentError: If a flag is unknown or repeated, or there
                are more positional values than positionals.
            TooFewArgumentsError: If a flag lacks its values.
            ArgumentTypeError: If a value does not convert.
            InvalidChoiceError: If a value is not an allowed choice.
            MissingRequiredArgumentError: If a required argument is absent.
        """  # noqa: DOC502
        names = Names(self.name)
        flags, positionals = self._lookup()
        remaining = sum(1 for a in self.arguments if a.positional)
        i = 0
        while i < len(tokens):
            token = tokens[i]
            i += 1
            if _is_flag(token):
                if token not in flags:
                    raise exceptions.UnknownArgumentError(token)
                arg = flags[token]
                for spelling in (arg.name, arg.alias):
                    if spelling is not None and spelling in flags:
                        flags.pop(spelling)
                values, i = _collect(arg, tokens, i)
            else:
                if remaining == 0:
                    raise exceptions.UnknownArgumentError(token)
                arg = positionals[positionals.get_key_from_index(0)]
                positionals.pop_from_index(0)
                remaining -= 1
                values = [token]
            names.declare(arg.key, arg.value_type)
            names[arg.key] = _convert(arg, values)
        for arg in self.arguments:
            if arg.key in names:
                continue
            if arg.required:
                raise exceptions.MissingRequiredArgumentError(arg.name)
            names.declare(arg.key, arg.value_type)
            names[arg.key] = False if arg.is_flag else arg.default
        return names


def _is_flag(token: str) -> bool:
    return token.startswith("-") and not token.lstrip("-").isdigit()


def _collect(arg: Argument, tokens: list[str], i: int) -> tuple[list[str], int]:
    low, high = arg.num_args
    values: list[str] = []
    while i < len(tokens) and len(values) < high and not _is_flag(tokens[i]):
        values.append(tokens[i])
        i += 1
    if len(values) < low:
        raise exceptions.TooFewArgumentsError(arg.name, low, len(values))
    return values, i


def _convert(arg: Argument, values: list[str]) -> Any:
    if arg.is_flag:
        return True
    converted = []
    for raw in values:
        try:
            converted.append(arg.type(raw))
        except (TypeError, ValueError) as e:
            raise exceptions.ArgumentTypeError(
                raw,
                arg.type if isinstance(arg.type, type) else str,
                f"Invalid value for {arg.name}: '{raw}' is not "
                f"{arg.type_name}",
            ) from e
    if arg.choices is not None:
        for value in converted:
            if value not in arg.choices:
                raise exceptions.InvalidChoiceError(
                    arg.name, value, arg.choices
                )
    if arg.num_args == (1, 1):
        return converted[0]
    return converted


class CommandParser:
    """Parser for a program made of sub-commands.

    Example:
        >>> parser = CommandParser("scydomain", "Domain simulator")
        >>> verify = parser.add_command("verify", handler, "Check a log")
        >>> verify.add_argument("log", required=True)
        >>> command, args = parser.parse(["verify", "events.jsonl"])
        >>> args.log
        'events.jsonl'
    """

    def __init__(self, prog: str, help: str | None = None) -> None:
        """Initialize a parser with no commands.

        Args:
            prog (str): Program name shown in usage lines.
            help (str | None, optional): Program description.
                Defaults to None.
        """
        self.prog = prog
        self.help = help
        self._commands: IndexedDict[str, Command] = IndexedDict()
        self.commands: list[Command] = []

    def add_command(
        self, name: str, handler: Handler, help: str | None = None
    ) -> Command:
        """Register a sub-command.

        Raises:
            ValueError: If the command already exists.
        """
        if name in self._commands:
            raise ValueError(f"command '{name}' already exists")
        command = Command(name, handler, help)
        self._commands[name] = command
        self.commands.append(command)
        return command

    def command(self, name: str) -> Command:
        """Look up a command by name.

        Raises:
            UnknownCommandError: If no command has that name.
        """
        if name not in self._commands:
            raise exceptions.UnknownCommandError(
                name, [c.name for c in self.commands]
            )
        return self._commands[name]

    def parse(self, args: list[str]) -> tuple[Command, Names]:
        """Select the command named by the first token and parse the rest.

        Raises:
            MissingRequiredArgumentError: If no command is given.
            UnknownCommandError: If the command is unknown.
        """  # noqa: DOC502
        if not args:
            raise exceptions.MissingRequiredArgumentError("command")
        command = self.command(args[0])
        return command, command.parse(args[1:])
