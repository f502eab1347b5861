from abc import ABC
from collections.abc import Callable, Sequence
from typing import Any

__all__ = ["Argument", "Option"]


class Option(ABC):
    """Base class for anything a command line names: commands and arguments."""

    def __init__(
        self,
        name: str,
        *,
        alias: str | None = None,
        help: str | None = None,
        required: bool = False,
    ) -> None:
        """Initialize the option.

        Args:
            name (str): Name as typed on the command line. Names starting
                with ``--`` are flags, anything else is positional.
            alias (str | None, optional): Single letter short form of a flag.
                Defaults to None.
            help (str | None, optional): Help text. Defaults to None.
            required (bool, optional): Whether it must be given.
                Defaults to False.

        Raises:
            ValueError: If the alias is not a single letter or is given for
                a positional name.
        """
        self.name = name
        self.alias = alias
        self.help = help
        self.required = required
        self._validate_alias()

    def _validate_alias(self) -> None:
        if self.alias is None:
            return
        if not self.name.startswith("--"):
            raise ValueError(f"positional '{self.name}' cannot have an alias")
        letter = self.alias.removeprefix("-")
        if len(letter) != 1 or not letter.isalpha():
            raise ValueError(f"alias '{self.alias}' must be a single letter")
        self.alias = f"-{letter}"

    @property
    def positional(self) -> bool:
        """Whether the option is matched by position instead of by name."""
        return not self.name.startswith("--")

    @property
    def key(self) -> str:
        """Name under which the parsed value is stored."""
        return self.name.removeprefix("--").replace("-", "_")


class Argument(Option):
    """A single command-line argument and its conversion rules."""

    def __init__(
        self,
        name: str,
        *,
        type: Callable[[str], Any],
        alias: str | None = None,
        help: str | None = None,
        default: Any = None,
        descriptor: str | None = None,
        num_args: int | None = None,
        required: bool = False,
        choices: Sequence[Any] | None = None,
    ) -> None:
        """Initialize the argument.

        Args:
            name (str): Name of the argument.
            type (Callable[[str], Any]): Converts a raw token.
            alias (str | None, optional): Short form of a flag.
                Defaults to None.
            help (str | None, optional): Help text. Defaults to None.
            default (Any, optional): Value when the argument is absent.
                Defaults to None.
            descriptor (str | None, optional): Placeholder shown in usage
                lines, such as ``DIR``. Defaults to None.
            num_args (int | None, optional): ``0`` for a flag that takes
                no value, an integer for exactly that many values, None
                for one.
                Defaults to None.
            required (bool, optional): Whether the argument must be given.
                Defaults to False.
            choices (Sequence[Any] | None, optional): Allowed converted
                values. Defaults to None.

        Raises:
            ValueError: If the definition contradicts itself.
        """
        super().__init__(name, alias=alias, help=help, required=required)
        self.type = type
        self.default = default
        self.descriptor = descriptor
        self.choices = list(choices) if choices is not None else None
        if num_args is None:
            self.num_args = (1, 1)
        elif isinstance(num_args, int) and num_args >= 0:
            self.num_args = (num_args, num_args)
        else:
            raise ValueError(f"invalid num_args {num_args!r}")
        if self.required and self.default is not None:
            raise ValueError("cannot specify both required and a default")
        if self.is_flag and self.positional:
            raise ValueError(f"positional '{name}' must take a value")

    @property
    def is_flag(self) -> bool:
        """Whether the argument is a switch that takes no value."""
        return self.num_args == (0, 0)

    @property
    def value_type(self) -> Any:
        """Type the stored value must have.

        Flags store ``bool`` and arguments taking several values store a
        ``list``. Anything else stores what ``type`` returns.
        """
        if self.is_flag:
            return bool
        if self.num_args[1] > 1:
            return list
        return self.type

    @property
    def type_name(self) -> str:
        """Readable name of the conversion type."""
        return getattr(self.type, "__name__", str(self.type))
