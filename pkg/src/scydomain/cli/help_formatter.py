from typing import TYPE_CHECKING

from scydomain.cli.argument import Argument

if TYPE_CHECKING:
    from scydomain.cli.parser import Command, CommandParser

__all__ = ["HelpFormatter"]


class HelpFormatter:
    """Builds help text for a parser and its commands."""

    def __init__(self, parser: "CommandParser", indent_size: int = 4) -> None:
        """Initialize the help formatter.

        Args:
            parser (CommandParser): The parser to describe.
            indent_size (int, optional): Spaces per indentation level.
                Defaults to 4.
        """
        self.parser = parser
        self.indent_size = indent_size

    def format_help(self) -> str:
        """Program usage followed by a line per command.

        Returns:
            str: The formatted help text.
        """
        lines = [f"Usage: {self.parser.prog} <COMMAND> [ARGS]", ""]
        if self.parser.help:
            lines.extend([self.parser.help, ""])
        lines.append("Commands:")
        indent = " " * self.indent_size
        for command in self.parser.commands:
            lines.append(self._columns(indent, command.name, command.help))
        return "\n".join(lines)

    def format_command_help(self, command: "Command") -> str:
        """Usage line and argument descriptions of one command.

        Returns:
            str: The formatted help text.
        """
        lines = [self._format_usage(command), ""]
        if command.help:
            lines.extend([command.help, ""])
        indent = " " * self.indent_size
        for arg in command.arguments:
            lines.append(
                self._columns(indent, self._signature(arg), self._help(arg))
            )
        return "\n".join(lines)

    def _format_usage(self, command: "Command") -> str:
        parts = [f"Usage: {self.parser.prog} {command.name}"]
        parts.extend(self._usage(arg) for arg in command.arguments)
        return " ".join(parts)

    def _usage(self, arg: Argument) -> str:
        if arg.positional:
            name = f"<{arg.name.upper()}>"
            return name if arg.required else f"[{name}]"
        shown = f"{arg.name} {arg.descriptor}" if arg.descriptor else arg.name
        return shown if arg.required else f"[{shown}]"

    def _signature(self, arg: Argument) -> str:
        if arg.positional:
            return arg.name.upper()
        parts = [arg.alias, arg.name] if arg.alias else [arg.name]
        signature = ", ".join(parts)
        if arg.descriptor:
            signature = f"{signature} {arg.descriptor}"
        return signature

    def _help(self, arg: Argument) -> str | None:
        text = arg.help or ""
        if arg.choices:
            text = f"{text} {{{', '.join(map(str, arg.choices))}}}"
        if arg.default not in (None, False):
            text = f"{text} (default: {arg.default})"
        return text.strip() or None

    @staticmethod
    def _columns(indent: str, signature: str, help: str | None) -> str:
        if not help:
            return f"{indent}{signature}"
        padding = max(30 - len(signature), 1)
        return f"{indent}{signature}{' ' * padding}{help}"
