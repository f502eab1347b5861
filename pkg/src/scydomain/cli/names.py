from typing import Any

from scydomain import exceptions

__all__ = ["Names"]


class Names:
    """Parsed argument values of one command.

    Values are reachable as attributes or items under the argument's key,
    ``--out-dir`` becoming ``out_dir``. Assignments are checked against the
    type each key was declared with.
    """

    def __init__(self, command: str = "") -> None:
        """Initialize an empty namespace for a command."""
        self.command = command
        self._values: dict[str, Any] = {}
        self._types: dict[str, type] = {}

    def __getattr__(self, key: str) -> Any:
        """Return the value of an argument.

        Raises:
            AttributeError: If the argument was neither given nor defaulted.
        """
        try:
            return self._values[key]
        except KeyError as e:
            raise AttributeError(f"No such argument: {key}") from e

    def __getitem__(self, key: str) -> Any:
        """Return the value of an argument.

        Raises:
            KeyError: If the argument was neither given nor defaulted.
        """  # noqa: DOC502
        return self._values[key]

    def __setitem__(self, key: str, value: Any) -> None:
        """Store a value.

        Raises:
            ArgumentTypeError: If the value does not have the declared type.
        """
        expected = self._types.get(key)
        if expected is not None and value is not None:
            if not isinstance(value, expected):
                raise exceptions.ArgumentTypeError(
                    value,
                    expected,
                    f"Expected {key} to be {expected.__name__}, "
                    f"got {type(value).__name__}",
                )
        self._values[key] = value

    def __contains__(self, key: object) -> bool:
        """Whether a value is stored under a key."""
        return key in self._values

    def __repr__(self) -> str:
        """Return the command and its values."""
        return f"<Names {self.command} {self._values}>"

    def get(self, key: str, default: Any = None) -> Any:
        """Return a value, or ``default`` when it is absent."""
        return self._values.get(key, default)

    def declare(self, key: str, typ: Any) -> None:
        """Record the type values under ``key`` must have.

        Conversion callables that are not classes, such as ``Path`` factory
        functions, declare nothing.
        """
        if isinstance(typ, type):
            self._types[key] = typ
