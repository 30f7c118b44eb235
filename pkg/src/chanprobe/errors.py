"""Exceptions shared across the package.

Module-local failure modes (numerical degeneracy, out-of-order rounds) live
next to the code that raises them; these are the ones the CLI and service map
to exit codes / HTTP statuses.
"""


class ConfigError(ValueError):
    """A run or sweep was configured inconsistently (CLI exit code 2)."""


class TraceParseError(ValueError):
    """A trace CSV file is malformed (CLI exit code 3).

    ``line`` is the 1-based line number of the offending row, or None when
    the problem is file-level (e.g. a missing cell).
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
