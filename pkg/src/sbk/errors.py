"""Exception types shared across the package.

The CLI maps these onto its exit codes (usage 1, input format 2,
invariant violation 3).
"""


class UsageError(ValueError):
    """Invalid argument: bad vertex id, out-of-range parameter, etc."""


class InputFormatError(ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class InvariantError(RuntimeError):
    """An internal invariant was violated (a bug, or a corrupted input graph)."""
