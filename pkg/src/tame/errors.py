"""Exception taxonomy shared across the engine, runner, service and CLI.

Exit-code mapping used by the CLI: InputError (and subclasses) -> 2,
any other TameError or unexpected failure -> 1.
"""


class TameError(Exception):
    """Base class for all engine errors."""


class ShapeError(TameError):
    """Array shapes or dimensions do not match an operation's contract."""


class UsageError(TameError):
    """An API was called out of contract (e.g. backward on a spent trace)."""


class InputError(TameError):
    """Bad configuration, spec, or operation preconditions."""


class IngestionError(InputError):
    """A dataset or container file is missing, truncated or malformed."""
