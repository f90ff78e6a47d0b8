"""Exception hierarchy shared across the package.

``ValidationError`` covers bad inputs and broken container invariants,
``StabilityError`` covers numerical aborts inside a solver run, and
``ConfigError`` covers problems in config files.  The CLI maps the first and
last to exit code 2 and ``StabilityError`` (plus I/O failures) to exit code 3.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition or container invariant."""


class ConvexityError(ValidationError):
    """A Lorenz curve's discrete second differences dipped below tolerance."""

    def __init__(self, message: str, node: int | None = None, value: float | None = None):
        super().__init__(message)
        self.node = node
        self.value = value


class StabilityError(RuntimeError):
    """A solver run left its stable regime and refuses to continue."""


class ConfigError(ValueError):
    """A config file failed to parse or validate; message carries location."""
