"""Exception hierarchy shared by every module."""


class CsiidError(Exception):
    """Base class for all library errors."""


class ParseError(CsiidError, ValueError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphError(CsiidError, ValueError):
    """Structurally invalid graph (cycle, duplicate vertex, dangling edge)."""


class UnknownVariableError(CsiidError, KeyError):
    """A referenced variable does not exist."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown variable"


class PreconditionError(CsiidError, ValueError):
    """An operation was called with arguments violating its contract."""


class LabelError(CsiidError, ValueError):
    """Label set inconsistent with its graph or control variables."""


class InternalConsistencyError(CsiidError, AssertionError):
    """Two routes that must agree did not. Always indicates a bug."""


class EvaluationError(CsiidError, ArithmeticError):
    """Estimand evaluation hit a zero-mass conditioning event."""


class SizingError(CsiidError, MemoryError):
    """A dense probability table would exceed the configured cell cap."""
