from __future__ import annotations


class TopicModelError(Exception):
    """Base class for failures surfaced to the CLI with a dedicated exit code."""

    exit_code = 1


class UsageError(TopicModelError):
    exit_code = 1


class DataError(TopicModelError, ValueError):
    exit_code = 2

    def __init__(self, message: str, path: str = "", line: int | None = None) -> None:
        location = path
        if line is not None:
            location = f"{path}:{line}" if path else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.line = line


class NumericalError(TopicModelError, ArithmeticError):
    exit_code = 3

    def __init__(self, message: str, term: str = "") -> None:
        super().__init__(f"{term}: {message}" if term else message)
        self.term = term
