"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations


class ZeroMLError(Exception):
    """Base class for all errors raised by zeroml."""


class LexError(ZeroMLError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class ParseError(ZeroMLError):
    def __init__(self, line: int, col: int, expected: str, found: str):
        super().__init__(f"{line}:{col}: expected {expected}, found {found}")
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found

    @property
    def message(self) -> str:
        return f"expected {self.expected}, found {self.found}"


class SemError(ZeroMLError):
    """One static diagnostic. ``code`` is one of the E_* constants in semantics."""

    def __init__(self, code: str, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {code} {message}")
        self.code = code
        self.line = line
        self.col = col
        self.message = message


class SemanticErrors(ZeroMLError):
    """Raised by ``check`` carrying every diagnostic found, in source order."""

    def __init__(self, errors: list[SemError]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = errors


class ExecutionError(ZeroMLError):
    """A runtime failure inside the VM, tagged with the source line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


# Data and model pipeline failures. The VM wraps these into ExecutionError.

class CsvError(ZeroMLError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class CleanError(ZeroMLError):
    pass


class SchemaError(ZeroMLError):
    pass


class FoldError(ZeroMLError):
    pass


class MetricError(ZeroMLError):
    pass


class FitError(ZeroMLError):
    pass


class DeadlineError(ZeroMLError):
    pass


class SearchError(ZeroMLError):
    pass


class FormatError(ZeroMLError):
    pass


class DeployError(ZeroMLError):
    pass
