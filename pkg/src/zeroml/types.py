"""Static types of ZeroML expressions."""

from __future__ import annotations

from enum import Enum


class ZType(Enum):
    UNIT = "Unit"
    BOOL = "Bool"
    INT = "Int"
    FLOAT = "Float"
    TEXT = "Text"
    RANGE = "Range"
    DATASET = "Dataset"
    MODEL = "Model"
    REPORT = "Report"
    # Pseudo-types: ANY only appears in builtin parameter lists, ERROR marks
    # an expression whose type could not be determined (suppresses cascades).
    ANY = "Any"
    ERROR = "<error>"

    def __str__(self) -> str:
        return self.value


NUMERIC = (ZType.INT, ZType.FLOAT)


def assignable(actual: ZType, expected: ZType) -> bool:
    """Whether a value of ``actual`` type may be passed where ``expected`` is wanted."""
    if expected is ZType.ANY or actual is ZType.ERROR:
        return True
    if actual is expected:
        return True
    return actual is ZType.INT and expected is ZType.FLOAT
