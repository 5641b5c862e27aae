"""Runtime value helpers: the Range value, type tags and print formatting."""

from __future__ import annotations

from dataclasses import dataclass

from ..types import ZType


@dataclass(frozen=True)
class Range:
    lo: int
    hi: int


def type_of_value(value) -> ZType:
    from ..automl.report import Report
    from ..automl.selector import TrainedModel
    from ..data import Dataset

    if value is None:
        return ZType.UNIT
    if isinstance(value, bool):
        return ZType.BOOL
    if isinstance(value, int):
        return ZType.INT
    if isinstance(value, float):
        return ZType.FLOAT
    if isinstance(value, str):
        return ZType.TEXT
    if isinstance(value, Range):
        return ZType.RANGE
    if isinstance(value, Dataset):
        return ZType.DATASET
    if isinstance(value, TrainedModel):
        return ZType.MODEL
    if isinstance(value, Report):
        return ZType.REPORT
    raise TypeError(f"not a ZeroML value: {value!r}")


def format_value(value) -> str:
    """Text written by ``print``: shortest round-trip floats, one-line handle summaries."""
    ztype = type_of_value(value)
    if ztype is ZType.UNIT:
        return "()"
    if ztype is ZType.BOOL:
        return "true" if value else "false"
    if ztype in (ZType.INT, ZType.TEXT):
        return str(value)
    if ztype is ZType.FLOAT:
        return repr(value)
    if ztype is ZType.RANGE:
        return f"range({value.lo}, {value.hi})"
    return value.summary()
