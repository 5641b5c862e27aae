"""The fixed builtin catalog: names, signatures and one-line docs.

Both the checker and the compiler read this table; the runtime
implementations live in :mod:`zeroml.engine.builtins`.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..types import ZType


class _EnvDefault:
    """Default resolved at run time from the RuntimeEnv (e.g. ``--seed``)."""

    def __init__(self, attr: str, fallback):
        self.attr = attr
        self.fallback = fallback

    def __repr__(self) -> str:
        return f"env.{self.attr}"


REQUIRED = object()
ENV_SEED = _EnvDefault("seed", 42)


@dataclass(frozen=True)
class Param:
    name: str
    type: ZType
    default: object = REQUIRED

    @property
    def required(self) -> bool:
        return self.default is REQUIRED


@dataclass(frozen=True)
class Builtin:
    id: int
    name: str
    params: tuple[Param, ...]
    returns: ZType
    doc: str
    method_of: ZType | None = None  # receiver type when also callable as ``x.name()``

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def signature(self) -> str:
        parts = []
        for p in self.params:
            text = f"{p.name}: {p.type}"
            if not p.required:
                default = p.default
                if isinstance(default, str):
                    default = f'"{default}"'
                elif isinstance(default, _EnvDefault):
                    default = f"{default.fallback} (or --{default.attr})"
                text += f" = {default}"
            parts.append(text)
        return f"{self.name}({', '.join(parts)}) -> {self.returns}"


_CATALOG = (
    Builtin(0, "load", (Param("path", ZType.TEXT),), ZType.DATASET,
            "Read a CSV file (header row required) into a Dataset."),
    Builtin(1, "automl", (
        Param("input", ZType.DATASET),
        Param("target", ZType.TEXT),
        Param("task", ZType.TEXT, "auto"),
        Param("preprocess", ZType.TEXT, "standard"),
        Param("max_time", ZType.FLOAT, 0.0),
        Param("evaluation", ZType.TEXT, "auto"),
        Param("folds", ZType.INT, 5),
        Param("seed", ZType.INT, ENV_SEED),
    ), ZType.MODEL,
        "Clean the data, cross-validate the candidate roster in parallel and "
        "refit the winner on all rows. max_time = 0 means unlimited."),
    Builtin(2, "report", (Param("m", ZType.MODEL),), ZType.REPORT,
            "Print the search report table for a model and return it.",
            method_of=ZType.MODEL),
    Builtin(3, "deploy", (
        Param("m", ZType.MODEL), Param("target", ZType.TEXT), Param("dest", ZType.TEXT),
    ), ZType.UNIT,
        'Deploy a model: "file"/"edge" write an artifact to dest, '
        '"api" serves HTTP on dest (host:port).'),
    Builtin(4, "predict", (Param("m", ZType.MODEL), Param("data", ZType.DATASET)), ZType.DATASET,
            "Predict every row of a dataset; returns a one-column Dataset."),
    Builtin(5, "print", (Param("v", ZType.ANY),), ZType.UNIT,
            "Write a value to standard output followed by a newline."),
    Builtin(6, "range", (Param("lo", ZType.INT), Param("hi", ZType.INT)), ZType.RANGE,
            "Half-open integer range lo, lo+1, ..., hi-1."),
)

BY_NAME = {b.name: b for b in _CATALOG}
BY_ID = {b.id: b for b in _CATALOG}


def builtin_catalog() -> list[dict]:
    return [{"name": b.name, "signature": b.signature, "doc": b.doc,
             "method": b.method_of is not None} for b in _CATALOG]


def lookup(name: str) -> Builtin | None:
    return BY_NAME.get(name)


def lookup_method(receiver: ZType, name: str) -> Builtin | None:
    b = BY_NAME.get(name)
    if b is not None and b.method_of is receiver:
        return b
    return None
