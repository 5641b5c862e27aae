"""ZeroML: a small statically typed language whose builtins run an AutoML pipeline."""

from .engine.catalog import builtin_catalog
from .errors import ZeroMLError

__version__ = "0.1.0"

__all__ = ["ZeroMLError", "builtin_catalog", "compile_source", "run_source"]


def compile_source(source: str):
    """Lex, parse, check and compile ``source``; returns Bytecode."""
    from .engine.compiler import compile_program
    from .semantics import check
    from .syntax import parse

    return compile_program(check(parse(source)))


def run_source(source: str, env=None) -> int:
    from .engine.vm import execute

    return execute(compile_source(source), env)
