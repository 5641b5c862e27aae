"""Bytecode compiler, stack VM and builtin catalog.

Submodules are imported lazily so that :mod:`zeroml.semantics` can read
the catalog without pulling in the compiler.
"""

from .catalog import builtin_catalog, lookup

__all__ = ["builtin_catalog", "lookup", "compile_program", "execute", "RuntimeEnv"]


def __getattr__(name):
    if name == "compile_program":
        from .compiler import compile_program
        return compile_program
    if name in ("execute", "RuntimeEnv"):
        from . import vm
        return getattr(vm, name)
    raise AttributeError(name)
