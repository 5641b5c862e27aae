"""Stack virtual machine executing compiled bytecode."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from ..errors import ExecutionError, ZeroMLError
from ..types import ZType
from .catalog import BY_ID, _EnvDefault
from .compiler import Bytecode, Op
from .values import Range, type_of_value


@dataclass
class RuntimeEnv:
    seed: int = 42
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    workdir: Path = field(default_factory=Path.cwd)
    out: TextIO = field(default_factory=lambda: sys.stdout)
    test_mode: bool = False
    report_out: Path | None = None
    debug: bool = False

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.workdir) / p


def _check_tag(value, expected: ZType, line: int) -> None:
    actual = type_of_value(value)
    if expected is ZType.ANY or actual is expected:
        return
    if expected is ZType.FLOAT and actual is ZType.INT:
        return
    raise AssertionError(f"line {line}: runtime value of type {actual} in a {expected} position")


def execute(bc: Bytecode, env: RuntimeEnv | None = None) -> int:
    """Run ``bc`` to HALT. Returns exit status 0; raises ExecutionError on failure."""
    from .builtins import IMPLEMENTATIONS

    env = env or RuntimeEnv()
    code = bc.instructions
    consts = []
    for c in bc.constants:
        value = c.value
        if isinstance(value, _EnvDefault):
            value = getattr(env, value.attr)
        consts.append(value)
    slots: list = [None] * bc.slot_count
    stack: list = []
    pc = 0
    while True:
        if env.debug and pc in bc.statement_starts and stack:
            raise AssertionError(f"pc {pc}: stack depth {len(stack)} at statement boundary")
        ins = code[pc]
        op = ins.op
        pc += 1
        if op is Op.PUSH_CONST:
            stack.append(consts[ins.a])
        elif op is Op.LOAD_SLOT:
            stack.append(slots[ins.a])
        elif op is Op.STORE_SLOT:
            value = stack.pop()
            if env.debug:
                _check_tag(value, bc.slot_types[ins.a], ins.line)
            slots[ins.a] = value
        elif op is Op.POP:
            stack.pop()
        elif op is Op.ADD:
            b = stack.pop()
            stack[-1] = stack[-1] + b
        elif op is Op.SUB:
            b = stack.pop()
            stack[-1] = stack[-1] - b
        elif op is Op.MUL:
            b = stack.pop()
            stack[-1] = stack[-1] * b
        elif op is Op.DIV:
            b = stack.pop()
            if b == 0:
                raise ExecutionError(ins.line, "division by zero")
            stack[-1] = stack[-1] / b
        elif op is Op.CMP_EQ:
            b = stack.pop()
            stack[-1] = stack[-1] == b
        elif op is Op.CMP_NE:
            b = stack.pop()
            stack[-1] = stack[-1] != b
        elif op is Op.CMP_LT:
            b = stack.pop()
            stack[-1] = stack[-1] < b
        elif op is Op.CMP_GT:
            b = stack.pop()
            stack[-1] = stack[-1] > b
        elif op is Op.CMP_LE:
            b = stack.pop()
            stack[-1] = stack[-1] <= b
        elif op is Op.CMP_GE:
            b = stack.pop()
            stack[-1] = stack[-1] >= b
        elif op is Op.JUMP:
            pc = ins.a
        elif op is Op.JUMP_IF_FALSE:
            if not stack.pop():
                pc = ins.a
        elif op is Op.RANGE_INIT:
            r: Range = stack.pop()
            slots[ins.a] = [r.lo, r.hi]
        elif op is Op.RANGE_NEXT:
            cursor = slots[ins.a]
            if cursor[0] >= cursor[1]:
                stack.append(True)
            else:
                slots[ins.b] = cursor[0]
                cursor[0] += 1
                stack.append(False)
        elif op is Op.CALL_BUILTIN:
            n = ins.b
            args = stack[len(stack) - n:]
            del stack[len(stack) - n:]
            builtin = BY_ID[ins.a]
            try:
                result = IMPLEMENTATIONS[builtin.name](env, ins.line, *args)
            except ExecutionError:
                raise
            except (ZeroMLError, OSError, ValueError) as exc:
                raise ExecutionError(ins.line, _describe(exc)) from exc
            if env.debug:
                _check_tag(result, builtin.returns, ins.line)
            stack.append(result)
        elif op is Op.HALT:
            return 0
        else:
            raise AssertionError(f"unknown opcode {op}")


def _describe(exc: Exception) -> str:
    if isinstance(exc, FileNotFoundError):
        return f"file not found: {exc.filename}"
    if isinstance(exc, OSError) and exc.filename:
        return f"{exc.strerror}: {exc.filename}"
    return str(exc)
