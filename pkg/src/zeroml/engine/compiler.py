"""Ahead-of-time compilation of a checked program to stack bytecode."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from ..semantics import DefaultArg, TypedProgram
from ..syntax import (
    BinaryOp, Block, Call, ExprStmt, ForLoop, Identifier, IfThenElse, LetDecl, Literal,
    MethodCall,
)
from ..types import ZType
from .catalog import _EnvDefault


class Op(Enum):
    PUSH_CONST = "PUSH_CONST"
    LOAD_SLOT = "LOAD_SLOT"
    STORE_SLOT = "STORE_SLOT"
    ADD = "ADD"
    SUB = "SUB"
    MUL = "MUL"
    DIV = "DIV"
    CMP_EQ = "CMP_EQ"
    CMP_NE = "CMP_NE"
    CMP_LT = "CMP_LT"
    CMP_GT = "CMP_GT"
    CMP_LE = "CMP_LE"
    CMP_GE = "CMP_GE"
    JUMP = "JUMP"
    JUMP_IF_FALSE = "JUMP_IF_FALSE"
    CALL_BUILTIN = "CALL_BUILTIN"
    RANGE_INIT = "RANGE_INIT"
    RANGE_NEXT = "RANGE_NEXT"
    POP = "POP"
    HALT = "HALT"


BINARY_OPS = {
    "+": Op.ADD, "-": Op.SUB, "*": Op.MUL, "/": Op.DIV,
    "==": Op.CMP_EQ, "!=": Op.CMP_NE, "<": Op.CMP_LT, ">": Op.CMP_GT,
    "<=": Op.CMP_LE, ">=": Op.CMP_GE,
}


@dataclass(frozen=True)
class Instr:
    op: Op
    a: int | None = None
    b: int | None = None
    line: int = 0

    def __str__(self) -> str:
        args = " ".join(str(x) for x in (self.a, self.b) if x is not None)
        return f"{self.op.value} {args}".rstrip()


@dataclass(frozen=True)
class Const:
    """A typed constant; the tag keeps ``true`` and ``1`` distinct in the pool."""
    type: ZType | None  # None for an environment-resolved default
    value: object

    def key(self) -> tuple:
        if isinstance(self.value, _EnvDefault):
            return ("env", self.value.attr)
        return (self.type.value, repr(self.value))


@dataclass
class Bytecode:
    constants: list[Const]
    instructions: list[Instr]
    slot_count: int
    slot_types: list[ZType]
    statement_starts: frozenset[int] = field(default_factory=frozenset)

    def to_bytes(self) -> bytes:
        doc = {
            "constants": [list(c.key()) for c in self.constants],
            "instructions": [[i.op.value, i.a, i.b, i.line] for i in self.instructions],
            "slot_count": self.slot_count,
            "slot_types": [t.value for t in self.slot_types],
            "statement_starts": sorted(self.statement_starts),
        }
        return json.dumps(doc, separators=(",", ":")).encode()

    def disassemble(self) -> str:
        lines = []
        for pc, ins in enumerate(self.instructions):
            note = ""
            if ins.op is Op.PUSH_CONST:
                note = f"    ; {self.constants[ins.a].key()[1]}"
            lines.append(f"{pc:4d}  L{ins.line:<4d} {ins}{note}")
        return "\n".join(lines) + "\n"


class ZeroDivisionFold(Exception):
    pass


def fold_binary(op: str, a, b):
    """Evaluate a binary operator on two constants with VM semantics."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise ZeroDivisionFold()
        return a / b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    if op == ">=":
        return a >= b
    raise ValueError(op)


def _coerce(value, ztype: ZType):
    if ztype is ZType.FLOAT:
        return float(value)
    return value


class Compiler:
    def __init__(self, tp: TypedProgram):
        self.tp = tp
        self.constants: list[Const] = []
        self.const_index: dict[tuple, int] = {}
        self.code: list[Instr] = []
        self.starts: set[int] = set()
        self.n_user_slots = len(tp.symbols)
        self.slot_types = [s.type for s in tp.symbols]

    def const(self, c: Const) -> int:
        key = c.key()
        if key not in self.const_index:
            self.const_index[key] = len(self.constants)
            self.constants.append(c)
        return self.const_index[key]

    def emit(self, op: Op, a=None, b=None, line=0) -> int:
        self.code.append(Instr(op, a, b, line))
        return len(self.code) - 1

    def patch(self, at: int, target: int) -> None:
        ins = self.code[at]
        self.code[at] = Instr(ins.op, target, ins.b, ins.line)

    def hidden_slot(self) -> int:
        self.slot_types.append(ZType.RANGE)
        return len(self.slot_types) - 1

    # -- statements --------------------------------------------------------

    def program(self) -> Bytecode:
        for stmt in self.tp.ast.statements:
            self.statement(stmt)
        self.emit(Op.HALT, line=0)
        return Bytecode(self.constants, self.code, len(self.slot_types), self.slot_types,
                        frozenset(self.starts))

    def block(self, block: Block) -> None:
        for stmt in block.statements:
            self.statement(stmt)

    def statement(self, stmt) -> None:
        line = stmt.span.start_line if stmt.span else 0
        self.starts.add(len(self.code))
        if isinstance(stmt, LetDecl):
            self.expr(stmt.expr)
            self.emit(Op.STORE_SLOT, self.tp.symbol_of[id(stmt)].index, line=line)
        elif isinstance(stmt, ExprStmt):
            self.expr(stmt.expr)
            self.emit(Op.POP, line=line)
        elif isinstance(stmt, IfThenElse):
            self.expr(stmt.cond)
            to_else = self.emit(Op.JUMP_IF_FALSE, -1, line=line)
            self.block(stmt.then_block)
            if stmt.else_block is None:
                self.patch(to_else, len(self.code))
            else:
                to_end = self.emit(Op.JUMP, -1, line=line)
                self.patch(to_else, len(self.code))
                self.block(stmt.else_block)
                self.patch(to_end, len(self.code))
        elif isinstance(stmt, ForLoop):
            # iterable; RANGE_INIT h; JUMP test; body: ...; test: RANGE_NEXT h v;
            # JUMP_IF_FALSE body  (RANGE_NEXT pushes true once exhausted)
            var_slot = self.tp.symbol_of[id(stmt)].index
            cursor = self.hidden_slot()
            self.expr(stmt.iterable)
            self.emit(Op.RANGE_INIT, cursor, line=line)
            to_test = self.emit(Op.JUMP, -1, line=line)
            body = len(self.code)
            self.block(stmt.block)
            self.patch(to_test, len(self.code))
            self.emit(Op.RANGE_NEXT, cursor, var_slot, line=line)
            self.emit(Op.JUMP_IF_FALSE, body, line=line)
        else:
            raise TypeError(stmt)

    # -- expressions -------------------------------------------------------

    def constant_value(self, node):
        """Return (True, value) when ``node`` folds to a literal constant."""
        if isinstance(node, Literal):
            return True, node.value
        if isinstance(node, BinaryOp):
            ok_l, lhs = self.constant_value(node.lhs)
            ok_r, rhs = self.constant_value(node.rhs)
            if ok_l and ok_r:
                try:
                    value = fold_binary(node.op, lhs, rhs)
                except (ZeroDivisionFold, OverflowError):
                    return False, None
                return True, _coerce(value, self.tp.type(node))
        return False, None

    def expr(self, node) -> None:
        line = node.span.start_line if node.span else 0
        foldable, value = self.constant_value(node)
        if foldable:
            self.emit(Op.PUSH_CONST, self.const(Const(self.tp.type(node), value)), line=line)
        elif isinstance(node, Identifier):
            self.emit(Op.LOAD_SLOT, self.tp.symbol_of[id(node)].index, line=line)
        elif isinstance(node, BinaryOp):
            self.expr(node.lhs)
            self.expr(node.rhs)
            self.emit(BINARY_OPS[node.op], line=line)
        elif isinstance(node, (Call, MethodCall)):
            builtin = self.tp.builtin_of[id(node)]
            for param, arg in zip(builtin.params, self.tp.bound_args[id(node)]):
                if isinstance(arg, DefaultArg):
                    default = param.default
                    ztype = None if isinstance(default, _EnvDefault) else param.type
                    self.emit(Op.PUSH_CONST, self.const(Const(ztype, default)), line=line)
                else:
                    self.expr(arg)
            self.emit(Op.CALL_BUILTIN, builtin.id, builtin.arity, line=line)
        else:
            raise TypeError(node)


def compile_program(tp: TypedProgram) -> Bytecode:
    return Compiler(tp).program()
