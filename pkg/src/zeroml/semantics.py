"""Static checking: name resolution, type inference and immutability rules."""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import catalog
from .errors import SemanticErrors, SemError
from .syntax import (
    BinaryOp, Block, Call, ExprStmt, ForLoop, Identifier, IfThenElse, LetDecl, Literal,
    MethodCall, Program, Span,
)
from .types import NUMERIC, ZType, assignable

__all__ = ["ZType", "Symbol", "TypedProgram", "check", "E_REDECL", "E_UNDEF", "E_TYPE",
           "E_ARG", "E_NOMUT"]

E_REDECL = "E_REDECL"
E_UNDEF = "E_UNDEF"
E_TYPE = "E_TYPE"
E_ARG = "E_ARG"
E_NOMUT = "E_NOMUT"  # reserved: the grammar has no assignment form to reject yet

_LITERAL_TYPES = {"int": ZType.INT, "float": ZType.FLOAT, "text": ZType.TEXT, "bool": ZType.BOOL}
_EQUATABLE = {ZType.UNIT, ZType.BOOL, ZType.INT, ZType.FLOAT, ZType.TEXT, ZType.RANGE}


@dataclass(frozen=True)
class Symbol:
    name: str
    type: ZType
    span: Span | None
    index: int  # program-wide declaration order


@dataclass
class Scope:
    parent: "Scope | None"
    names: dict[str, Symbol] = field(default_factory=dict)

    def find(self, name: str) -> Symbol | None:
        scope = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None


@dataclass
class TypedProgram:
    ast: Program
    type_of: dict[int, ZType]          # id(expression node) -> type
    scopes: list[Scope]                 # every lexical scope, outermost first
    symbol_of: dict[int, Symbol]        # id(Identifier | LetDecl | ForLoop) -> Symbol
    builtin_of: dict[int, catalog.Builtin]          # id(Call | MethodCall) -> builtin
    bound_args: dict[int, tuple]        # id(Call | MethodCall) -> one entry per parameter

    @property
    def symbols(self) -> list[Symbol]:
        seen = {s.index: s for s in self.symbol_of.values()}
        return [seen[i] for i in sorted(seen)]

    def type(self, node) -> ZType:
        return self.type_of[id(node)]


@dataclass(frozen=True)
class DefaultArg:
    """Placeholder for an omitted parameter; compiled to its catalog default."""
    param: catalog.Param


def _pos(node) -> tuple[int, int]:
    if node.span is None:
        return 0, 0
    return node.span.start_line, node.span.start_col


class Checker:
    def __init__(self):
        self.errors: list[SemError] = []
        self.type_of: dict[int, ZType] = {}
        self.symbol_of: dict[int, Symbol] = {}
        self.builtin_of: dict[int, catalog.Builtin] = {}
        self.bound_args: dict[int, tuple] = {}
        self.scopes: list[Scope] = []
        self.n_symbols = 0

    def error(self, code: str, node, message: str) -> None:
        line, col = _pos(node)
        self.errors.append(SemError(code, line, col, message))

    def new_scope(self, parent: Scope | None) -> Scope:
        scope = Scope(parent)
        self.scopes.append(scope)
        return scope

    def declare(self, scope: Scope, name: str, ztype: ZType, node) -> None:
        if name in scope.names:
            prev = scope.names[name]
            where = f" (first declared at {prev.span.start_line}:{prev.span.start_col})" if prev.span else ""
            self.error(E_REDECL, node, f"'{name}' is already declared in this scope{where}")
            return
        sym = Symbol(name, ztype, node.span, self.n_symbols)
        self.n_symbols += 1
        scope.names[name] = sym
        self.symbol_of[id(node)] = sym

    # -- statements --------------------------------------------------------

    def program(self, prog: Program) -> None:
        scope = self.new_scope(None)
        for stmt in prog.statements:
            self.statement(stmt, scope)

    def block(self, block: Block, scope: Scope) -> None:
        for stmt in block.statements:
            self.statement(stmt, scope)

    def statement(self, stmt, scope: Scope) -> None:
        if isinstance(stmt, LetDecl):
            ztype = self.expr(stmt.expr, scope)
            self.declare(scope, stmt.name, ztype, stmt)
        elif isinstance(stmt, ExprStmt):
            self.expr(stmt.expr, scope)
        elif isinstance(stmt, IfThenElse):
            cond = self.expr(stmt.cond, scope)
            if cond not in (ZType.BOOL, ZType.ERROR):
                self.error(E_TYPE, stmt.cond, f"if condition must be Bool, got {cond}")
            self.block(stmt.then_block, self.new_scope(scope))
            if stmt.else_block is not None:
                self.block(stmt.else_block, self.new_scope(scope))
        elif isinstance(stmt, ForLoop):
            it = self.expr(stmt.iterable, scope)
            if it not in (ZType.RANGE, ZType.ERROR):
                self.error(E_TYPE, stmt.iterable, f"for loop iterates over a Range, got {it}")
            body = self.new_scope(scope)
            self.declare(body, stmt.var, ZType.INT, stmt)
            self.block(stmt.block, body)
        else:
            raise TypeError(f"unknown statement {stmt!r}")

    # -- expressions -------------------------------------------------------

    def expr(self, node, scope: Scope) -> ZType:
        ztype = self._expr(node, scope)
        self.type_of[id(node)] = ztype
        return ztype

    def _expr(self, node, scope: Scope) -> ZType:
        if isinstance(node, Literal):
            return _LITERAL_TYPES[node.kind]
        if isinstance(node, Identifier):
            sym = scope.find(node.name)
            if sym is None:
                self.error(E_UNDEF, node, f"unknown identifier '{node.name}'")
                return ZType.ERROR
            self.symbol_of[id(node)] = sym
            return sym.type
        if isinstance(node, BinaryOp):
            return self.binary(node, scope)
        if isinstance(node, Call):
            builtin = catalog.lookup(node.callee)
            arg_types = [self.expr(a, scope) for a in node.args]
            named_types = [(n, self.expr(v, scope)) for n, v in node.named]
            if builtin is None:
                self.error(E_UNDEF, node, f"unknown function '{node.callee}'")
                return ZType.ERROR
            positional = list(zip(node.args, arg_types))
            named = [(n, v, t) for (n, v), (_, t) in zip(node.named, named_types)]
            return self.bind(node, builtin, positional, named)
        if isinstance(node, MethodCall):
            recv = self.expr(node.receiver, scope)
            arg_types = [self.expr(a, scope) for a in node.args]
            if recv is ZType.ERROR:
                return ZType.ERROR
            builtin = catalog.lookup_method(recv, node.method)
            if builtin is None:
                self.error(E_UNDEF, node, f"type {recv} has no method '{node.method}'")
                return ZType.ERROR
            positional = [(node.receiver, recv)] + list(zip(node.args, arg_types))
            return self.bind(node, builtin, positional, [])
        raise TypeError(f"unknown expression {node!r}")

    def binary(self, node: BinaryOp, scope: Scope) -> ZType:
        lhs = self.expr(node.lhs, scope)
        rhs = self.expr(node.rhs, scope)
        if ZType.ERROR in (lhs, rhs):
            return ZType.BOOL if node.op in ("==", "!=", "<", ">", "<=", ">=") else ZType.ERROR
        op = node.op
        if op in ("==", "!="):
            same = lhs is rhs or (lhs in NUMERIC and rhs in NUMERIC)
            if not same:
                self.error(E_TYPE, node, f"operator '{op}' needs operands of the same type, got {lhs} and {rhs}")
            elif lhs not in _EQUATABLE:
                self.error(E_TYPE, node, f"values of type {lhs} cannot be compared with '{op}'")
            return ZType.BOOL
        if lhs not in NUMERIC or rhs not in NUMERIC:
            self.error(E_TYPE, node, f"operator '{op}' requires numeric operands, got {lhs} and {rhs}")
            return ZType.BOOL if op in ("<", ">", "<=", ">=") else ZType.ERROR
        if op in ("<", ">", "<=", ">="):
            return ZType.BOOL
        if op == "/":
            return ZType.FLOAT
        return ZType.INT if lhs is rhs is ZType.INT else ZType.FLOAT

    def bind(self, node, builtin: catalog.Builtin, positional, named) -> ZType:
        """Match actual arguments to the builtin's parameters."""
        params = builtin.params
        slots: list = [None] * len(params)
        ok = True
        if len(positional) > len(params):
            noun = "argument" if len(params) == 1 else "arguments"
            self.error(E_ARG, node, f"{builtin.name}() takes at most {len(params)} {noun}, "
                                    f"got {len(positional)}")
            return builtin.returns
        for i, (arg, atype) in enumerate(positional):
            slots[i] = (arg, atype)
        index = {p.name: i for i, p in enumerate(params)}
        for name, arg, atype in named:
            if name not in index:
                self.error(E_ARG, arg, f"{builtin.name}() has no parameter named '{name}'")
                ok = False
                continue
            i = index[name]
            if slots[i] is not None:
                self.error(E_ARG, arg, f"{builtin.name}() got multiple values for '{name}'")
                ok = False
                continue
            slots[i] = (arg, atype)
        bound = []
        for param, slot in zip(params, slots):
            if slot is None:
                if param.required:
                    self.error(E_ARG, node, f"{builtin.name}() missing required argument '{param.name}'")
                    ok = False
                bound.append(DefaultArg(param))
                continue
            arg, atype = slot
            if not assignable(atype, param.type):
                self.error(E_TYPE, arg, f"argument '{param.name}' of {builtin.name}() expects "
                                        f"{param.type}, got {atype}")
                ok = False
            bound.append(arg)
        if ok:
            self.builtin_of[id(node)] = builtin
            self.bound_args[id(node)] = tuple(bound)
        return builtin.returns


def check(program: Program) -> TypedProgram:
    """Type-check ``program``; raise SemanticErrors listing every diagnostic."""
    checker = Checker()
    checker.program(program)
    if checker.errors:
        errors = sorted(checker.errors, key=lambda e: (e.line, e.col))
        raise SemanticErrors(errors)
    return TypedProgram(program, checker.type_of, checker.scopes, checker.symbol_of,
                        checker.builtin_of, checker.bound_args)
