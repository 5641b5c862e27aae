"""AST, recursive-descent parser and canonical pretty printer.

Statements are parsed by recursive descent; binary expressions by
precedence climbing over three left-associative levels
(comparison < additive < multiplicative). Postfix ``.name(args)`` binds
tighter than any binary operator.

Node equality is structural: spans are excluded from ``==`` so that a
re-parsed pretty print compares equal to the original tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import ParseError
from .lexer import Token, TokenKind, escape, tokenize, unescape


@dataclass(frozen=True)
class Span:
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def contains(self, other: "Span") -> bool:
        return ((self.start_line, self.start_col) <= (other.start_line, other.start_col)
                and (other.end_line, other.end_col) <= (self.end_line, self.end_col))

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_col}-{self.end_line}:{self.end_col}"


def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Literal:
    value: Union[int, float, str, bool]
    kind: str  # "int" | "float" | "text" | "bool"; keeps True distinct from 1
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Identifier:
    name: str
    span: Span | None = _span_field()


@dataclass(frozen=True)
class BinaryOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Call:
    callee: str
    args: tuple["Expr", ...] = ()
    named: tuple[tuple[str, "Expr"], ...] = ()
    span: Span | None = _span_field()


@dataclass(frozen=True)
class MethodCall:
    receiver: "Expr"
    method: str
    args: tuple["Expr", ...] = ()
    span: Span | None = _span_field()


Expr = Union[Literal, Identifier, BinaryOp, Call, MethodCall]


@dataclass(frozen=True)
class Block:
    statements: tuple["Stmt", ...] = ()
    span: Span | None = _span_field()


@dataclass(frozen=True)
class LetDecl:
    name: str
    expr: Expr
    span: Span | None = _span_field()


@dataclass(frozen=True)
class IfThenElse:
    cond: Expr
    then_block: Block
    else_block: Block | None = None
    span: Span | None = _span_field()


@dataclass(frozen=True)
class ForLoop:
    var: str
    iterable: Expr
    block: Block
    span: Span | None = _span_field()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    span: Span | None = _span_field()


Stmt = Union[LetDecl, IfThenElse, ForLoop, ExprStmt]


@dataclass(frozen=True)
class Program:
    statements: tuple[Stmt, ...] = ()
    span: Span | None = _span_field()


# Binding power per binary operator; higher binds tighter.
PRECEDENCE = {
    "==": 1, "!=": 1, "<": 1, ">": 1, "<=": 1, ">=": 1,
    "+": 2, "-": 2,
    "*": 3, "/": 3,
}

_BINOP_KINDS = {
    TokenKind.PLUS: "+", TokenKind.MINUS: "-", TokenKind.STAR: "*", TokenKind.SLASH: "/",
    TokenKind.EQEQ: "==", TokenKind.NEQ: "!=", TokenKind.LT: "<", TokenKind.GT: ">",
    TokenKind.LE: "<=", TokenKind.GE: ">=",
}

_DESCRIBE = {
    TokenKind.IDENT: "identifier", TokenKind.SEMI: "';'", TokenKind.EQ: "'='",
    TokenKind.LPAREN: "'('", TokenKind.RPAREN: "')'", TokenKind.LBRACE: "'{'",
    TokenKind.RBRACE: "'}'", TokenKind.IN: "'in'", TokenKind.COMMA: "','",
    TokenKind.EOF: "end of input",
}


def _describe(tok: Token) -> str:
    if tok.kind is TokenKind.EOF:
        return "end of input"
    return f"{tok.kind.name} '{tok.lexeme}'"


def _end_of(tok: Token) -> tuple[int, int]:
    # Tokens never contain newlines, so the end column is start + length.
    return tok.line, tok.col + len(tok.lexeme)


class Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind is not TokenKind.EOF:
            raise ValueError("token stream must end with EOF")
        self.tokens = tokens
        self.i = 0
        self.last: Token = tokens[0]

    # -- cursor helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, ahead: int = 1) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def at(self, kind: TokenKind) -> bool:
        return self.tok.kind is kind

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind is not TokenKind.EOF:
            self.i += 1
        self.last = tok
        return tok

    def expect(self, kind: TokenKind, what: str | None = None) -> Token:
        if self.tok.kind is not kind:
            raise self.fail(what or _DESCRIBE.get(kind, kind.name))
        return self.advance()

    def fail(self, expected: str) -> ParseError:
        return ParseError(self.tok.line, self.tok.col, expected, _describe(self.tok))

    def span_from(self, start: Token) -> Span:
        end_line, end_col = _end_of(self.last)
        return Span(start.line, start.col, end_line, end_col)

    # -- statements --------------------------------------------------------

    def program(self) -> Program:
        start = self.tok
        stmts = []
        while not self.at(TokenKind.EOF):
            stmts.append(self.statement())
        if stmts:
            span = Span(start.line, start.col, *_end_of(self.last))
        else:
            span = Span(start.line, start.col, start.line, start.col)
        return Program(tuple(stmts), span=span)

    def statement(self) -> Stmt:
        kind = self.tok.kind
        if kind is TokenKind.LET:
            return self.declaration()
        if kind is TokenKind.IF:
            return self.if_then_else()
        if kind is TokenKind.FOR:
            return self.for_loop()
        if kind is TokenKind.IDENT and self.peek().kind is TokenKind.EQ:
            tok = self.tok
            raise ParseError(tok.line, tok.col, "a statement (bindings are immutable; use 'let')",
                             "assignment")
        start = self.tok
        expr = self.expression(0)
        # A bare function call is itself a statement; the ';' is optional there.
        if isinstance(expr, Call) and not self.at(TokenKind.SEMI):
            return ExprStmt(expr, span=self.span_from(start))
        self.expect(TokenKind.SEMI)
        return ExprStmt(expr, span=self.span_from(start))

    def declaration(self) -> LetDecl:
        start = self.expect(TokenKind.LET)
        name = self.expect(TokenKind.IDENT).lexeme
        self.expect(TokenKind.EQ)
        expr = self.expression(0)
        self.expect(TokenKind.SEMI)
        return LetDecl(name, expr, span=self.span_from(start))

    def block(self) -> Block:
        start = self.expect(TokenKind.LBRACE)
        stmts = []
        while not self.at(TokenKind.RBRACE):
            if self.at(TokenKind.EOF):
                raise self.fail("'}'")
            stmts.append(self.statement())
        self.advance()
        return Block(tuple(stmts), span=self.span_from(start))

    def if_then_else(self) -> IfThenElse:
        start = self.expect(TokenKind.IF)
        self.expect(TokenKind.LPAREN)
        cond = self.expression(0)
        self.expect(TokenKind.RPAREN)
        then_block = self.block()
        else_block = None
        if self.at(TokenKind.ELSE):
            self.advance()
            else_block = self.block()
        return IfThenElse(cond, then_block, else_block, span=self.span_from(start))

    def for_loop(self) -> ForLoop:
        start = self.expect(TokenKind.FOR)
        self.expect(TokenKind.LPAREN)
        var = self.expect(TokenKind.IDENT).lexeme
        self.expect(TokenKind.IN)
        iterable = self.expression(0)
        self.expect(TokenKind.RPAREN)
        body = self.block()
        return ForLoop(var, iterable, body, span=self.span_from(start))

    # -- expressions -------------------------------------------------------

    def expression(self, min_prec: int) -> Expr:
        start = self.tok
        lhs = self.postfix()
        while True:
            op = _BINOP_KINDS.get(self.tok.kind)
            if op is None or PRECEDENCE[op] < min_prec:
                return lhs
            self.advance()
            rhs = self.expression(PRECEDENCE[op] + 1)
            lhs = BinaryOp(op, lhs, rhs, span=self.span_from(start))

    def postfix(self) -> Expr:
        start = self.tok
        expr = self.primary()
        while self.at(TokenKind.DOT):
            self.advance()
            name = self.expect(TokenKind.IDENT, "method name").lexeme
            self.expect(TokenKind.LPAREN)
            args, named = self.arguments()
            if named:
                first = named[0][1]
                raise ParseError(first.span.start_line, first.span.start_col,
                                 "positional argument", "named argument in method call")
            expr = MethodCall(expr, name, tuple(args), span=self.span_from(start))
        return expr

    def primary(self) -> Expr:
        tok = self.tok
        kind = tok.kind
        if kind is TokenKind.INT_LIT:
            self.advance()
            return Literal(int(tok.lexeme), "int", span=self.span_from(tok))
        if kind is TokenKind.FLOAT_LIT:
            self.advance()
            return Literal(float(tok.lexeme), "float", span=self.span_from(tok))
        if kind is TokenKind.STRING_LIT:
            self.advance()
            return Literal(unescape(tok.lexeme), "text", span=self.span_from(tok))
        if kind is TokenKind.BOOL_LIT:
            self.advance()
            return Literal(tok.lexeme == "true", "bool", span=self.span_from(tok))
        if kind is TokenKind.IDENT:
            self.advance()
            if self.at(TokenKind.LPAREN):
                self.advance()
                args, named = self.arguments()
                return Call(tok.lexeme, tuple(args), tuple(named), span=self.span_from(tok))
            return Identifier(tok.lexeme, span=self.span_from(tok))
        if kind is TokenKind.LPAREN:
            self.advance()
            inner = self.expression(0)
            self.expect(TokenKind.RPAREN)
            return inner
        raise self.fail("expression")

    def arguments(self) -> tuple[list[Expr], list[tuple[str, Expr]]]:
        """Parse ``args )`` after the opening parenthesis has been consumed."""
        args: list[Expr] = []
        named: list[tuple[str, Expr]] = []
        if self.at(TokenKind.RPAREN):
            self.advance()
            return args, named
        while True:
            if self.at(TokenKind.IDENT) and self.peek().kind is TokenKind.EQ:
                name_tok = self.advance()
                self.advance()
                if any(n == name_tok.lexeme for n, _ in named):
                    raise ParseError(name_tok.line, name_tok.col, "unique argument name",
                                     f"duplicate argument '{name_tok.lexeme}'")
                named.append((name_tok.lexeme, self.expression(0)))
            else:
                if named:
                    raise self.fail("named argument (positional arguments come first)")
                args.append(self.expression(0))
            if self.at(TokenKind.COMMA):
                self.advance()
                continue
            self.expect(TokenKind.RPAREN, "',' or ')'")
            return args, named


def parse_program(tokens: list[Token]) -> Program:
    return Parser(tokens).program()


def parse_expression(tokens: list[Token], min_precedence: int = 0) -> Expr:
    """Parse a single expression that must span the whole token stream."""
    parser = Parser(tokens)
    expr = parser.expression(min_precedence)
    parser.expect(TokenKind.EOF)
    return expr


def parse(source: str) -> Program:
    return parse_program(tokenize(source))


# -- pretty printing --------------------------------------------------------

INDENT = "    "


def _format_float(value: float) -> str:
    text = repr(value)
    if "e" in text or "E" in text:
        from decimal import Decimal
        text = format(Decimal(text), "f")
        if "." not in text:
            text += ".0"
    return text


def _expr_text(expr: Expr, parent_prec: int = 0) -> str:
    if isinstance(expr, Literal):
        if expr.kind == "bool":
            return "true" if expr.value else "false"
        if expr.kind == "text":
            return escape(expr.value)
        if expr.kind == "float":
            return _format_float(expr.value)
        return str(expr.value)
    if isinstance(expr, Identifier):
        return expr.name
    if isinstance(expr, Call):
        parts = [_expr_text(a) for a in expr.args]
        parts += [f"{name}={_expr_text(value)}" for name, value in expr.named]
        return f"{expr.callee}({', '.join(parts)})"
    if isinstance(expr, MethodCall):
        receiver = _expr_text(expr.receiver, 99)
        if isinstance(expr.receiver, Literal) and expr.receiver.kind in ("int", "float"):
            receiver = f"({receiver})"  # `1.report()` would lex as a malformed number
        args = ", ".join(_expr_text(a) for a in expr.args)
        return f"{receiver}.{expr.method}({args})"
    if isinstance(expr, BinaryOp):
        prec = PRECEDENCE[expr.op]
        # Left-associative: the right operand needs parens at equal precedence.
        text = f"{_expr_text(expr.lhs, prec)} {expr.op} {_expr_text(expr.rhs, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"not an expression: {expr!r}")


def _block_lines(block: Block, depth: int) -> list[str]:
    lines = []
    for stmt in block.statements:
        lines.extend(_stmt_lines(stmt, depth + 1))
    return lines


def _stmt_lines(stmt: Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(stmt, LetDecl):
        return [f"{pad}let {stmt.name} = {_expr_text(stmt.expr)};"]
    if isinstance(stmt, ExprStmt):
        return [f"{pad}{_expr_text(stmt.expr)};"]
    if isinstance(stmt, IfThenElse):
        lines = [f"{pad}if ({_expr_text(stmt.cond)}) {{"]
        lines += _block_lines(stmt.then_block, depth)
        if stmt.else_block is None:
            lines.append(f"{pad}}}")
        else:
            lines.append(f"{pad}}} else {{")
            lines += _block_lines(stmt.else_block, depth)
            lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, ForLoop):
        lines = [f"{pad}for ({stmt.var} in {_expr_text(stmt.iterable)}) {{"]
        lines += _block_lines(stmt.block, depth)
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"not a statement: {stmt!r}")


def pretty_print(node) -> str:
    """Render canonical source: one statement per line, 4-space indentation."""
    if isinstance(node, Program):
        lines = []
        for stmt in node.statements:
            lines.extend(_stmt_lines(stmt, 0))
        return "".join(line + "\n" for line in lines)
    if isinstance(node, Block):
        return "".join(line + "\n" for line in _block_lines(node, -1))
    if isinstance(node, (LetDecl, ExprStmt, IfThenElse, ForLoop)):
        return "\n".join(_stmt_lines(node, 0))
    return _expr_text(node)


# -- debug tree dump --------------------------------------------------------

def _children(node) -> list:
    if isinstance(node, (Program, Block)):
        return list(node.statements)
    if isinstance(node, LetDecl):
        return [node.expr]
    if isinstance(node, ExprStmt):
        return [node.expr]
    if isinstance(node, IfThenElse):
        return [node.cond, node.then_block] + ([node.else_block] if node.else_block else [])
    if isinstance(node, ForLoop):
        return [node.iterable, node.block]
    if isinstance(node, BinaryOp):
        return [node.lhs, node.rhs]
    if isinstance(node, Call):
        return list(node.args) + [value for _, value in node.named]
    if isinstance(node, MethodCall):
        return [node.receiver, *node.args]
    return []


def iter_nodes(node):
    """Pre-order traversal over every AST node."""
    yield node
    for child in _children(node):
        yield from iter_nodes(child)


def _label(node) -> str:
    name = type(node).__name__
    if isinstance(node, Literal):
        return f"{name} {node.kind} {_expr_text(node)}"
    if isinstance(node, Identifier):
        return f"{name} {node.name}"
    if isinstance(node, LetDecl):
        return f"{name} {node.name}"
    if isinstance(node, ForLoop):
        return f"{name} {node.var}"
    if isinstance(node, BinaryOp):
        return f"{name} {node.op}"
    if isinstance(node, Call):
        named = "".join(f" {n}=" for n, _ in node.named)
        return f"{name} {node.callee} positional={len(node.args)}{named}"
    if isinstance(node, MethodCall):
        return f"{name} .{node.method}"
    return name


def dump_tree(node) -> str:
    """Line-oriented indented tree used by ``zeroml ast``."""
    lines = []

    def walk(n, depth):
        span = f" @{n.span}" if n.span is not None else ""
        lines.append("  " * depth + _label(n) + span)
        for child in _children(n):
            walk(child, depth + 1)

    walk(node, 0)
    return "\n".join(lines) + "\n"
