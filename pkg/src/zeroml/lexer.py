"""Tokenizer for ZeroML source text.

Whitespace and ``//`` comments are skipped but every token keeps its
character offset, so the gaps between tokens can be recovered from the
source verbatim (see :func:`trivia`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from .errors import LexError


class TokenKind(Enum):
    LET = auto()
    IF = auto()
    ELSE = auto()
    FOR = auto()
    IN = auto()
    IDENT = auto()
    INT_LIT = auto()
    FLOAT_LIT = auto()
    STRING_LIT = auto()
    BOOL_LIT = auto()
    PLUS = auto()
    MINUS = auto()
    STAR = auto()
    SLASH = auto()
    EQ = auto()
    EQEQ = auto()
    NEQ = auto()
    LT = auto()
    GT = auto()
    LE = auto()
    GE = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACE = auto()
    RBRACE = auto()
    COMMA = auto()
    SEMI = auto()
    DOT = auto()
    EOF = auto()


KEYWORDS = {
    "let": TokenKind.LET,
    "if": TokenKind.IF,
    "else": TokenKind.ELSE,
    "for": TokenKind.FOR,
    "in": TokenKind.IN,
    "true": TokenKind.BOOL_LIT,
    "false": TokenKind.BOOL_LIT,
}

# Two-character operators must be tried before their one-character prefixes.
OPERATORS = [
    ("==", TokenKind.EQEQ),
    ("!=", TokenKind.NEQ),
    ("<=", TokenKind.LE),
    (">=", TokenKind.GE),
    ("+", TokenKind.PLUS),
    ("-", TokenKind.MINUS),
    ("*", TokenKind.STAR),
    ("/", TokenKind.SLASH),
    ("=", TokenKind.EQ),
    ("<", TokenKind.LT),
    (">", TokenKind.GT),
    ("(", TokenKind.LPAREN),
    (")", TokenKind.RPAREN),
    ("{", TokenKind.LBRACE),
    ("}", TokenKind.RBRACE),
    (",", TokenKind.COMMA),
    (";", TokenKind.SEMI),
    (".", TokenKind.DOT),
]

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_DIGITS = set("0123456789")
_IDENT_CHARS = _IDENT_START | _DIGITS
_WHITESPACE = set(" \t\r\n")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    col: int
    offset: int = 0

    def __str__(self) -> str:
        return f"{self.kind.name} {self.lexeme} {self.line}:{self.col}"


class _Scanner:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.src[i] if i < len(self.src) else ""

    def advance(self, n: int = 1) -> None:
        for ch in self.src[self.pos:self.pos + n]:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n

    def error(self, message: str, line: int | None = None, col: int | None = None) -> LexError:
        return LexError(line or self.line, col or self.col, message)

    def skip_trivia(self) -> None:
        while self.pos < len(self.src):
            ch = self.peek()
            if ch in _WHITESPACE:
                self.advance()
            elif ch == "/" and self.peek(1) == "/":
                while self.pos < len(self.src) and self.peek() != "\n":
                    self.advance()
            else:
                return

    def number(self) -> tuple[TokenKind, int]:
        start = self.pos
        end = start
        while end < len(self.src) and self.src[end] in _DIGITS:
            end += 1
        kind = TokenKind.INT_LIT
        if end < len(self.src) and self.src[end] == ".":
            if end + 1 < len(self.src) and self.src[end + 1] in _DIGITS:
                end += 1
                while end < len(self.src) and self.src[end] in _DIGITS:
                    end += 1
                kind = TokenKind.FLOAT_LIT
                if end < len(self.src) and self.src[end] == ".":
                    raise self.error(f"malformed number '{self.src[start:end + 1]}'")
            else:
                raise self.error(f"malformed number '{self.src[start:end + 1]}'")
        if end < len(self.src) and (self.src[end] in _IDENT_START or ord(self.src[end]) > 127):
            raise self.error(f"malformed number '{self.src[start:end + 1]}'")
        return kind, end - start

    def string(self) -> int:
        i = self.pos + 1
        while i < len(self.src):
            ch = self.src[i]
            if ch == '"':
                return i + 1 - self.pos
            if ch == "\n":
                break
            if ch == "\\":
                nxt = self.src[i + 1] if i + 1 < len(self.src) else ""
                if nxt not in ('"', "\\"):
                    raise LexError(self.line, self.col + (i - self.pos),
                                   f"invalid escape sequence '\\{nxt}'")
                i += 2
                continue
            i += 1
        raise self.error("unterminated string literal")


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens, always ending with a single EOF token.

    Raises LexError on a character outside the token alphabet, an
    unterminated string, or a malformed number such as ``1.2.3`` or ``123abc``.
    """
    sc = _Scanner(source)
    tokens: list[Token] = []
    while True:
        sc.skip_trivia()
        if sc.pos >= len(source):
            tokens.append(Token(TokenKind.EOF, "", sc.line, sc.col, sc.pos))
            return tokens
        ch = sc.peek()
        if ch in _IDENT_START:
            end = sc.pos
            while end < len(source) and source[end] in _IDENT_CHARS:
                end += 1
            if end < len(source) and ord(source[end]) > 127:
                raise LexError(sc.line, sc.col + (end - sc.pos), "non-ASCII character in identifier")
            word = source[sc.pos:end]
            kind = KEYWORDS.get(word, TokenKind.IDENT)
            length = end - sc.pos
        elif ch in _DIGITS:
            kind, length = sc.number()
        elif ch == '"':
            kind, length = TokenKind.STRING_LIT, sc.string()
        else:
            for text, op_kind in OPERATORS:
                if source.startswith(text, sc.pos):
                    kind, length = op_kind, len(text)
                    break
            else:
                raise sc.error(f"unexpected character {ch!r}")
        tokens.append(Token(kind, source[sc.pos:sc.pos + length], sc.line, sc.col, sc.pos))
        sc.advance(length)


def trivia(source: str, tokens: list[Token]) -> list[str]:
    """Return the whitespace/comment text preceding each token."""
    out = []
    prev_end = 0
    for tok in tokens:
        out.append(source[prev_end:tok.offset])
        prev_end = tok.offset + len(tok.lexeme)
    return out


def unescape(lexeme: str) -> str:
    """Decode a STRING_LIT lexeme (including its quotes) to its value."""
    body = lexeme[1:-1]
    out = []
    i = 0
    while i < len(body):
        if body[i] == "\\":
            out.append(body[i + 1])
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


def escape(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
