"""Tokenizer and recursive-descent parser for `.lrp` sources."""

import enum
import re
from dataclasses import dataclass
from typing import Callable, List, Optional

from lrp.lang.ast import (
    INT,
    UNIT,
    App,
    ArrowType,
    EraseProp,
    Expr,
    Extract,
    Func,
    GetProp,
    IfHas,
    IntLit,
    Let,
    Minus,
    Plus,
    SetProp,
    Type,
    UnitLit,
    Var,
)
from lrp.lang.errors import ParseError, Position

KEYWORDS = frozenset(
    {
        "func",
        "with",
        "in",
        "let",
        "if-has",
        "bind-as",
        "else",
        "extract",
        "set",
        "get",
        "erase",
        "int",
        "unit",
    },
)

MAX_INT = 2**63 - 1


class TokenKind(str, enum.Enum):
    """Lexical categories."""

    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "integer"
    PUNCT = "punct"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    """A lexeme with its 1-based source position."""

    kind: TokenKind
    text: str
    line: int
    col: int

    @property
    def position(self) -> Position:
        """Start of the token."""
        return Position(self.line, self.col)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
    |(?P<comment>--[^\n]*)
    |(?P<keyword>(?:if-has|bind-as)(?![A-Za-z0-9_']))
    |(?P<word>[A-Za-z_][A-Za-z0-9_']*)
    |(?P<int>[0-9]+)
    |(?P<punct>->|[()=:,+\-])
    """,
    re.VERBOSE,
)


def _last_position(source: str) -> Position:
    stripped = source.rstrip()
    if not stripped:
        return Position(1, 1)
    line = stripped.count("\n") + 1
    col = len(stripped) - (stripped.rfind("\n") + 1)
    return Position(line, col)


def tokenize(source: str) -> List[Token]:
    """
    Split a source text into tokens.

    :param source: program text.
    :raises ParseError: on a character outside the token alphabet.
    :return: tokens, terminated by an EOF token.
    """
    tokens: List[Token] = []
    offset, line, line_start = 0, 1, 0
    while offset < len(source):
        match = _TOKEN_RE.match(source, offset)
        col = offset - line_start + 1
        if match is None:
            raise ParseError(f"unexpected character {source[offset]!r}", line, col)
        group = match.lastgroup
        text = match.group()
        if group == "keyword":
            tokens.append(Token(TokenKind.KEYWORD, text, line, col))
        elif group == "word":
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, text, line, col))
        elif group == "int":
            tokens.append(Token(TokenKind.INT, text, line, col))
        elif group == "punct":
            tokens.append(Token(TokenKind.PUNCT, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = offset + text.rfind("\n") + 1
        offset = match.end()
    end = _last_position(source)
    tokens.append(Token(TokenKind.EOF, "", end.line, end.col))
    return tokens


class Parser:
    """
    Recursive-descent parser over a token list.

    Application binds tighter than `+`/`-`, both of which are
    left-associative; `->` is right-associative.
    """

    def __init__(self, tokens: List[Token]) -> None:
        self.tokens = tokens
        self.index = 0

    @property
    def current(self) -> Token:
        """Token under the cursor; EOF once input is exhausted."""
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.current
        if token.kind != TokenKind.EOF:
            self.index += 1
        return token

    def _error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.current
        if token.kind == TokenKind.EOF:
            return ParseError(f"{message}, found end of input", token.line, token.col)
        return ParseError(f"{message}, found {token.text!r}", token.line, token.col)

    def _at(self, kind: TokenKind, text: Optional[str] = None) -> bool:
        token = self.current
        return token.kind == kind and (text is None or token.text == text)

    def _expect(self, kind: TokenKind, text: Optional[str] = None) -> Token:
        if not self._at(kind, text):
            raise self._error(f"expected {text or kind.value}")
        return self._advance()

    def _keyword(self, text: str) -> Token:
        return self._expect(TokenKind.KEYWORD, text)

    def _punct(self, text: str) -> Token:
        return self._expect(TokenKind.PUNCT, text)

    def _ident(self) -> str:
        return self._expect(TokenKind.IDENT).text

    def parse_program(self) -> Expr:
        """Parse a whole program; trailing tokens are an error."""
        expr = self.parse_expr()
        if not self._at(TokenKind.EOF):
            raise self._error("expected end of input")
        return expr

    def parse_expr(self) -> Expr:
        """Parse one expression. Binders extend as far right as possible."""
        if self._at(TokenKind.KEYWORD, "func"):
            return self._parse_func()
        if self._at(TokenKind.KEYWORD, "let"):
            return self._parse_let()
        if self._at(TokenKind.KEYWORD, "if-has"):
            return self._parse_if_has()
        return self._parse_arith()

    def _parse_func(self) -> Expr:
        start = self._keyword("func").position
        fname = self._ident()
        param = self._ident()
        self._punct(":")
        param_type = self.parse_type()
        self._keyword("with")
        body = self.parse_expr()
        self._keyword("in")
        cont = self.parse_expr()
        return Func(fname, param, param_type, body, cont, pos=start)

    def _parse_let(self) -> Expr:
        start = self._keyword("let").position
        name = self._ident()
        self._punct("=")
        bound = self.parse_expr()
        self._keyword("in")
        body = self.parse_expr()
        return Let(name, bound, body, pos=start)

    def _parse_if_has(self) -> Expr:
        start = self._keyword("if-has").position
        if not self._at(TokenKind.IDENT):
            raise self._error("if-has scrutinee must be an identifier")
        scrutinee = self._ident()
        prop = self._ident()
        self._punct(":")
        prop_type = self.parse_type()
        self._keyword("bind-as")
        bind_as = self._ident()
        self._keyword("in")
        then_branch = self.parse_expr()
        self._keyword("else")
        else_branch = self.parse_expr()
        return IfHas(
            scrutinee,
            prop,
            prop_type,
            bind_as,
            then_branch,
            else_branch,
            pos=start,
        )

    def _parse_arith(self) -> Expr:
        left = self._parse_app()
        while self._at(TokenKind.PUNCT, "+") or self._at(TokenKind.PUNCT, "-"):
            op = self._advance()
            right = self._parse_app()
            node: Callable[..., Expr] = Plus if op.text == "+" else Minus
            left = node(left, right, pos=op.position)
        return left

    def _starts_atom(self) -> bool:
        token = self.current
        if token.kind in {TokenKind.INT, TokenKind.IDENT}:
            return True
        if token.kind == TokenKind.PUNCT:
            return token.text == "("
        return token.kind == TokenKind.KEYWORD and token.text in {
            "extract",
            "set",
            "get",
            "erase",
        }

    def _parse_app(self) -> Expr:
        fn = self._parse_atom()
        while self._starts_atom():
            start = self.current.position
            fn = App(fn, self._parse_atom(), pos=start)
        return fn

    def _parse_atom(self) -> Expr:  # noqa: C901
        token = self.current
        if token.kind == TokenKind.INT:
            self._advance()
            value = int(token.text)
            if value > MAX_INT:
                raise ParseError(
                    "integer literal out of 64-bit range",
                    token.line,
                    token.col,
                )
            return IntLit(value, pos=token.position)
        if token.kind == TokenKind.IDENT:
            self._advance()
            return Var(token.text, pos=token.position)
        if self._at(TokenKind.PUNCT, "("):
            self._advance()
            if self._at(TokenKind.PUNCT, ")"):
                self._advance()
                return UnitLit(pos=token.position)
            inner = self.parse_expr()
            self._punct(")")
            return inner
        if token.kind == TokenKind.KEYWORD:
            if token.text == "extract":
                self._advance()
                self._punct("(")
                target = self.parse_expr()
                self._punct(")")
                return Extract(target, pos=token.position)
            if token.text == "set":
                self._advance()
                self._punct("(")
                target = self.parse_expr()
                self._punct(",")
                prop = self._ident()
                self._punct(",")
                value = self.parse_expr()
                self._punct(")")
                return SetProp(target, prop, value, pos=token.position)
            if token.text in {"get", "erase"}:
                self._advance()
                self._punct("(")
                target = self.parse_expr()
                self._punct(",")
                prop = self._ident()
                self._punct(")")
                if token.text == "get":
                    return GetProp(target, prop, pos=token.position)
                return EraseProp(target, prop, pos=token.position)
        raise self._error("expected an expression")

    def parse_type(self) -> Type:
        """Parse a type; `->` associates to the right."""
        domain = self._parse_type_atom()
        if self._at(TokenKind.PUNCT, "->"):
            self._advance()
            return ArrowType(domain, self.parse_type())
        return domain

    def _parse_type_atom(self) -> Type:
        if self._at(TokenKind.KEYWORD, "int"):
            self._advance()
            return INT
        if self._at(TokenKind.KEYWORD, "unit"):
            self._advance()
            return UNIT
        if self._at(TokenKind.PUNCT, "("):
            self._advance()
            inner = self.parse_type()
            self._punct(")")
            return inner
        raise self._error("expected a type")


def parse_program(source: str) -> Expr:
    """
    Parse a whole program.

    :param source: program text.
    :raises ParseError: on the first lexical or syntactic error.
    :return: surface expression.
    """
    return Parser(tokenize(source)).parse_program()


def parse_type(source: str) -> Type:
    """Parse a standalone type, e.g. `int -> int`."""
    parser = Parser(tokenize(source))
    result = parser.parse_type()
    if not parser._at(TokenKind.EOF):  # noqa: SLF001
        raise parser._error("expected end of input")  # noqa: SLF001
    return result
