"""Recursive-descent parser for expressions, set literals and .bdsl programs.

Precedence, tightest first: ``^`` (right-assoc), unary minus, ``* /``, ``+ -``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..sets import NEG_INF, POS_INF, Interval, RSet, Tail
from .ast import FUNCTIONS, Node, const, dist, var
from .lexer import Token, tokenize


class ParseError(ValueError):
    def __init__(self, expected, token: Token | None):
        self.expected = frozenset(expected)
        self.position = "end-of-input" if token is None else token.span[0]
        found = "end of input" if token is None else repr(token.lexeme)
        super().__init__(f"expected one of {sorted(self.expected)} at {self.position}, found {found}")


class _Stream:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    def peek(self, k: int = 0) -> Token | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def at(self, lexeme: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t is not None and t.lexeme == lexeme and t.kind != "number"

    def take(self) -> Token:
        t = self.peek()
        if t is None:
            raise ParseError({"token"}, None)
        self.i += 1
        return t

    def expect(self, lexeme: str) -> Token:
        t = self.peek()
        if t is None or t.lexeme != lexeme or t.kind == "number":
            raise ParseError({lexeme}, t)
        self.i += 1
        return t

    def expect_kind(self, kind: str) -> Token:
        t = self.peek()
        if t is None or t.kind != kind:
            raise ParseError({kind}, t)
        self.i += 1
        return t

    def done(self) -> bool:
        return self.i >= len(self.toks)


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------

def _expr(s: _Stream) -> Node:
    left = _term(s)
    while s.at("+") or s.at("-"):
        op = s.take().lexeme
        right = _term(s)
        left = Node("add" if op == "+" else "sub", (left, right))
    return left


def _term(s: _Stream) -> Node:
    left = _unary(s)
    while s.at("*") or s.at("/"):
        op = s.take().lexeme
        right = _unary(s)
        left = Node("mul" if op == "*" else "div", (left, right))
    return left


def _unary(s: _Stream) -> Node:
    if s.at("-"):
        s.take()
        return Node("neg", (_unary(s),))
    return _power(s)


def _power(s: _Stream) -> Node:
    base = _atom(s)
    if s.at("^"):
        s.take()
        return Node("pow", (base, _unary(s)))
    return base


def _atom(s: _Stream) -> Node:
    t = s.peek()
    if t is None:
        raise ParseError({"number", "ident", "("}, None)
    if t.kind == "number":
        s.take()
        return const(t.value)
    if t.lexeme == "(" and t.kind == "paren":
        s.take()
        e = _expr(s)
        s.expect(")")
        return e
    if t.kind == "ident":
        s.take()
        name = t.lexeme
        if not s.at("("):
            return var(name)
        s.take()
        if name == "dist":
            S = _rset(s)
            s.expect(")")
            return dist(S)
        args = [_expr(s)]
        while s.at(","):
            s.take()
            args.append(_expr(s))
        s.expect(")")
        if name in FUNCTIONS:
            if len(args) != FUNCTIONS[name]:
                raise ParseError({f"{FUNCTIONS[name]} argument(s) for {name}"}, t)
            return Node(name, tuple(args))
        if len(args) != 1:
            raise ParseError({f"1 argument for {name}"}, t)
        return Node("call", (args[0],), name)
    raise ParseError({"number", "ident", "("}, t)


# ---------------------------------------------------------------------------
# set literals: [a,b] | (a,b) | {p, q} | enum(rationals, N) | R
# ---------------------------------------------------------------------------

def _bound(s: _Stream):
    sign = 1
    if s.at("-"):
        s.take()
        sign = -1
    elif s.at("+"):
        s.take()
    t = s.peek()
    if t is not None and t.kind == "ident" and t.lexeme == "inf":
        s.take()
        return NEG_INF if sign < 0 else POS_INF
    t = s.expect_kind("number")
    return sign * t.value


def _rterm(s: _Stream) -> RSet:
    t = s.peek()
    if t is not None and t.lexeme in ("[", "(") and t.kind == "paren":
        s.take()
        lo = _bound(s)
        s.expect(",")
        hi = _bound(s)
        close = s.peek()
        if close is None or close.lexeme not in ("]", ")"):
            raise ParseError({"]", ")"}, close)
        s.take()
        try:
            return RSet.make([Interval(lo, hi, t.lexeme == "[", close.lexeme == "]")])
        except ValueError as exc:
            raise ParseError({f"valid interval ({exc})"}, t) from None
    if t is not None and t.lexeme == "{":
        s.take()
        pts = []
        if not s.at("}"):
            pts.append(_bound(s))
            while s.at(","):
                s.take()
                pts.append(_bound(s))
        s.expect("}")
        return RSet.points(pts)
    if t is not None and t.kind == "ident" and t.lexeme == "enum":
        s.take()
        s.expect("(")
        name = s.expect_kind("ident").lexeme
        if name != "rationals":
            raise ParseError({"rationals"}, s.peek(-1))
        s.expect(",")
        N = int(s.expect_kind("number").value)
        s.expect(")")
        return RSet.rationals(N)
    if t is not None and t.kind == "ident" and t.lexeme == "R":
        s.take()
        return RSet.reals()
    raise ParseError({"[", "(", "{", "enum", "R"}, t)


def _rset(s: _Stream) -> RSet:
    S = _rterm(s)
    while s.at("|"):
        s.take()
        S = S.union(_rterm(s))
    return S


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def parse(tokens) -> Node:
    """Parse a full expression from a token list (or source text)."""
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    s = _Stream(list(tokens))
    e = _expr(s)
    if not s.done():
        raise ParseError({"end-of-input", "operator"}, s.peek())
    return e


def parse_expr(source: str) -> Node:
    return parse(tokenize(source))


def parse_rset(source: str) -> RSet:
    s = _Stream(tokenize(source))
    S = _rset(s)
    if not s.done():
        raise ParseError({"end-of-input", "|"}, s.peek())
    return S


# ---------------------------------------------------------------------------
# programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FuncDef:
    name: str
    pieces: tuple  # ((RSet, Node), ...)


@dataclass(frozen=True)
class LimitDef:
    name: str
    expr: Node
    mode: str


@dataclass(frozen=True)
class GaugeDef:
    name: str
    expr: Node


@dataclass(frozen=True)
class EpsDef:
    name: str
    expr: Node


@dataclass(frozen=True)
class BuiltinDef:
    name: str
    builtin: str
    params: tuple = ()


@dataclass
class Program:
    definitions: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.definitions[name]

    def names(self, cls=None):
        return [k for k, v in self.definitions.items() if cls is None or isinstance(v, cls)]


BUILTIN_NAMES = ("riemann", "dirichlet", "jumpsum", "step")
MODES = ("pointwise", "stable", "uniform")


def _skip_semis(s: _Stream):
    while s.at(";"):
        s.take()


def _func_form(s: _Stream) -> FuncDef:
    name = s.expect_kind("ident").lexeme
    s.expect("{")
    pieces = []
    _skip_semis(s)
    while not s.at("}"):
        s.expect("piece")
        s.expect("on")
        dom = _rset(s)
        s.expect(":")
        pieces.append((dom, _expr(s)))
        if not s.at("}"):
            s.expect(";")
        _skip_semis(s)
    s.expect("}")
    if not pieces:
        raise ParseError({"piece"}, s.peek(-1))
    return FuncDef(name, tuple(pieces))


def _limit_form(s: _Stream) -> LimitDef:
    name = s.expect_kind("ident").lexeme
    s.expect("{")
    s.expect("seq")
    s.expect("(")
    idx = s.expect_kind("ident")
    if idx.lexeme != "n":
        raise ParseError({"n"}, idx)
    s.expect(")")
    s.expect(":")
    expr = _expr(s)
    mode = "pointwise"
    _skip_semis(s)
    if s.at("mode"):
        s.take()
        s.expect(":")
        t = s.expect_kind("ident")
        if t.lexeme not in MODES:
            raise ParseError(set(MODES), t)
        mode = t.lexeme
        _skip_semis(s)
    s.expect("}")
    return LimitDef(name, expr, mode)


def _builtin_form(s: _Stream) -> BuiltinDef:
    name = s.expect_kind("ident").lexeme
    s.expect("=")
    t = s.expect_kind("ident")
    if t.lexeme not in BUILTIN_NAMES:
        raise ParseError(set(BUILTIN_NAMES), t)
    params = ()
    if t.lexeme == "jumpsum":
        s.expect("(")
        N = s.expect_kind("number").value
        s.expect(")")
        if N.denominator != 1 or N < 1:
            raise ParseError({"positive integer N"}, s.peek(-2))
        params = (int(N),)
    return BuiltinDef(name, t.lexeme, params)


def parse_program(source: str) -> Program:
    s = _Stream(tokenize(source))
    prog = Program()
    while not s.done():
        _skip_semis(s)
        if s.done():
            break
        t = s.take()
        if t.kind != "keyword" or t.lexeme not in ("func", "limit", "gauge", "eps", "builtin"):
            raise ParseError({"func", "limit", "gauge", "eps", "builtin"}, t)
        if t.lexeme == "func":
            d = _func_form(s)
        elif t.lexeme == "limit":
            d = _limit_form(s)
        elif t.lexeme == "builtin":
            d = _builtin_form(s)
        else:
            name = s.expect_kind("ident").lexeme
            s.expect(":")
            e = _expr(s)
            d = GaugeDef(name, e) if t.lexeme == "gauge" else EpsDef(name, e)
        if d.name in prog.definitions:
            raise ParseError({f"unique name (duplicate {d.name!r})"}, t)
        prog.definitions[d.name] = d
    return prog
