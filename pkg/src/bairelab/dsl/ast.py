from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..exact import fmt_number
from ..sets import NEG_INF, POS_INF, RSet

ARITY = {
    "const": 0, "var": 0, "dist": 0,
    "add": 2, "sub": 2, "mul": 2, "div": 2, "pow": 2, "min": 2, "max": 2,
    "neg": 1, "abs": 1, "sin": 1, "cos": 1, "exp": 1,
    "clamp": 3, "call": 1,
}
FUNCTIONS = {"min": 2, "max": 2, "abs": 1, "sin": 1, "cos": 1, "exp": 1, "clamp": 3}
TRANSCENDENTAL = frozenset({"sin", "cos", "exp"})
BINOP_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


@dataclass(frozen=True)
class Node:
    kind: str
    children: tuple = ()
    value: object = None

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if len(self.children) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} expects {ARITY[self.kind]} children")

    # convenience constructors keep programmatic ASTs readable
    def __add__(self, o):
        return Node("add", (self, lift(o)))

    def __radd__(self, o):
        return Node("add", (lift(o), self))

    def __sub__(self, o):
        return Node("sub", (self, lift(o)))

    def __rsub__(self, o):
        return Node("sub", (lift(o), self))

    def __mul__(self, o):
        return Node("mul", (self, lift(o)))

    def __rmul__(self, o):
        return Node("mul", (lift(o), self))

    def __truediv__(self, o):
        return Node("div", (self, lift(o)))

    def __rtruediv__(self, o):
        return Node("div", (lift(o), self))

    def __neg__(self):
        return Node("neg", (self,))

    def __str__(self):
        return to_source(self)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def variables(self) -> set:
        return {n.value for n in self.walk() if n.kind == "var"}

    def uses(self, kinds) -> bool:
        return any(n.kind in kinds for n in self.walk())

    @property
    def rational_closed(self) -> bool:
        for n in self.walk():
            if n.kind in TRANSCENDENTAL or n.kind == "call":
                return False
            if n.kind == "pow":
                e = n.children[1]
                if e.variables() or e.uses({"dist"}):
                    return False
        return True


def const(v) -> Node:
    return Node("const", (), Fraction(v))


def var(name: str = "x") -> Node:
    return Node("var", (), name)


def lift(v) -> Node:
    return v if isinstance(v, Node) else const(v)


def call(kind: str, *args) -> Node:
    return Node(kind, tuple(lift(a) for a in args))


def dist(S: RSet) -> Node:
    # distance only depends on the closure, so store that
    return Node("dist", (), S.closure())


def substitute(node: Node, name: str, value) -> Node:
    if node.kind == "var" and node.value == name:
        return lift(value)
    if not node.children:
        return node
    return Node(node.kind, tuple(substitute(c, name, value) for c in node.children), node.value)


def rset_source(S: RSet) -> str:
    ivs = S.closure_plain if S.tail is not None else S.intervals
    if not ivs:
        return "{}"
    parts = []
    for iv in ivs:
        if iv.is_point:
            parts.append("{" + _num(iv.lo) + "}")
        else:
            parts.append(("[" if iv.lo_closed else "(") + _num(iv.lo) + ", " + _num(iv.hi)
                         + ("]" if iv.hi_closed else ")"))
    return " | ".join(parts)


def _num(v) -> str:
    if v == NEG_INF:
        return "-inf"
    if v == POS_INF:
        return "inf"
    if v < 0:
        return "-" + fmt_number(-v)
    return fmt_number(v)


def to_source(node: Node) -> str:
    """Fully parenthesized source; parsing it yields an identical tree."""
    k = node.kind
    if k == "const":
        v = node.value
        return fmt_number(v) if v >= 0 else "(-" + fmt_number(-v) + ")"
    if k == "var":
        return node.value
    if k in BINOP_SYMBOL:
        a, b = node.children
        return f"({to_source(a)} {BINOP_SYMBOL[k]} {to_source(b)})"
    if k == "neg":
        return f"(-{to_source(node.children[0])})"
    if k == "dist":
        return f"dist({rset_source(node.value)})"
    if k == "call":
        return f"{node.value}({to_source(node.children[0])})"
    return f"{k}(" + ", ".join(to_source(c) for c in node.children) + ")"
