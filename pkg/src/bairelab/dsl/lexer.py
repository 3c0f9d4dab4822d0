from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

KEYWORDS = frozenset({"func", "limit", "gauge", "eps", "builtin", "piece", "on", "seq", "mode"})
OPERATORS = {"+": "+", "-": "-", "−": "-", "*": "*", "/": "/", "^": "^",
             ":": ":", ";": ";", "=": "=", "|": "|"}
PARENS = set("()[]{}")


class LexError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


@dataclass(frozen=True)
class Token:
    kind: str          # number | ident | operator | paren | comma | keyword
    lexeme: str
    span: tuple        # (byte offset, byte length)
    value: object = None

    def __repr__(self):
        return f"[{self.kind} {self.lexeme}]"


def tokenize(source: str) -> list[Token]:
    """Maximal-munch tokenizer.  ``1/3`` written without spaces is one number."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    offsets = [0]
    for ch in source:
        offsets.append(offsets[-1] + len(ch.encode("utf-8")))

    def span(i, j):
        return (offsets[i], offsets[j] - offsets[i])

    out: list[Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            elif j < n and source[j] == "/" and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            text = source[i:j]
            try:
                value = Fraction(text)
            except ZeroDivisionError:
                raise LexError(f"zero denominator in {text!r}", offsets[i]) from None
            out.append(Token("number", text, span(i, j), value))
            i = j
            continue
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i
            while j < n and source[j].isascii() and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "keyword" if text in KEYWORDS else "ident"
            out.append(Token(kind, text, span(i, j)))
            i = j
            continue
        if ch in OPERATORS:
            out.append(Token("operator", OPERATORS[ch], span(i, i + 1)))
            i += 1
            continue
        if ch in PARENS:
            out.append(Token("paren", ch, span(i, i + 1)))
            i += 1
            continue
        if ch == ",":
            out.append(Token("comma", ",", span(i, i + 1)))
            i += 1
            continue
        raise LexError(f"unrecognized character {ch!r}", offsets[i])
    return out
