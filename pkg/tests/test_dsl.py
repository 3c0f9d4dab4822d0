from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bairelab.dsl import (BuiltinDef, DomainError, EpsDef, FuncDef, GaugeDef, LimitDef,
                          ParseError, dist, eval_ast, parse_expr, parse_program, to_source,
                          tokenize)
from bairelab.sets import RSet


def lexemes(src):
    return [(t.kind, t.lexeme) for t in tokenize(src)]


def test_tokenize_examples():
    assert lexemes("x^2 + 1/3") == [("ident", "x"), ("operator", "^"), ("number", "2"),
                                    ("operator", "+"), ("number", "1/3")]
    assert tokenize("") == []


def test_piece_header_token_count():
    # piece, on, [, 0, ",", 1, ], :, sin, (, x, ) -- the colon is a token of its own
    assert len(tokenize("piece on [0,1]: sin(x)")) == 12


def test_parse_precedence():
    e = parse_expr("2+3*x")
    assert e.kind == "add"
    assert e.children[1].kind == "mul"
    assert to_source(e) == "(2 + (3 * x))"


def test_power_is_right_associative():
    for x in (0, 1, F(7, 3)):
        assert eval_ast(parse_expr("2^3^2"), x) == 512


def test_unterminated_call():
    with pytest.raises(ParseError, match="end"):
        parse_expr("min(x, 1-x")


def test_eval_examples():
    assert eval_ast(parse_expr("2+3*x"), 4) == 14
    assert eval_ast(dist(RSet.closed(0, 1)), 2) == 1
    with pytest.raises(DomainError):
        eval_ast(parse_expr("1/x"), 0)


def test_program_forms():
    prog = parse_program(
        "func pw { piece on (-inf,0]: x^2; piece on [0,inf): sin(x) }\n"
        "gauge d: abs(x)/2\neps e: 1/4 + x/2\n"
        "limit L { seq(n): x/n; mode: pointwise }\nbuiltin j = jumpsum(20)\n")
    assert isinstance(prog["pw"], FuncDef) and len(prog["pw"].pieces) == 2
    assert isinstance(prog["d"], GaugeDef)
    assert isinstance(prog["e"], EpsDef)
    assert isinstance(prog["L"], LimitDef) and prog["L"].mode == "pointwise"
    assert prog["j"] == BuiltinDef("j", "jumpsum", (20,))


def test_duplicate_names_rejected():
    with pytest.raises(ParseError):
        parse_program("gauge d: 1\ngauge d: 2")


def test_exact_arithmetic():
    assert eval_ast(parse_expr("1/3 + 1/6"), 0) == F(1, 2)
    assert eval_ast(parse_expr("clamp(2*x, 0, 1)"), F(1, 4)) == F(1, 2)


# --- properties --------------------------------------------------------------

leaf = st.one_of(st.just("x"), st.integers(0, 9).map(str), st.just("1/3"))
expr = st.recursive(
    leaf,
    lambda kids: st.one_of(
        st.tuples(kids, st.sampled_from(["+", "-", "*"]), kids).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        kids.map(lambda k: f"abs({k})"),
        st.tuples(kids, kids).map(lambda t: f"min({t[0]}, {t[1]})")),
    max_leaves=8)


@settings(max_examples=100, deadline=None)
@given(expr, st.fractions(-5, 5, max_denominator=12))
def test_source_round_trip_preserves_value(src, x):
    e = parse_expr(src)
    again = parse_expr(to_source(e))
    assert eval_ast(again, x) == eval_ast(e, x)
    assert to_source(again) == to_source(e)


@settings(max_examples=100, deadline=None)
@given(st.fractions(-10, 10, max_denominator=50), st.fractions(-10, 10, max_denominator=50))
def test_arithmetic_agrees_with_fractions(a, b):
    env = {"a": a, "b": b}
    assert eval_ast(parse_expr("a*b - a + b"), 0, env=env) == a * b - a + b
