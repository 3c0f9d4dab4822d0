from fractions import Fraction as F
from math import inf

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bairelab.approx import (ExtensionProblem, carrier_index, continuity_scan, equality_set,
                             extend_from_open, pieces_from_stable, stable_check,
                             stable_sequence)
from bairelab.dsl import parse_expr, var
from bairelab.functions import ExprFunc, FuncSeq, Step, seq_from_ast
from bairelab.sets import RSet

G01 = RSet.open(0, 1)
PHI = parse_expr("clamp(2*min(x, 1-x), 0, 1)")


def identity_problem(y0=5):
    g = seq_from_ast(var("x"), name="id", limit_hint=ExprFunc(var("x"), name="id"))
    return ExtensionProblem(G01, PHI, g, F(y0))


def test_extension_off_g_is_y0():
    seq = extend_from_open(identity_problem())
    for n in (1, 2, 7, 40):
        for x in (F(-1), F(0), F(1), F(3, 2)):
            assert seq.term(n)(x) == 5


def test_extension_centre_value():
    seq = extend_from_open(identity_problem())
    for n in (1, 3, 20):
        assert seq.term(n)(F(1, 2)) == F(1, 2)


def test_extension_transition_band_is_convex():
    seq = extend_from_open(identity_problem())
    for n in (1, 4, 12):
        x = F(1, n + 10)
        v = seq.term(n)(x)
        assert min(x, 5) <= v <= max(x, 5)


def test_extension_converges_past_carrier_index():
    P = identity_problem()
    seq = extend_from_open(P)
    for x in (F(1, 3), F(1, 17), F(9, 10), F(1, 100)):
        k = carrier_index(P, x)
        for n in range(k, k + 5):
            assert seq.term(n)(x) == x


def test_extension_terms_are_lipschitz():
    seq = extend_from_open(identity_problem())
    for n in (1, 5):
        assert continuity_scan(seq.term(n), points=200).passed


def test_invalid_phi_rejected():
    g = seq_from_ast(var("x"))
    with pytest.raises(ValueError):
        extend_from_open(ExtensionProblem(G01, parse_expr("1"), g, F(0)))


def test_stable_step_closed_form():
    seq = stable_sequence(Step())
    for n in (1, 2, 5, 10):
        t = seq.term(n)
        assert t(F(1, 2 * n)) == F(1, 2)
        assert t(F(1, 4 * n)) == F(1, 4)
        assert t(F(-1)) == 0


def test_stable_step_index():
    seq = stable_sequence(Step())
    x = F(1, 10)
    ks = [n for n in range(1, 30) if all(seq.term(m)(x) == 1 for m in range(n, 30))]
    assert min(ks) == 10


def test_stable_check_step():
    seq = stable_sequence(Step())
    st_ = stable_check(seq, Step(), samples=2000, horizon=4096, seed=2)
    assert st_.fraction == 1.0
    for x, k in zip(st_.points, st_.indices):
        if x > 0:
            assert k <= -(-1 // x)


def test_stable_check_non_stable_sequence():
    seq = seq_from_ast(var("x") / var("n"), name="x/n")
    zero = ExprFunc(parse_expr("0"))
    st_ = stable_check(seq, zero, samples=500, horizon=32)
    assert st_.stabilized == sum(1 for x in st_.points if x == 0)


def test_stable_check_constant_sequence():
    c = ExprFunc(parse_expr("3"))
    seq = FuncSeq(lambda n: c, "stable", c)
    st_ = stable_check(seq, c, samples=200, horizon=16)
    assert set(st_.indices) == {1}


def test_pieces_from_stable_step():
    sets = pieces_from_stable(stable_sequence(Step()), horizon=16)
    for n in range(1, 17):
        want = RSet.interval(-inf, 0, False, True) | RSet.interval(F(1, n), inf, True, False)
        assert sets.X_n[n].equals(want)
    assert sets.monotone()


def test_pieces_from_stable_constant_and_linear():
    c = ExprFunc(parse_expr("1"))
    sets = pieces_from_stable(FuncSeq(lambda n: c, "stable", c), horizon=6)
    assert all(S.equals(RSet.reals()) for S in sets.X_kn.values())
    lin = pieces_from_stable(seq_from_ast(var("x") / var("n")), horizon=6)
    assert lin.pair(3, 2).equals(RSet.points([0]))
    assert all(lin.X_n[n].equals(RSet.points([0])) for n in range(1, 7))


def test_equality_set_of_polynomials():
    a, b = ExprFunc(parse_expr("x^2")), ExprFunc(parse_expr("x"))
    assert equality_set(a, b).equals(RSet.points([0, 1]))


@settings(max_examples=40, deadline=None)
@given(st.fractions(F(1, 200), 2, max_denominator=1000))
def test_step_stabilises_by_reciprocal(x):
    seq = stable_sequence(Step())
    k = -(-1 // x)
    assert all(seq.term(n)(x) == 1 for n in range(k, k + 3))


@settings(max_examples=40, deadline=None)
@given(st.fractions(F(1, 1000), F(999, 1000), max_denominator=1000), st.integers(1, 30))
def test_extension_between_g_and_y0(x, n):
    seq = extend_from_open(identity_problem(y0=-3))
    v = seq.term(n)(x)
    assert min(x, -3) <= v <= max(x, -3)
