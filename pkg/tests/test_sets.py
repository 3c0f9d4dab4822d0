from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bairelab import enumeration as en
from bairelab.exact import DELTA_MAX
from bairelab.sets import (NotDiscrete, RSet, boolean_ops, classify_set, distance, member,
                           min_gap)


def test_distance_examples():
    assert distance(2, RSet.closed(0, 1)) == 1
    assert distance(F(1, 2), RSet.closed(0, 1)) == 0
    assert distance(0, RSet()) == DELTA_MAX


def test_member_examples():
    assert member(F(1, 2), RSet.closed(0, 1))
    assert not member(2, RSet.interval(0, 1, True, False))
    assert member(en.rational_at(5), RSet.rationals(10))


def test_boolean_examples():
    assert boolean_ops(RSet.closed(0, 2), RSet.closed(1, 3), "difference").equals(
        RSet.interval(0, 1, True, False))
    assert boolean_ops(RSet.open(0, 1), None, "complement").equals(
        RSet.reals() - RSet.open(0, 1))
    assert str(boolean_ops(RSet.open(0, 1), None, "complement")) == "(-inf, 0] ∪ [1, +inf)"
    got = boolean_ops(RSet.closed(1, 3), RSet.closed(0, 2), "difference")
    assert got.equals(RSet.interval(2, 3, False, True))


def test_difference_matches_grid_membership():
    A, B = RSet.closed(1, 3), RSet.closed(0, 2)
    D = A - B
    for k in range(-64, 5 * 64):
        x = F(k, 64)
        assert D.contains(x) == (A.contains(x) and not B.contains(x))


def test_classify_examples():
    assert classify_set(RSet.interval(2, 3, False, True)) == {"F_sigma", "G_delta", "ambiguous_1"}
    tags = classify_set(RSet.rationals(100))
    assert "F_sigma" in tags and "G_delta" not in tags
    assert classify_set(RSet.closed(0, 1)) == {"closed", "F_sigma", "G_delta", "ambiguous_1"}
    assert "open" in classify_set(RSet.open(0, 1))


def test_complement_of_rationals_is_not_f_sigma():
    tags = classify_set(RSet.reals() - RSet.rationals(100))
    assert "G_delta" in tags and "F_sigma" not in tags


def test_min_gap_examples():
    fam = min_gap([RSet.closed(0, 1), RSet.closed(3, 4)])
    assert fam.gap == 2
    assert fam.envelopes[0].equals(RSet.open(F(-2, 3), F(5, 3)))
    assert fam.envelopes[1].equals(RSet.open(F(7, 3), F(14, 3)))
    assert min_gap([RSet.closed(0, 1)]).gap == DELTA_MAX
    with pytest.raises(NotDiscrete):
        min_gap([RSet.closed(0, 1), RSet.closed(1, 2)])


def test_json_round_trip():
    S = RSet.closed(0, 1) | RSet.open(2, 3) | RSet.points([F(7, 2)])
    assert RSet.from_json(S.to_json()).equals(S)
    T = RSet.reals() - RSet.rationals(50)
    assert RSet.from_json(T.to_json()).equals(T)


# --- properties --------------------------------------------------------------

small = st.fractions(min_value=-4, max_value=4, max_denominator=8)


@st.composite
def rsets(draw):
    out = RSet()
    for _ in range(draw(st.integers(0, 3))):
        a, b = sorted((draw(small), draw(small)))
        if a == b:
            out = out | RSet.points([a])
        else:
            out = out | RSet.interval(a, b, draw(st.booleans()), draw(st.booleans()))
    return out


probe = [F(k, 16) for k in range(-80, 81)]


@settings(max_examples=60, deadline=None)
@given(rsets(), rsets())
def test_boolean_ops_pointwise(A, B):
    U, I, D = A | B, A & B, A - B
    for x in probe:
        a, b = A.contains(x), B.contains(x)
        assert U.contains(x) == (a or b)
        assert I.contains(x) == (a and b)
        assert D.contains(x) == (a and not b)


@settings(max_examples=60, deadline=None)
@given(rsets())
def test_complement_involution_and_de_morgan(A):
    assert (~~A).equals(A)
    B = RSet.closed(-1, 1)
    assert (~(A | B)).equals(~A & ~B)


@settings(max_examples=60, deadline=None)
@given(rsets(), small)
def test_distance_zero_iff_in_closure(A, x):
    if A.is_empty():
        assert distance(x, A) == DELTA_MAX
    else:
        assert (distance(x, A) == 0) == A.closure().contains(x)
