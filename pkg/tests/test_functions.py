import math
import pickle
from fractions import Fraction as F

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from bairelab import enumeration as en
from bairelab.dsl import parse_expr, parse_program
from bairelab.exact import Surd, generic_point, snap
from bairelab.functions import (Composite, Dirichlet, ExprFunc, JumpSum, PiecewiseFunc,
                                Reciprocals, Riemann, Sequenced, Step, Unresolvable,
                                barely_continuity_scan,
                                evaluate, oscillation, preimage)
from bairelab.sets import RSet


def test_enumeration_order():
    assert en.first(3) == (F(1, 2), F(1, 3), F(2, 3))
    for n in range(1, 200):
        assert en.index_of(en.rational_at(n)) == n


def test_jumpsum_at_r3():
    f, r3 = JumpSum(20), en.rational_at(3)
    want = sum(F(1, 2**n) for n in range(1, 21) if en.rational_at(n) <= r3)
    assert f(r3) == want
    assert f(r3) - f(r3 - F(1, 10**9)) >= F(1, 8)


def test_riemann_off_enumeration():
    assert evaluate(Riemann(1000), snap(math.sqrt(2))) == 0
    assert evaluate(Riemann(1000), generic_point(math.sqrt(2) / 2)) == 0
    assert evaluate(Riemann(1000), en.rational_at(7)) == F(1, 7)


def test_step_values():
    assert evaluate(Step(), -1) == 0
    assert evaluate(Step(), 0) == 0
    assert evaluate(Step(), 1) == 1


def test_preimage_step():
    P = preimage(Step(), RSet.open(F(1, 2), F(3, 2)))
    assert P.set.equals(RSet.open(0, math.inf))
    assert "open" in P.tags
    for k in range(-5000, 5000):
        x = F(k, 1000)
        assert P.set.contains(x) == (F(1, 2) < Step()(x) < F(3, 2))


def test_preimage_dirichlet_is_not_f_sigma():
    P = preimage(Dirichlet(1000), RSet.open(F(-1, 2), F(1, 2)))
    assert P.set.equals(RSet.reals() - RSet.rationals(1000))
    assert "F_sigma" not in P.tags


def test_preimage_of_empty():
    assert preimage(Step(), RSet()).set.is_empty()
    assert preimage(Dirichlet(), RSet()).set.is_empty()


def test_oscillation_dirichlet_is_one():
    for x in (F(1, 3), F(1, 7), generic_point(0.4)):
        assert set(oscillation(Dirichlet(1000), x).estimates) == {1}


def test_oscillation_square_bound():
    o = oscillation(ExprFunc(parse_expr("x^2")), 1)
    for k, e in enumerate(o.estimates, 1):
        assert e <= 3 * F(2) ** (-k + 1)
    assert o.monotone


def test_oscillation_riemann_at_enumerated_points():
    for m in (2, 5, 10):
        o = oscillation(Riemann(10**4), en.rational_at(m))
        assert abs(o.final - F(1, m)) <= F(1, 2**10)


def test_scan_examples():
    assert barely_continuity_scan(Riemann(1000), RSet.closed(0, 1), F(1, 10), budget=100).found
    assert not barely_continuity_scan(Dirichlet(1000), RSet.closed(0, 1), F(1, 2),
                                      budget=100).found


def test_scan_riemann_on_rationals_both_ways():
    Q = RSet.rationals(1000)
    hit = barely_continuity_scan(Riemann(1000), Q, F(1, 2), budget=100)
    assert hit.found and hit.label == "truncated-subspace"
    assert Riemann(1000)(hit.witness) < F(1, 2)
    miss = barely_continuity_scan(Riemann(1000), Q, F(1, 2000), budget=1000)
    assert not miss.found


def test_piecewise_from_program():
    src = "func pw { piece on (-inf,0]: x^2; piece on [0,inf): sin(x) }"
    f = PiecewiseFunc(parse_program(src)["pw"].pieces, name="pw")
    assert f(-2) == 4
    assert f(0) == 0
    assert f.consistency_check(samples=200) == []


def test_sequenced_push_forward_is_dirichlet():
    g = Sequenced(lambda n: F(1, n), F(0), "g", 1000, deep=0)
    h = g.then(Reciprocals(), deep=1)
    d = Dirichlet(1000)
    for n in range(1, 300):
        assert h(en.rational_at(n)) == d(en.rational_at(n)) == 1
    assert h(F(3, 2)) == 0
    assert h(generic_point(0.3)) == 0
    P = h.preimage(RSet.open(F(-1, 2), F(1, 2)))
    assert P.set.equals(RSet.reals() - RSet.rationals(1000))


def test_composite_matches_direct():
    f, g = ExprFunc(parse_expr("x^2")), Step()
    h = Composite(g, f)
    for k in range(-20, 21):
        x = F(k, 7)
        assert h(x) == g(f(x))


# --- properties --------------------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(st.floats(-3, 3, allow_nan=False), st.booleans())
def test_vec_agrees_with_exact(v, gen):
    from bairelab.exact import sample_point
    p = sample_point(v, gen)
    xs, gs = np.array([float(p)]), np.array([gen])
    for f in (Step(), JumpSum(20), Riemann(1000), Dirichlet(1000)):
        val, unc = f.vec(xs, gs)
        try:
            exact = f(p)
        except Unresolvable:
            continue
        if not unc[0]:
            assert abs(val[0] - float(exact)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.fractions(-2, 2, max_denominator=64), st.fractions(-2, 2, max_denominator=64))
def test_jumpsum_is_monotone(a, b):
    f = JumpSum(20)
    lo, hi = min(a, b), max(a, b)
    assert f(lo) <= f(hi)


@settings(max_examples=40, deadline=None)
@given(st.fractions(-3, 3, max_denominator=16), st.fractions(-3, 3, max_denominator=16))
def test_step_preimage_membership(a, b):
    if a == b:
        return
    V = RSet.open(min(a, b), max(a, b))
    P = preimage(Step(), V).set
    for k in range(-40, 41):
        x = F(k, 10)
        assert P.contains(x) == V.contains(Step()(x))


def test_surd_survives_pickling():
    s = Surd(F(1, 3), F(-2, 5))
    t = pickle.loads(pickle.dumps(s))
    assert (t.a, t.b) == (s.a, s.b)
