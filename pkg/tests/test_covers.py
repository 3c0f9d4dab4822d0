from fractions import Fraction as F
from math import inf

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bairelab.covers import (ConstantGauge, FormulaGauge, cover_from_gauge, explicit_cover,
                             gauge_for_epsilon, gauge_from_cover, reduction_partition,
                             refine_cover, variable_gauge)
from bairelab.dsl import parse_expr
from bairelab.exact import DELTA_MAX
from bairelab.falsify import EpsilonSpec, eps_delta_falsify
from bairelab.functions import ExprFunc, JumpSum, PiecewiseFunc, Step
from bairelab.sets import RSet, pairwise_gap

from bairelab.dsl import const

W = (F(-2), F(2))
LEFT = RSet.interval(-inf, 0, False, True)


def test_refine_two_separated_pieces():
    C = refine_cover([LEFT, RSet.interval(1, inf, True, False)], W)
    for n in range(1, 8):
        assert len(C.members(n)) == 2
        assert C.level(n).gap >= 1
    assert C.check()["links_ok"]


def test_refine_single_piece():
    C = refine_cover([RSet.reals()], W)
    assert all(len(C.members(n)) == 1 for n in range(1, 5))
    assert C.members(1)[0].equals(RSet.reals())


def test_refine_step_cover_levels_are_separated():
    C = refine_cover([LEFT, RSet.interval(0, inf, False, False)], W)
    for k in range(1, 10):
        ms = C.members(k)
        if len(ms) > 1:
            gap, _ = pairwise_gap(ms)
            assert gap > 0


def test_gauge_from_explicit_cover():
    C = explicit_cover([[RSet.closed(0, 1), RSet.closed(3, 4)],
                        [RSet.closed(-1, F(3, 2)), RSet.closed(F(5, 2), 5)],
                        [RSet.reals()]])
    _, g = gauge_from_cover(C)
    assert g(0) == 3
    assert g(F(7, 2)) == F(5, 2)
    assert g(2) == DELTA_MAX
    # x = 0, y = 7/2: d(x, y) = 7/2 >= min(3, 5/2), so nothing is claimed
    assert not abs(0 - F(7, 2)) < min(g(0), g(F(7, 2)))


def test_singleton_cover_gauge():
    _, g = gauge_from_cover(explicit_cover([[RSet.reals()]]))
    assert g(F(1, 3)) == DELTA_MAX


def test_cover_from_distance_gauge_on_step():
    G = FormulaGauge(parse_expr("abs(x)/2"))
    assert G.level_set(F(1, 4), W).equals(
        RSet.open(-inf, F(-1, 2)) | RSet.points([0]) | RSet.open(F(1, 2), inf))
    cover, cert = cover_from_gauge(Step(), G, F(1, 2), pairs=20_000)
    assert cert.passed and cert.max_diameter <= 3 / 8 + 2**-30


def test_constant_gauge_continuous_case():
    _, cert = cover_from_gauge(ExprFunc(parse_expr("x/8")), ConstantGauge(1), F(1, 2),
                               pairs=20_000)
    assert cert.passed and cert.max_diameter < 1 / 8


def test_invalid_gauge_rejected():
    _, cert = cover_from_gauge(Step(), ConstantGauge(1), F(1, 2), pairs=20_000)
    assert not cert.passed and cert.max_diameter == 1


def test_reduction_examples():
    red = reduction_partition([RSet.closed(0, 2), RSet.closed(1, 3)])
    assert red.outputs[0].equals(RSet.closed(0, 2))
    assert red.outputs[1].equals(RSet.interval(2, 3, False, True))
    chk = red.check()
    assert chk["disjoint"] and chk["contained"] and chk["union_equal"]
    S = RSet.closed(0, 1)
    assert reduction_partition([S]).outputs[0].equals(S)
    dup = reduction_partition([S, S]).outputs
    assert dup[0].equals(S) and dup[1].is_empty()


def test_reduction_rejects_non_f_sigma():
    with pytest.raises(ValueError):
        reduction_partition([RSet.reals() - RSet.rationals(50)])


@pytest.mark.parametrize("eps", [F(1, 2), F(1, 4)])
def test_gauge_for_step_validates(eps):
    g = gauge_for_epsilon(Step(), eps, validate_pairs=50_000)
    assert g.validation.passed
    assert g(F(1, 2)) > 0 and g(F(-1, 3)) > 0


def test_jumpsum_special_gauge():
    g = gauge_for_epsilon(JumpSum(20), F(1, 4), validate_pairs=50_000)
    assert g.describe().startswith("jump:")
    assert g.validation.passed


def _eps_jump():
    return PiecewiseFunc([(RSet.interval(-inf, F(1, 2), False, False), const(F(1, 4))),
                          (RSet.interval(F(1, 2), inf, True, False), const(F(1, 8)))],
                         name="jump")


@pytest.mark.parametrize("eps_func", [ExprFunc(parse_expr("1/4 + x/2")), _eps_jump()])
def test_variable_gauge_step(eps_func):
    _, g, red = variable_gauge(Step(), EpsilonSpec(func=eps_func), validate_pairs=10**5)
    assert g.validation.passed and g.validation.budget_met
    assert red.check()["disjoint"]


def test_variable_gauge_constant_reduces():
    _, g, red = variable_gauge(Step(), EpsilonSpec.const(F(1, 2)), validate_pairs=20_000)
    assert g.validation.passed
    nonempty = [b for b in red.outputs if not b.is_empty()]
    assert len(nonempty) == 1 and nonempty[0].equals(RSet.reals())


# --- properties --------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.lists(st.fractions(-2, 2, max_denominator=8), min_size=1, max_size=4, unique=True))
def test_refined_levels_are_discrete(cuts):
    cuts = sorted(cuts)
    pts = [-inf] + cuts + [inf]
    pieces = [RSet.interval(a, b, a != -inf, False) for a, b in zip(pts, pts[1:])]
    pieces[-1] = RSet.interval(cuts[-1], inf, True, False)
    C = refine_cover(pieces, W, truncation=6)
    for n in range(1, C.n_levels + 1):
        ms = C.members(n)
        if len(ms) > 1:
            assert pairwise_gap(ms)[0] > 0


@settings(max_examples=10, deadline=None)
@given(st.fractions(F(1, 16), 1, max_denominator=16), st.integers(0, 2**16))
def test_step_gauges_never_violate(eps, seed):
    g = gauge_for_epsilon(Step(), eps, validate_pairs=0)
    rep = eps_delta_falsify(Step(), g, eps, pairs=5_000, seed=seed)
    assert rep.passed
