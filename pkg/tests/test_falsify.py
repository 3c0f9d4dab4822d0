from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from bairelab.covers import ConstantGauge, FormulaGauge
from bairelab.dsl import parse_expr
from bairelab.exact import generic_point
from bairelab.falsify import EpsilonSpec, decide_exact, eps_delta_falsify, replay
from bairelab.functions import Dirichlet, ExprFunc, Step

D10 = ConstantGauge(F(1, 10))


def test_dirichlet_explicit_pair_violates():
    ant, v = decide_exact(Dirichlet(), D10, EpsilonSpec.const(F(1, 2)), F(1, 2),
                          generic_point(0.5 + 1 / 128))
    assert ant and v is not None and v.gap == 1


def test_dirichlet_campaign_finds_violation():
    rep = eps_delta_falsify(Dirichlet(), D10, F(1, 2), pairs=10_000, seed=3)
    assert rep.violation_count > 0
    assert replay(rep.violations, Dirichlet(), D10, EpsilonSpec.const(F(1, 2)))


def test_continuous_function_passes():
    f = ExprFunc(parse_expr("x/4"))
    rep = eps_delta_falsify(f, ConstantGauge(1), F(1, 2), pairs=50_000)
    assert rep.passed and rep.budget_met


def test_step_distance_gauge_passes():
    rep = eps_delta_falsify(Step(), FormulaGauge(parse_expr("abs(x)/2")), F(1, 2), pairs=10**5,
                            seed=7)
    assert rep.passed and rep.pairs_tested >= 10**5


def test_invalid_constant_gauge_on_step_fails():
    rep = eps_delta_falsify(Step(), ConstantGauge(1), F(1, 2), pairs=10_000)
    assert not rep.passed
    assert all(v.x <= 0 < v.y or v.y <= 0 < v.x for v in rep.violations)


def test_report_json_is_stable():
    a = eps_delta_falsify(Dirichlet(), D10, F(1, 2), pairs=5_000, seed=1).to_json()
    b = eps_delta_falsify(Dirichlet(), D10, F(1, 2), pairs=5_000, seed=1).to_json()
    assert a == b


def test_worker_count_does_not_change_result():
    G = FormulaGauge(parse_expr("abs(x)/2"))
    one = eps_delta_falsify(Step(), G, F(1, 2), pairs=70_000, seed=5, workers=1).to_json()
    two = eps_delta_falsify(Step(), G, F(1, 2), pairs=70_000, seed=5, workers=2).to_json()
    assert one == two


def test_epsilon_spec_validation():
    import pytest
    with pytest.raises(ValueError):
        EpsilonSpec()
    with pytest.raises(ValueError):
        EpsilonSpec.const(0)
    assert EpsilonSpec.const(F(1, 2)).condition == "eq_1_3"


@settings(max_examples=30, deadline=None)
@given(st.fractions(-2, 2, max_denominator=64), st.fractions(-2, 2, max_denominator=64))
def test_step_violations_straddle_zero(x, y):
    ant, v = decide_exact(Step(), ConstantGauge(1), EpsilonSpec.const(F(1, 2)), x, y)
    if v is not None:
        assert (x <= 0) != (y <= 0)
    if abs(x - y) >= 1:
        assert not ant
