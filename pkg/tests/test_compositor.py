from fractions import Fraction as F

import pytest

from bairelab import enumeration as en
from bairelab.approx import stable_sequence
from bairelab.compositor import (B_IDS, C_IDS, NEGATIVE, POSITIVE, BadWitness, base_compose,
                                 classify_report, compose_witness, consistency, interval_base,
                                 left_demo, pieces_base, ramp_jumpsum_sequence,
                                 random_open_intervals)
from bairelab.dsl import parse_expr
from bairelab.functions import ExprFunc, FuncSeq, JumpSum, Step
from bairelab.sets import RSet

G = ExprFunc(parse_expr("3*x - 1"), name="g")


def const_seq(c):
    f = ExprFunc(parse_expr(str(c)))
    return FuncSeq(lambda n: f, "stable", f, None, f"const {c}")


def test_ramp_sequence_converges_at_jumps():
    seq = ramp_jumpsum_sequence(20)
    J = JumpSum(20)
    for n in (1, 3, 7):
        r = en.rational_at(n)
        assert seq.term(200)(r) == J(r)
        assert seq.term(200)(r - F(1, 10**6)) != J(r)


def test_compose_witness_step_jumpsum():
    _, rep = compose_witness(stable_sequence(Step()), ramp_jumpsum_sequence(20), samples=300,
                             horizon=48)
    k = max(k for k in rep.stab_index if k is not None)
    for m in range(1, 49):
        if m >= k + 20:
            assert rep.deviation(m) <= 2.0 ** (-m + 2)


def test_compose_with_constant_g():
    _, rep = compose_witness(stable_sequence(Step()), const_seq(F(2, 3)), samples=100,
                             horizon=8)
    assert set(rep.max_dev) == {0.0}


def test_compose_with_constant_f():
    _, rep = compose_witness(const_seq(F(1, 2)), ramp_jumpsum_sequence(20), samples=50,
                             horizon=30)
    seq, J = ramp_jumpsum_sequence(20), JumpSum(20)
    for n in range(1, 31):
        assert rep.deviation(n) == pytest.approx(float(abs(seq.term(n)(F(1, 2)) - J(F(1, 2)))))


def test_base_compose_step():
    f = Step()
    _, cert = base_compose(f, pieces_base(f), G, interval_base(depth=4),
                           random_open_intervals(20, seed=0))
    assert cert.passed


def test_base_compose_trivial_corpora():
    f = Step()
    base = interval_base(depth=3)
    _, cert = base_compose(f, pieces_base(f), G, base, [RSet()])
    assert cert.rows[0][1].is_empty() and cert.rows[0][2].is_empty()
    _, cert = base_compose(f, pieces_base(f), G, base, [RSet.reals()])
    assert cert.covers and cert.rows[0][3]


def test_left_demo_default():
    d = left_demo(samples=2000, scan_points=300)
    assert d.passed
    assert d.h(F(1, 2)) == 1
    assert d.g(en.rational_at(9)) == F(1, 9)
    assert d.h(F(3, 2)) == 0
    assert d.preimage_check["not_F_sigma"]
    assert d.oscillation_scan["all_equal_one"]
    assert all(b.equals(RSet.points([en.rational_at(n)]))
               for n, b in enumerate(d.partition.outputs, 1))


def test_left_demo_rejects_continuous_f():
    with pytest.raises(BadWitness):
        left_demo(f=ExprFunc(parse_expr("x")), N=20, samples=10, scan_points=10)


def table(f, **kw):
    rep = classify_report(f, pairs=20_000, scan=100, **kw)
    return {k: rep.verdict(k) for k in B_IDS + C_IDS}, rep


def test_classify_step():
    t, rep = table(Step())
    assert all(t[k] in POSITIVE for k in B_IDS + C_IDS)
    assert all(t[k] == "witnessed" for k in ("B1", "B3", "B4"))
    assert t["B5"] == "derived-by-theorem"
    assert rep.consistency["consistent"]


def test_classify_jumpsum_split():
    t, rep = table(JumpSum(20))
    assert all(t[k] == "witnessed" for k in ("C2", "C3", "C4", "C5"))
    assert t["B2"] == "refuted-at-truncation"
    assert rep.consistency["consistent"]


def test_classify_dirichlet_refuted():
    from bairelab.functions import Dirichlet
    t, rep = table(Dirichlet(1000))
    assert t["C3"] == "refuted" and t["C5"] == "refuted"
    assert rep.conditions["C5"].evidence["counterexample"]["eps"] == "1/2"


def test_consistency_flags_forbidden_tables():
    from bairelab.compositor import Verdict
    V = {k: Verdict(k, "inconclusive") for k in B_IDS + C_IDS}
    V["B2"] = Verdict("B2", "witnessed")
    V["C5"] = Verdict("C5", "refuted")
    assert not consistency(V)["consistent"]
    V["C5"] = Verdict("C5", "witnessed")
    assert consistency(V)["consistent"]


def test_report_schema():
    _, rep = table(Step())
    js = rep.to_json()
    assert set(js) >= {"function", "conditions", "seed", "budgets", "truncation"}
    assert [c["id"] for c in js["conditions"]] == list(B_IDS + C_IDS)
    assert all(set(c) >= {"id", "verdict", "evidence"} for c in js["conditions"])
    assert all(c["verdict"] in POSITIVE | NEGATIVE | {"inconclusive"} for c in js["conditions"])
