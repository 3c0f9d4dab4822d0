"""Acceptance criteria, one test each, with one PASS/FAIL line printed per criterion.

Each ``build_*`` function returns the JSON report a criterion is judged on.  The
determinism criterion rebuilds every report (campaign reports with 4 workers)
and compares the serialized bytes with the first run.
"""
import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from bairelab import enumeration as en
from bairelab.approx import (ExtensionProblem, carrier_index, continuity_scan, extend_from_open,
                             pieces_from_stable, stable_check, stable_sequence)
from bairelab.compositor import (B_IDS, C_IDS, base_compose, classify_report, compose_witness,
                                 interval_base, left_demo, pieces_base, ramp_jumpsum_sequence,
                                 random_open_intervals)
from bairelab.covers import ConstantGauge, FormulaGauge, cover_from_gauge, gauge_for_epsilon
from bairelab.dsl import parse_expr, parse_program, var
from bairelab.falsify import eps_delta_falsify
from bairelab.functions import (Dirichlet, ExprFunc, JumpSum, PiecewiseFunc, Reciprocals,
                                Riemann, Step, barely_continuity_scan, oscillation, seq_from_ast)
from bairelab.sets import NEG_INF, POS_INF, RSet

pytestmark = pytest.mark.acceptance

EPS = (F(1, 2), F(1, 4), F(1, 8))
TAU = 2.0**-30
FIRST: dict = {}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=str)


def report(capsys, n: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}")


def square():
    return ExprFunc(parse_expr("x^2"), name="x^2")


def piecewise_square_sin():
    src = "func pw { piece on (-inf,0]: x^2; piece on [0,inf): sin(x) }"
    return PiecewiseFunc(parse_program(src)["pw"].pieces, name="pw")


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_1(workers=1):
    out = {}
    for f in (Step(), JumpSum(20), square(), piecewise_square_sin()):
        for eps in EPS:
            g = gauge_for_epsilon(f, eps, validate_pairs=0)
            rep = eps_delta_falsify(f, g, eps, pairs=10**6, seed=0, workers=workers)
            out[f"{f.describe()}@{eps}"] = rep.to_json()
    return out


def build_2():
    _, good = cover_from_gauge(Step(), FormulaGauge(parse_expr("abs(x)/2")), F(1, 2),
                               pairs=10**5, seed=0)
    _, bad = cover_from_gauge(Step(), ConstantGauge(1), F(1, 2), pairs=10**5, seed=0)
    return {"distance_gauge": good.to_json(), "constant_one": bad.to_json()}


def build_3():
    seq = stable_sequence(Step())
    sets = pieces_from_stable(seq, horizon=64)
    st = stable_check(seq, Step(), samples=10**4, horizon=4096, seed=0)
    bound = [k <= math.ceil(1 / x) for x, k in zip(st.points, st.indices)
             if x > 0 and k is not None]
    exact = all(sets.X_n[n].equals(RSet.interval(NEG_INF, 0, False, True)
                                   | RSet.interval(F(1, n), POS_INF, True, False))
                for n in range(1, 65))
    return {"sets": sets.to_json(), "check": st.to_json(), "X_n_exact": exact,
            "index_bound_ok": all(bound), "positive_samples": len(bound)}


def build_4():
    g = seq_from_ast(var("x"), name="id", limit_hint=ExprFunc(var("x"), name="id"))
    P = ExtensionProblem(RSet.open(0, 1), parse_expr("clamp(2*min(x, 1-x), 0, 1)"), g, F(5))
    seq = extend_from_open(P)
    off = [F(k, 8) for k in range(-16, 1)] + [F(k, 8) for k in range(8, 17)]
    off_ok = all(seq.term(n)(x) == 5 for n in range(1, 65) for x in off)
    rng = np.random.default_rng(np.random.SeedSequence([0, 4]))
    inside = [F(float(u)) for u in rng.uniform(0, 1, 1000) if 0 < u < 1]
    conv_bad = []
    for x in inside:
        k = carrier_index(P, x)
        for n in sorted({k, k + 1, k + 7, max(k, 64)}):
            if seq.term(n)(x) != x:
                conv_bad.append((str(x), n))
    scans = {n: continuity_scan(seq.term(n), points=1000, seed=n).to_json() for n in range(1, 17)}
    return {"off_G_equals_y0": off_ok, "samples": len(inside), "convergence_failures": conv_bad,
            "scans": scans}


def build_5():
    _, rep = compose_witness(stable_sequence(Step()), ramp_jumpsum_sequence(20), samples=1000,
                             horizon=1024, seed=0)
    lag = rep.lagged(20)
    return {"report": rep.to_json(), "worst_ratio": max(v / 2.0 ** (-n + 2) for n, v in lag.items()),
            "checked_m": len(lag),
            "unstabilized": sum(k is None for k in rep.stab_index)}


def build_6():
    f, g = Step(), ExprFunc(parse_expr("3*x - 1"), name="3x-1")
    cb, cert = base_compose(f, pieces_base(f), g, interval_base(depth=6),
                            random_open_intervals(20, seed=0))
    return {"certificate": cert.to_json(), "members": len(cb.members())}


def build_7():
    return left_demo(samples=10**4, scan_points=10**4, seed=0).to_json()


CORPUS_8 = (Step, lambda: JumpSum(20), lambda: Riemann(1000), lambda: Dirichlet(1000),
            Reciprocals, square, piecewise_square_sin)


def build_8(workers=1):
    out = {}
    for make in CORPUS_8:
        f = make()
        out[f.describe()] = classify_report(f, EPS, pairs=10**5, scan=1000, seed=0,
                                            workers=workers).to_json()
    return out


def build_9():
    osc = {m: float(oscillation(Riemann(10**4), en.rational_at(m)).final) for m in (2, 5, 10)}
    eps_grid = (F(1, 100), F(1, 50), F(1, 20), F(1, 10), F(1, 4), F(1, 2), F(1))
    scans = {str(e): barely_continuity_scan(Riemann(10**4), RSet.closed(0, 1), e, budget=10**4,
                                            seed=0, N=10**4).to_json() for e in eps_grid}
    return {"oscillation": osc, "scans": scans}


BUILDERS = {1: build_1, 2: build_2, 3: build_3, 4: build_4, 5: build_5, 6: build_6, 7: build_7,
            8: build_8, 9: build_9}
PARALLEL = {1, 8}


def first(n):
    if n not in FIRST:
        FIRST[n] = dumps(BUILDERS[n]())
    return json.loads(FIRST[n])


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_criterion_01_gauge_soundness(capsys):
    rep = first(1)
    bad = {k: r["violation_count"] for k, r in rep.items()
           if r["violation_count"] or r["pairs_tested"] < 10**6}
    report(capsys, 1, not bad, f"{len(rep)} (f, eps) campaigns at 1e6 pairs; failing: {bad or 'none'}")
    assert len(rep) == 12 and not bad


def test_criterion_02_diameter_bound(capsys):
    rep = first(2)
    good, bad = rep["distance_gauge"], rep["constant_one"]
    ok = (good["passed"] and good["max_observed_diameter"] <= 3 / 8 + TAU
          and not bad["passed"])
    report(capsys, 2, ok, f"max diameter {good['max_observed_diameter']} <= 3/8; "
                          f"constant gauge rejected with diameter {bad['max_observed_diameter']}")
    assert ok


def test_criterion_03_stable_round_trip(capsys):
    rep = first(3)
    chk = rep["check"]
    ok = (rep["X_n_exact"] and chk["fraction"] == 1.0 and chk["samples"] == 10**4
          and rep["index_bound_ok"])
    report(capsys, 3, ok, f"X_n exact for n<=64: {rep['X_n_exact']}; stabilized "
                          f"{chk['stabilized']}/{chk['samples']}, max index {chk['max_index']}")
    assert ok


def test_criterion_04_extension(capsys):
    rep = first(4)
    scans_ok = all(s["passed"] and s["points"] == 1000 for s in rep["scans"].values())
    ok = rep["off_G_equals_y0"] and not rep["convergence_failures"] and scans_ok
    report(capsys, 4, ok, f"off-G = y0: {rep['off_G_equals_y0']}; convergence failures "
                          f"{len(rep['convergence_failures'])}/{rep['samples']}; "
                          f"{len(rep['scans'])} terms scanned: {scans_ok}")
    assert ok


def test_criterion_05_composition_witness(capsys):
    rep = first(5)
    ok = rep["worst_ratio"] <= 1.0 and rep["unstabilized"] == 0 and rep["checked_m"] > 0
    report(capsys, 5, ok, f"worst |h_m - g(f)| / 2^(-m+2) = {rep['worst_ratio']:.3g} over "
                          f"{rep['checked_m']} values of m; unstabilized samples "
                          f"{rep['unstabilized']}")
    assert ok


def test_criterion_06_base_composition(capsys):
    cert = first(6)["certificate"]
    rows = cert["rows"]
    ok = cert["passed"] and len(rows) == 20 and all(r["equal"] for r in rows)
    report(capsys, 6, ok, f"{sum(r['equal'] for r in rows)}/{len(rows)} exact equalities; "
                          f"covers: {cert['covers']}")
    assert ok


def test_criterion_07_left_compositor(capsys):
    rep = first(7)
    ag, pre, osc = rep["agreement"], rep["preimage"], rep["oscillation"]
    ok = (ag["samples"] == 10**4 and ag["mismatches"] == 0 and ag["reference"] == "dirichlet"
          and ag["reference_mismatches"] == 0 and ag["g_reference"] == "riemann"
          and ag["g_reference_mismatches"] == 0 and pre["equal"] and pre["not_F_sigma"]
          and osc["points"] == 10**4 and osc["all_equal_one"])
    report(capsys, 7, ok, f"(a) {ag['mismatches']} mismatches in {ag['samples']}; "
                          f"(b) preimage exact: {pre['equal']}, tags {pre['tags']}; "
                          f"(c) oscillation in [{osc['min']}, {osc['max']}] at {osc['points']}")
    assert ok


def test_criterion_08_classifier_consistency(capsys):
    rep = first(8)
    problems = {k: r["consistency"]["problems"] for k, r in rep.items()
                if not r["consistency"]["consistent"]}
    js = {c["id"]: c["verdict"] for c in rep["builtin:jumpsum(20)"]["conditions"]}
    split = (all(js[k] in ("witnessed", "derived-by-theorem") for k in C_IDS)
             and js["B1"] == js["B2"] == "refuted-at-truncation")
    ok = not problems and split and len(rep) == len(CORPUS_8)
    report(capsys, 8, ok, f"{len(rep)} tables, inconsistent: {problems or 'none'}; jumpsum "
                          f"B1/B2 {js['B1']}, C-side {[js[k] for k in C_IDS]}")
    assert ok


def test_criterion_09_riemann_oscillation(capsys):
    rep = first(9)
    osc_ok = all(abs(rep["oscillation"][str(m)] - 1 / m) <= 2**-10 for m in (2, 5, 10))
    found = {e: s["witness"] is not None for e, s in rep["scans"].items()}
    ok = osc_ok and all(found.values())
    report(capsys, 9, ok, f"oscillation at r_2, r_5, r_10: {rep['oscillation']}; "
                          f"witness found for eps {sorted(found, key=F)}: {all(found.values())}")
    assert ok


def test_criterion_10_determinism(capsys):
    differ = []
    for n, build in BUILDERS.items():
        first(n)
        one = FIRST[n]
        again = dumps(build(workers=4) if n in PARALLEL else build())
        if again != one:
            differ.append(n)
    report(capsys, 10, not differ, f"rebuilt {len(BUILDERS)} reports (campaigns with 4 workers); "
                                   f"differing: {differ or 'none'}")
    assert not differ
