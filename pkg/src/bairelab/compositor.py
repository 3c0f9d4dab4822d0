"""Compositors: witness sequences for g∘f, base composition, the left-compositor
counterexample, and the condition-battery classifier."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import enumeration as en
from .approx import stable_check, stable_sequence
from .covers import (ConstantGauge, as_piecewise, FormulaGauge, GaugeValidationError, RefinementFailure,
                     ThresholdUnresolvable, gauge_for_epsilon, reduction_partition,
                     refine_cover, variable_gauge)
from .dsl import DomainError, Node, const, parse_expr, var
from .dsl.ast import call
from .exact import TAU_CMP, fmt_number, sample_point, to_exact
from .falsify import EpsilonSpec, FalsificationReport, eps_delta_falsify
from .functions import (DEFAULT_WINDOW, Composite, Dirichlet, ExprFunc, Func, FuncSeq,
                        JumpSum, OutsideCover, PiecewiseFunc, Reciprocals, Riemann,
                        Sequenced, Step, Unresolvable, barely_continuity_scan, oscillation)
from .sets import NEG_INF, POS_INF, RSet, classify_set, min_gap

__all__ = ["FalsificationReport", "eps_delta_falsify", "compose_witness", "ComposeReport",
           "ramp_jumpsum_sequence", "base_compose", "ComposedBase", "BaseCertificate",
           "pieces_base", "interval_base", "left_demo", "LeftDemo", "BadWitness",
           "classify_report", "ClassifyReport"]

TAU = float(TAU_CMP)


# ---------------------------------------------------------------------------
# composition witness: h_n = g_n ∘ f_n
# ---------------------------------------------------------------------------

class _ComposedTerms:
    def __init__(self, f_seq: FuncSeq, g_seq: FuncSeq):
        self.f_seq, self.g_seq = f_seq, g_seq

    def __call__(self, n: int) -> Func:
        return Composite(self.g_seq.term(n), self.f_seq.term(n), name=f"h[n={n}]")


def ramp_jumpsum_sequence(N: int = 20) -> FuncSeq:
    """g_m = sum over n <= min(m, N) of 2^-n ramp_{1/m}(x - r_n), converging to jumpsum(N).

    ramp_w(t) = clamp(1 + t/w, 0, 1) is 1 for t >= 0 and 0 for t <= -w, so
    g_m(x) -> jumpsum(x) at every x, jump points included.
    """
    pts = en.first(N)

    def term(m: int) -> Func:
        e: Node = const(0)
        for n in range(1, min(m, N) + 1):
            e = e + Fraction(1, 2**n) * call("clamp", 1 + m * (var("x") - pts[n - 1]), 0, 1)
        return ExprFunc(e, name=f"ramp{N}[m={m}]")

    return FuncSeq(term, "pointwise", JumpSum(N), None, f"ramp-jumpsum({N})")


@dataclass(frozen=True)
class ComposeReport:
    samples: int
    horizon: int
    stab_index: tuple  # per sample, of the f-sequence (None = not stabilized)
    max_dev: tuple  # per n = 1..horizon: max |h_n(x) - g(f(x))| over samples with k <= n
    counted: tuple  # per n: how many samples had k <= n
    points: tuple
    devs: np.ndarray = field(repr=False, compare=False, default=None)  # samples x horizon

    def deviation(self, n: int) -> float:
        return self.max_dev[n - 1]

    def lagged(self, lag: int) -> dict:
        """n -> max deviation over samples whose index k satisfies k + lag <= n."""
        ks = np.array([self.horizon + 1 if k is None else k for k in self.stab_index])
        out = {}
        for n in range(1, self.horizon + 1):
            use = ks + lag <= n
            if use.any():
                out[n] = float(self.devs[use, n - 1].max())
        return out

    def to_json(self) -> dict:
        ks = [k for k in self.stab_index if k is not None]
        return {"samples": self.samples, "horizon": self.horizon,
                "max_stabilization_index": max(ks) if ks else None,
                "not_stabilized": sum(1 for k in self.stab_index if k is None),
                "max_deviation": {str(n): self.max_dev[n - 1] for n in range(1, self.horizon + 1)},
                "counted": {str(n): self.counted[n - 1] for n in range(1, self.horizon + 1)},
                "max_deviation_lag_20": {str(n): v for n, v in self.lagged(20).items()}}


def compose_witness(f_seq: FuncSeq, g_seq: FuncSeq, samples: int = 1000, horizon: int = 64,
                    seed: int = 0, window=None, f: Func | None = None,
                    g: Func | None = None) -> tuple[FuncSeq, ComposeReport]:
    f = f or f_seq.limit_hint
    g = g or g_seq.limit_hint
    if f is None or g is None:
        raise ValueError("limits of both sequences are needed")
    window = window or f.window
    h_seq = FuncSeq(_ComposedTerms(f_seq, g_seq), "pointwise", Composite(g, f), None,
                    f"compose({g_seq.name}, {f_seq.name})")
    st = stable_check(f_seq, f, samples, horizon, seed, window)
    xs = np.array([float(p) for p in st.points])
    gen = np.zeros(len(xs), dtype=bool)
    exact_target = [to_exact(g(to_exact(f(p)))) for p in st.points]
    target = np.array([float(t) for t in exact_target])
    ks = np.array([horizon + 1 if k is None else k for k in st.indices])
    max_dev, counted = [], []
    devs = np.zeros((len(xs), horizon))
    for n in range(1, horizon + 1):
        hv, hu = h_seq.vec_term(n, xs, gen)
        dev = np.abs(hv - target)
        for i in np.nonzero(hu)[0]:
            dev[i] = float(abs(to_exact(h_seq.term(n)(st.points[i])) - exact_target[i]))
        devs[:, n - 1] = dev
        use = ks <= n
        counted.append(int(use.sum()))
        max_dev.append(float(dev[use].max()) if use.any() else 0.0)
    rep = ComposeReport(samples, horizon, st.indices, tuple(max_dev), tuple(counted), st.points,
                        devs)
    return h_seq, rep


# ---------------------------------------------------------------------------
# base composition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseLevel:
    members: tuple  # RSets
    envelopes: tuple | None = None  # open RSets, one per member, pairwise disjoint


def pieces_base(f: Func) -> list:
    """Each disjoint piece of f as its own (trivially discrete) level."""
    pf = as_piecewise(f, f.window)
    return [BaseLevel((b,)) for b, _ in pf.pieces()]


def interval_base(window=DEFAULT_WINDOW, depth: int = 6) -> list:
    """Closed dyadic intervals of width 2^-m, split by parity so each level is
    separated; envelopes swell by a third of the width."""
    lo, hi = (to_exact(v) for v in window)
    levels = []
    for m in range(depth + 1):
        w = Fraction(1, 2**m)
        k0, k1 = math.floor(lo / w), math.ceil(hi / w)
        for parity in (0, 1):
            ms, es = [], []
            for k in range(k0, k1):
                if k % 2 != parity:
                    continue
                a, b = k * w, (k + 1) * w
                ms.append(RSet.closed(a, b))
                es.append(RSet.open(a - w / 3, b + w / 3))
            levels.append(BaseLevel(tuple(ms), tuple(es)))
    return levels


@dataclass(frozen=True)
class ComposedBase:
    levels: dict  # (n, m) -> tuple of RSets
    provenance: dict  # (n, m) -> tuple of (member index in A_n, member index in B_m)
    discrete: dict  # (n, m) -> certified gap

    def members(self) -> list:
        out = []
        for key in sorted(self.levels):
            out.extend(self.levels[key])
        return out

    def to_json(self) -> dict:
        return {"levels": [{"n": n, "m": m, "members": [s.to_json() for s in ms],
                            "from": [list(p) for p in self.provenance[(n, m)]],
                            "gap": str(self.discrete[(n, m)])}
                           for (n, m), ms in sorted(self.levels.items())]}


@dataclass(frozen=True)
class BaseCertificate:
    rows: tuple  # (W, lhs, rhs, equal)
    covers: bool

    @property
    def passed(self) -> bool:
        return self.covers and all(r[3] for r in self.rows)

    def to_json(self) -> dict:
        return {"passed": self.passed, "covers": self.covers,
                "rows": [{"W": w.to_json(), "preimage": a.to_json(), "union": b.to_json(),
                          "equal": e} for w, a, b, e in self.rows]}


def _image_within(f: Func, A: RSet, U: RSet, samples: int = 64) -> bool:
    try:
        return A.issubset(f.preimage(U).set)
    except Unresolvable:
        pass
    pts = [e for e in A.endpoints() if A.contains(e)]
    for iv in A.intervals:
        lo = iv.lo if iv.lo != NEG_INF else (iv.hi - 4 if iv.hi != POS_INF else Fraction(-4))
        hi = iv.hi if iv.hi != POS_INF else lo + 4
        pts += [lo + (hi - lo) * Fraction(k, samples) for k in range(1, samples)]
    return all(U.contains(to_exact(f(p))) for p in pts if A.contains(p))


def base_compose(f: Func, A_levels: list, g: Func, B_levels: list,
                 corpus: list) -> tuple[ComposedBase, BaseCertificate]:
    """C_nm = {A ∩ f^-1(B) : A in A_n, B in B_m, f(A) ⊆ U_B}, certified exactly
    against h^-1(W) for h = g∘f over the open-set corpus."""
    levels, prov, gaps = {}, {}, {}
    for n, An in enumerate(A_levels, 1):
        for m, Bm in enumerate(B_levels, 1):
            if Bm.envelopes is None:
                raise ValueError("the base of g needs envelopes")
            ms, pv = [], []
            for i, A in enumerate(An.members):
                for j, (B, U) in enumerate(zip(Bm.members, Bm.envelopes)):
                    if not _image_within(f, A, U):
                        continue
                    C = A & f.preimage(B).set
                    if not C.is_empty():
                        ms.append(C)
                        pv.append((i, j))
            if not ms:
                continue
            if len({i for i, _ in pv}) != len(pv):
                raise RefinementFailure(f"level ({n},{m}): a member meets two envelopes")
            levels[(n, m)] = tuple(ms)
            prov[(n, m)] = tuple(pv)
            gaps[(n, m)] = min_gap(ms).gap if len(ms) > 1 else Fraction(10**9)
    cb = ComposedBase(levels, prov, gaps)
    h = Composite(g, f)
    union_all = RSet()
    for C in cb.members():
        union_all = union_all | C
    rows = []
    for W in corpus:
        lhs = h.preimage(W).set if not W.is_empty() else RSet()
        rhs = RSet()
        for C in cb.members():
            if C.issubset(lhs):
                rhs = rhs | C
        rows.append((W, lhs, rhs, lhs.equals(rhs)))
    return cb, BaseCertificate(tuple(rows), union_all.equals(RSet.reals()))


def random_open_intervals(k: int, seed: int = 0, lo=-3, hi=3, den: int = 16) -> list:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 14]))
    out = []
    for _ in range(k):
        a, b = sorted(int(v) for v in rng.integers(lo * den, hi * den, 2))
        if a == b:
            b += 1
        out.append(RSet.open(Fraction(a, den), Fraction(b, den)))
    return out


# ---------------------------------------------------------------------------
# left-compositor counterexample
# ---------------------------------------------------------------------------

class BadWitness(ValueError):
    pass


@dataclass(frozen=True)
class LeftDemo:
    f: Func
    g: Sequenced
    h: Sequenced
    x0: Fraction
    V: RSet
    N: int
    witnesses: tuple  # (x_n, f(x_n)) for n <= N
    partition: object  # reduction of the first A_n
    agreement: dict
    preimage_check: dict
    oscillation_scan: dict

    @property
    def passed(self) -> bool:
        return (self.agreement["mismatches"] == 0 and self.agreement["reference_mismatches"] == 0
                and self.agreement["g_reference_mismatches"] == 0 and self.preimage_check["equal"]
                and self.oscillation_scan["all_at_least_margin"])

    def to_json(self) -> dict:
        return {"f": self.f.describe(), "g": self.g.describe(), "h": self.h.describe(),
                "x0": str(self.x0), "V": self.V.to_json(), "truncation": self.N,
                "witnesses_head": [[str(x), str(y)] for x, y in self.witnesses[:10]],
                "B_n_head": [b.to_json() for b in self.partition.outputs[:10]],
                "agreement": self.agreement, "preimage": self.preimage_check,
                "oscillation": self.oscillation_scan, "passed": self.passed}


def _agreement(h, f, g, N, samples, seed, reference, g_reference):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 20]))
    mism, ref_mism, g_mism = 0, 0, 0
    kinds = rng.integers(0, 3, samples)
    for i, kd in enumerate(kinds):
        if kd == 0:
            t = en.rational_at(int(rng.integers(1, N + 1)))
        elif kd == 1:
            t = sample_point(float(rng.uniform(-2, 2)), True)
        else:
            t = Fraction(int(rng.integers(-64, 64)), 32)
        direct = f(g(t))
        if h(t) != direct:
            mism += 1
        if reference is not None and reference(t) != direct:
            ref_mism += 1
        if g_reference is not None and g_reference(t) != g(t):
            g_mism += 1
    return {"samples": samples, "mismatches": mism, "reference": getattr(reference, "name", None),
            "reference_mismatches": ref_mism, "g_reference": getattr(g_reference, "name", None),
            "g_reference_mismatches": g_mism}


def left_demo(f: Func | None = None, x0=0, x_n=None, V: RSet | None = None, N: int = 1000,
              samples: int = 10_000, scan_points: int = 10_000, seed: int = 0,
              margin=Fraction(1, 2), scan_window=(0, 1), K: int = 12, m: int = 4) -> LeftDemo:
    """g(t) = x_n on B_n = {r_n}, x0 off the enumeration; h = f∘g.

    The default instance (f = indicator of {1/n}, x_n = 1/n, V = (-1/2, 1/2))
    makes g the reciprocal-index map and h the Dirichlet-type indicator."""
    f = f or Reciprocals()
    x0 = to_exact(x0)
    x_n = x_n or (lambda n: Fraction(1, n))
    V = V if V is not None else RSet.open(Fraction(-1, 2), Fraction(1, 2))
    if not V.contains(to_exact(f(x0))):
        raise BadWitness("f(x0) must lie in V")
    wit = []
    prev = None
    for n in range(1, N + 1):
        xn = to_exact(x_n(n))
        yn = to_exact(f(xn))
        if V.contains(yn):
            raise BadWitness(f"f(x_{n}) = {yn} lies in V")
        d = abs(xn - x0)
        if prev is not None and not d < prev:
            raise BadWitness(f"|x_n - x0| is not decreasing at n = {n}")
        prev = d
        wit.append((xn, yn))
    # A_n = {r_1..r_n}; disjointification gives B_n = {r_n}
    A = [RSet.points(en.first(n)) for n in range(1, min(N, 32) + 1)]
    part = reduction_partition(A)
    g = Sequenced(lambda n: to_exact(x_n(n)), x0, "reciprocal-index", N, deep=x0)
    # past the truncation h follows f(x_n), which stays outside V; use the last witness value
    h = g.then(f, name="h", deep=wit[-1][1])
    reference = Dirichlet(N) if isinstance(f, Reciprocals) and x0 == 0 else None
    g_reference = Riemann(N) if x_n(1) == 1 and x_n(2) == Fraction(1, 2) else None
    agreement = _agreement(h, f, g, N, samples, seed, reference, g_reference)

    W = RSet.closed(*DEFAULT_WINDOW)
    pre = h.preimage(V).set
    expected = RSet.reals() - RSet.rationals(N)
    got_w, exp_w = pre & W, expected & W
    tags = classify_set(pre)
    preimage_check = {"set": pre.to_json(), "equal": got_w.equals(exp_w),
                      "tags": sorted(tags), "not_F_sigma": "F_sigma" not in tags,
                      "window": [str(DEFAULT_WINDOW[0]), str(DEFAULT_WINDOW[1])]}

    rng = np.random.default_rng(np.random.SeedSequence([seed, 21]))
    lo, hi = scan_window
    pts = rng.uniform(lo, hi, scan_points)
    ests = []
    for x in pts:
        est = oscillation(h, Fraction(float(x)), K=K, m=m, seed=seed, forced_cap=4,
                          finest_only=True).final
        ests.append(est)
    ests = np.array(ests)
    scan = {"points": scan_points, "min": float(ests.min()), "max": float(ests.max()),
            "margin": str(margin), "all_at_least_margin": bool((ests >= float(margin)).all()),
            "all_equal_one": bool((ests == 1.0).all())}
    return LeftDemo(f, g, h, x0, V, N, tuple(wit), part, agreement, preimage_check, scan)


# ---------------------------------------------------------------------------
# condition battery
# ---------------------------------------------------------------------------

POSITIVE = {"verified-by-construction", "witnessed", "derived-by-theorem"}
NEGATIVE = {"refuted", "refuted-at-truncation"}
B_IDS = ("B1", "B2", "B3", "B4", "B5", "B6")
C_IDS = ("C1", "C2", "C3", "C4", "C5")
MEANING = {
    "B1": "first stable Baire class",
    "B2": "piecewise continuous",
    "B3": "delta exists for every epsilon function (1.2)",
    "B4": "delta exists for every Baire-one epsilon function (1.2)",
    "B5": "right Baire-one compositor",
    "B6": "G_delta-measurable and sigma-discrete",
    "C1": "sigma-discrete with an F_sigma base",
    "C2": "first Lebesgue class (open preimages F_sigma)",
    "C3": "barely continuous",
    "C4": "Baire-one delta for every constant epsilon (1.3)",
    "C5": "some delta for every constant epsilon (1.3)",
}


@dataclass
class Verdict:
    id: str
    verdict: str
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"id": self.id, "meaning": MEANING[self.id], "verdict": self.verdict,
                "evidence": self.evidence}


@dataclass
class ClassifyReport:
    function: str
    seed: int
    budgets: dict
    truncation: int | None
    conditions: dict
    consistency: dict

    def to_json(self) -> dict:
        return {"function": self.function, "seed": self.seed, "budgets": self.budgets,
                "truncation": self.truncation,
                "conditions": [self.conditions[k].to_json() for k in B_IDS + C_IDS],
                "consistency": self.consistency}

    def verdict(self, cid: str) -> str:
        return self.conditions[cid].verdict


def open_corpus(k: int = 8, seed: int = 0) -> list:
    fixed = [RSet.open(NEG_INF, 0), RSet.open(0, POS_INF), RSet.open(Fraction(-1, 2), Fraction(1, 2)),
             RSet.open(Fraction(1, 2), Fraction(3, 2)), RSet.open(Fraction(1, 4), POS_INF)]
    return fixed + random_open_intervals(k, seed, -2, 2, 8)


def _truncated(f: Func) -> bool:
    return isinstance(f, (JumpSum, Riemann, Dirichlet, Sequenced))


def _has_pieces(f: Func) -> bool:
    if isinstance(f, (PiecewiseFunc, ExprFunc, Step)):
        return True
    return False


def _preimage_tags(f: Func, corpus: list) -> tuple[list, list]:
    rows, failures = [], []
    for W in corpus:
        try:
            P = f.preimage(W)
        except Unresolvable as exc:
            failures.append((W, str(exc)))
            continue
        rows.append((W, P))
    return rows, failures


def _falsify_candidates(f, eps, pairs, seed, workers, window):
    """Gauges the engine can offer for constant eps: synthesized, then standard."""
    cands, notes = [], []
    try:
        cands.append(("synthesized", gauge_for_epsilon(f, eps, window, validate_pairs=0)))
    except (Unresolvable, RefinementFailure, ThresholdUnresolvable, ValueError) as exc:
        notes.append(f"no synthesized gauge: {exc}")
    for c in (Fraction(1, 10), Fraction(1, 1000), Fraction(1, 2**20)):
        cands.append((f"constant {c}", ConstantGauge(c)))
    cands.append(("distance |x|/2", FormulaGauge(parse_expr("abs(x)/2"))))
    results = []
    for label, G in cands:
        rep = eps_delta_falsify(f, G, eps, pairs=pairs, seed=seed, window=window,
                                workers=workers)
        results.append((label, G, rep))
        if label == "synthesized" and rep.passed:
            break
    return results, notes


def _jump_density(f: JumpSum, deep: int = 4096, K: int = 24) -> dict:
    """Every candidate piece with interior contains an enumerated rational
    beyond the truncation at which the untruncated sum jumps."""
    pf = f.as_piecewise(f.window)
    lo_w, hi_w = f.window
    rows = []
    for b, _ in pf.pieces():
        for iv in b.intervals:
            lo, hi = max(iv.lo, lo_w), min(iv.hi, hi_w)
            if not lo < hi:
                continue
            cands = [p for p in en.first(deep) if lo < p < hi and en.index_of(p) > f.N]
            if not cands:
                rows.append({"piece": [str(lo), str(hi)], "found": False})
                continue
            p = min(cands, key=en.index_of)
            n = en.index_of(p)
            est = oscillation(JumpSum(n), p, K=K, m=8).final
            rows.append({"piece": [str(lo), str(hi)], "found": True, "point": str(p),
                         "index": n, "jump": str(Fraction(1, 2**n)), "oscillation": est})
    refuted = bool(rows) and all(r["found"] and r["oscillation"] > 0 for r in rows)
    return {"candidates": rows, "refuted": refuted}


def classify_report(f: Func, eps_grid=(Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)),
                    pairs: int = 10**5, scan: int = 200, seed: int = 0, workers: int = 1,
                    window=None, horizon: int = 64) -> ClassifyReport:
    window = window or f.window
    eps_grid = [to_exact(e) for e in eps_grid]
    V: dict = {}
    trunc = getattr(f, "N", None) if _truncated(f) else None
    scope = "truncation" if trunc is not None else "exact"

    # --- preimage tags: C2 and B6 -------------------------------------------
    rows, failures = _preimage_tags(f, open_corpus(8, seed))
    not_fs = [(W, P) for W, P in rows if "F_sigma" not in P.tags]
    not_gd = [(W, P) for W, P in rows if "G_delta" not in P.tags]
    ev = {"corpus": len(rows) + len(failures), "resolved": len(rows),
          "unresolved": [str(W) for W, _ in failures]}
    if not_fs:
        V["C2"] = Verdict("C2", "refuted", {**ev, "counterexample": {
            "W": str(not_fs[0][0]), "preimage": str(not_fs[0][1].set),
            "tags": sorted(not_fs[0][1].tags)}})
    elif rows and not failures:
        V["C2"] = Verdict("C2", "witnessed", {**ev, "scope": scope})
    else:
        V["C2"] = Verdict("C2", "inconclusive", ev)
    if not_gd:
        V["B6"] = Verdict("B6", "refuted", {**ev, "counterexample": {
            "W": str(not_gd[0][0]), "preimage": str(not_gd[0][1].set),
            "tags": sorted(not_gd[0][1].tags)}})
    elif rows and not failures and trunc is None:
        V["B6"] = Verdict("B6", "witnessed", {**ev, "note": "sigma-discreteness is automatic "
                                                          "on the separable real line"})
    else:
        V["B6"] = Verdict("B6", "inconclusive", {**ev, "note": "G_delta tags of a truncated "
                                                             "model do not transfer"})

    # --- C3: barely continuous --------------------------------------------------
    closed_sets = [RSet.closed(0, 1), RSet.closed(*window)]
    eps_min = min(eps_grid)
    sv = []
    for F in closed_sets:
        r = barely_continuity_scan(f, F, eps_min, budget=scan, seed=seed, window=window)
        sv.append({"F": str(F), "eps": str(eps_min), "witness": None if r.witness is None
                   else str(r.witness), "omega": r.omega, "scanned": r.scanned})
    if all(s["witness"] is not None for s in sv):
        V["C3"] = Verdict("C3", "witnessed", {"scans": sv})
    else:
        V["C3"] = Verdict("C3", "refuted", {"scans": sv, "scope": "no continuity point found "
                                            "in budget; oscillation is a lower bound"})

    # --- C4 / C5: gauges per epsilon ------------------------------------------
    c45 = []
    refuted_at = None
    all_synth = True
    for e in eps_grid:
        results, notes = _falsify_candidates(f, e, pairs, seed, workers, window)
        ok = [(lbl, G, rep) for lbl, G, rep in results if rep.passed and rep.budget_met]
        entry = {"eps": str(e), "notes": notes,
                 "campaigns": [{"gauge": lbl, "pairs": rep.pairs_tested,
                                "violations": rep.violation_count} for lbl, _, rep in results]}
        if ok:
            lbl, G, _ = ok[0]
            entry["gauge"] = lbl
            entry["claimed_class"] = getattr(G, "claimed_class", "unknown")
            if entry["claimed_class"] != "baire_one" and G.kind != "constant":
                all_synth = False
        else:
            all_synth = False
            failing = [rep for _, _, rep in results if rep.violations]
            if failing and refuted_at is None:
                v = failing[0].violations[0]
                refuted_at = {"eps": str(e), "x": str(v.x), "y": str(v.y), "fx": str(v.fx),
                              "fy": str(v.fy),
                              "scope": "every gauge the engine synthesizes plus constants "
                                       "and a distance-based gauge"}
        c45.append(entry)
    if refuted_at is not None:
        V["C5"] = Verdict("C5", "refuted", {"per_eps": c45, "counterexample": refuted_at})
        V["C4"] = Verdict("C4", "refuted", {"derived_from": "C5", "per_eps": c45})
    elif all("gauge" in c for c in c45):
        V["C5"] = Verdict("C5", "witnessed", {"per_eps": c45, "scope": scope})
        V["C4"] = Verdict("C4", "witnessed" if all_synth else "inconclusive",
                          {"per_eps": c45, "scope": scope})
    else:
        V["C5"] = Verdict("C5", "inconclusive", {"per_eps": c45})
        V["C4"] = Verdict("C4", "inconclusive", {"per_eps": c45})

    # --- C1: sigma-discrete F_sigma base ----------------------------------------
    if _has_pieces(f) or isinstance(f, JumpSum):
        try:
            pf = as_piecewise(f, window)
            cov = refine_cover([b for b, _ in pf.pieces()], window)
            V["C1"] = Verdict("C1", "witnessed", {"cover": cov.to_json(max_levels=2),
                                                  "note": "members are closed"})
        except RefinementFailure as exc:
            V["C1"] = Verdict("C1", "inconclusive", {"error": str(exc)})
    else:
        V["C1"] = Verdict("C1", "inconclusive", {"note": "no finite piece structure"})

    # --- B1 / B2 ------------------------------------------------------------------
    if _has_pieces(f):
        seq = stable_sequence(f)
        st = stable_check(seq, f, samples=min(scan * 5, 10_000), horizon=horizon, seed=seed,
                          window=window)
        U = seq.generator.closed_union(horizon)
        missed = [p for p, k in zip(st.points, st.indices) if k is None and U.contains(p)]
        ev = {"sequence": seq.name, "stable_check": st.to_json(),
              "unstabilized_inside_U_horizon": len(missed)}
        V["B1"] = Verdict("B1", "witnessed" if not missed else "refuted", ev)
        V["B2"] = Verdict("B2", "verified-by-construction",
                          {"pieces": len(f.pieces()) if not isinstance(f, Step) else 2})
    elif isinstance(f, JumpSum):
        jd = _jump_density(f)
        V["B2"] = Verdict("B2", "refuted-at-truncation" if jd["refuted"] else "inconclusive",
                          {**jd, "note": "a countable closed cover has a piece with interior; "
                                         "every candidate interior meets a jump of the "
                                         "untruncated sum"})
        V["B1"] = Verdict("B1", "inconclusive", {"note": "no piece structure"})
    else:
        V["B1"] = Verdict("B1", "inconclusive", {"note": "no piece structure"})
        V["B2"] = Verdict("B2", "inconclusive", {"note": "no piece structure"})

    # --- B3 / B4: function epsilon ----------------------------------------------
    if _has_pieces(f):
        eps_funcs = {
            "B3": ExprFunc(parse_expr("1/4 + abs(x)/2"), name="1/4+|y|/2"),
            "B4": PiecewiseFunc([(RSet.interval(NEG_INF, Fraction(1, 2), False, False),
                                  const(Fraction(1, 4))),
                                 (RSet.interval(Fraction(1, 2), POS_INF, True, False),
                                  const(Fraction(1, 8)))], name="jump-at-1/2"),
        }
        for cid, ef in eps_funcs.items():
            try:
                _, G, _ = variable_gauge(f, EpsilonSpec(func=ef), window, validate_pairs=0,
                                         seed=seed, workers=workers)
                rep = eps_delta_falsify(f, G, EpsilonSpec(func=ef), pairs=pairs, seed=seed,
                                        window=window, workers=workers)
                ev = {"eps": ef.describe(), "pairs": rep.pairs_tested,
                      "violations": rep.violation_count, "scope": "epsilon corpus"}
                V[cid] = Verdict(cid, "witnessed" if rep.passed else "inconclusive", ev)
            except (Unresolvable, RefinementFailure, ThresholdUnresolvable,
                    GaugeValidationError) as exc:
                V[cid] = Verdict(cid, "inconclusive", {"error": str(exc)})
    else:
        for cid in ("B3", "B4"):
            V[cid] = Verdict(cid, "inconclusive", {"note": "function epsilon gauges need "
                                                         "a piece structure"})

    # --- B5 derived ----------------------------------------------------------------
    if V["B4"].verdict in POSITIVE and V["B6"].verdict in POSITIVE:
        V["B5"] = Verdict("B5", "derived-by-theorem", {"from": ["B4", "B6"]})
    else:
        V["B5"] = Verdict("B5", "inconclusive", {"note": "never tested directly"})

    _propagate(V)
    cons = consistency(V)
    return ClassifyReport(f.describe(), seed, {"pairs": pairs, "scan": scan,
                                               "eps_grid": [str(e) for e in eps_grid],
                                               "horizon": horizon},
                          trunc, V, cons)


def _propagate(V: dict) -> None:
    """Fill inconclusive entries from equivalences that hold on the real line."""
    for group in (B_IDS, C_IDS):
        neg = [k for k in group if V[k].verdict in NEGATIVE]
        pos = [k for k in group if V[k].verdict in POSITIVE]
        for k in group:
            if V[k].verdict != "inconclusive":
                continue
            if neg and not pos:
                src = neg[0]
                kind = "refuted-at-truncation" if V[src].verdict == "refuted-at-truncation" \
                    else "refuted"
                V[k] = Verdict(k, kind, {"derived_from": src, "prior": V[k].evidence,
                                         "reason": "equivalent conditions for maps of the "
                                                   "real line"})
            elif pos and not neg:
                V[k] = Verdict(k, "derived-by-theorem", {"derived_from": pos[0],
                                                         "prior": V[k].evidence})
    # stable-side conditions imply the Baire-one side
    if any(V[k].verdict in POSITIVE for k in B_IDS):
        for k in C_IDS:
            if V[k].verdict == "inconclusive":
                V[k] = Verdict(k, "derived-by-theorem", {"derived_from": "B-side",
                                                         "prior": V[k].evidence})


def consistency(V: dict) -> dict:
    problems = []
    chain = ["B1", "B2", "B3", "B4", "B5"]
    for i, a in enumerate(chain):
        for b in chain[i + 1:]:
            if V[a].verdict in POSITIVE and V[b].verdict in NEGATIVE:
                problems.append(f"{a} positive but {b} refuted")
    for a, b in (("B5", "B6"), ("B6", "B5")):
        if V[a].verdict in POSITIVE and V[b].verdict in NEGATIVE:
            problems.append(f"{a} positive but {b} refuted")
    for group in (B_IDS, C_IDS):
        pos = [k for k in group if V[k].verdict in POSITIVE]
        neg = [k for k in group if V[k].verdict in NEGATIVE]
        if pos and neg:
            problems.append(f"equivalent conditions split: {pos} vs {neg}")
    if any(V[k].verdict in POSITIVE for k in B_IDS):
        neg = [k for k in C_IDS if V[k].verdict in NEGATIVE]
        if neg:
            problems.append(f"B-side positive but {neg} refuted")
    return {"consistent": not problems, "problems": problems}
