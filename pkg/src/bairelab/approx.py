"""Approximation by continuous sequences.

Two constructions live here:

* extension from an open set: given G = phi^-1((0,1]) and continuous g_n on G,
  build continuous f_n on the line with f_n -> g on G and f_n = y0 off G;
* stable sequences from closed piece covers, and back: the sets where the
  terms agree recover the pieces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dsl import DomainError, Node, const, eval_array, eval_ast, lipschitz, var
from .dsl.ast import call, substitute, to_source
from .dsl.poly import IrrationalBreak, NotPolynomial, level_breakpoints
from .exact import TAU_CMP, to_exact
from .functions import (DEFAULT_WINDOW, ExprFunc, Func, FuncSeq, LimitFunc, OutsideCover,
                        PiecewiseFunc, Unresolvable)
from .sets import NEG_INF, POS_INF, RSet, classify_set, from_predicate

N_MAX = 64
TAU = float(TAU_CMP)


class CarrierGap(ValueError):
    pass


# ---------------------------------------------------------------------------
# extension from an open set
# ---------------------------------------------------------------------------

def psi_nodes(n: int):
    """psi_{n,1}, psi_{n,2} as expressions in x = phi-value.

    psi_1 > 0 exactly on [0, 1/(n+3)) and = 1 exactly at 0;
    psi_2 > 0 exactly on (1/(n+2), 1] and = 1 exactly on [1/(n+1), 1].
    """
    p = var("x")
    psi1 = call("clamp", 1 - (n + 3) * p, 0, 1)
    psi2 = call("clamp", (n + 1) * (n + 2) * p - (n + 1), 0, 1)
    return psi1, psi2


@dataclass(frozen=True)
class ExtensionProblem:
    G: RSet
    phi: Node
    g_seq: FuncSeq
    y0: Fraction
    window: tuple = DEFAULT_WINDOW

    def gamma(self, y, t):
        return (1 - t) * y + t * self.y0

    def validate(self, grid: int = 256) -> list:
        """Problems found at a rational grid plus the endpoints of G (empty if valid)."""
        lo, hi = self.window
        pts = [lo + (hi - lo) * Fraction(k, grid) for k in range(grid + 1)]
        pts += [e for e in self.G.endpoints() if lo <= e <= hi]
        bad = []
        for x in sorted(set(pts)):
            p = eval_ast(self.phi, x)
            if not 0 <= p <= 1:
                bad.append((x, "phi outside [0,1]"))
            inside = self.G.contains(x)
            if inside and not p > 0:
                bad.append((x, "phi vanishes in G"))
            if not inside and p != 0:
                bad.append((x, "phi nonzero off G"))
        return bad


class ExtensionTerm(Func):
    kind = "extension"

    def __init__(self, P: ExtensionProblem, n: int):
        self.P = P
        self.n = n
        self.g = P.g_seq.term(n)
        self.psi1, self.psi2 = psi_nodes(n)
        self.t1 = Fraction(1, n + 3)  # U_{n,1}: phi < t1
        self.t2 = Fraction(1, n + 2)  # U_{n,2}: phi > t2
        self.name = f"ext[n={n}]"
        self.window = P.window

    def carrier(self, x) -> int:
        p = eval_ast(self.P.phi, x)
        if p < self.t1:
            return 1
        if p > self.t2:
            return 2
        return 0

    def __call__(self, x):
        p = eval_ast(self.P.phi, x)
        y0 = self.P.y0
        if p < self.t1:
            # g_{n,1} is the constant y0 on the carrier near the complement of G
            return self.P.gamma(y0, 1 - eval_ast(self.psi1, p))
        if p > self.t2:
            return self.P.gamma(self.g(x), 1 - eval_ast(self.psi2, p))
        return y0

    def vec(self, xs, gen):
        p = eval_array(self.P.phi, {"x": xs, "y": xs})
        y0 = float(self.P.y0)
        vals = np.full(len(xs), y0)
        unc = np.isnan(p)
        on2 = p > float(self.t2)
        if on2.any():
            gv, gu = self.g.vec(xs[on2], gen[on2])
            s = eval_array(self.psi2, {"x": p[on2], "y": p[on2]})
            vals[on2] = s * gv + (1 - s) * y0
            unc[on2] |= gu
        return vals, unc

    def ast(self) -> Node | None:
        """The whole term as one expression, when g_n has one."""
        src = getattr(self.g, "ast", None)
        if src is None:
            return None
        env = getattr(self.g, "env", {})
        for k, v in env.items():
            src = substitute(src, k, v)
        s2 = substitute(self.psi2, "x", self.P.phi)
        return self.P.y0 + s2 * (src - self.P.y0)

    def lipschitz(self, lo, hi):
        e = self.ast()
        if e is None:
            return None
        return lipschitz(e, lo, hi)

    def check_carriers(self) -> None:
        """U = psi^-1((0,1]) and F = psi^-1(1) hold exactly on phi-values in [0,1];
        the carriers plus the default band cover [0,1]."""
        n = self.n
        unit = RSet.closed(0, 1)
        pos, one = RSet.interval(0, POS_INF, False, False), RSet.points([1])
        expect = {
            ("U", 1): RSet.interval(0, self.t1, True, False),
            ("F", 1): RSet.points([0]),
            ("U", 2): RSet.interval(self.t2, 1, False, True),
            ("F", 2): RSet.closed(Fraction(1, n + 1), 1),
        }
        for i, psi in ((1, self.psi1), (2, self.psi2)):
            for tag, V in (("U", pos), ("F", one)):
                got = RSet.make(from_predicate(level_breakpoints(psi, [0, 1]),
                                               lambda t: V.contains(eval_ast(psi, t)))) & unit
                if not got.equals(expect[(tag, i)]):
                    raise CarrierGap(f"{tag}_{{{n},{i}}} is {got}, expected {expect[(tag, i)]}")
        band = RSet.closed(self.t1, self.t2)
        if not (expect[("U", 1)] | expect[("U", 2)] | band).equals(unit):
            raise CarrierGap(f"carriers leave a gap at n={n}")

    def carrier_sets(self) -> dict:
        return {"U1": f"phi in [0, {self.t1})", "U2": f"phi in ({self.t2}, 1]",
                "F1": "phi = 0", "F2": f"phi in [{Fraction(1, self.n + 1)}, 1]"}


class ExtensionLimit(Func):
    kind = "extension-limit"

    def __init__(self, P: ExtensionProblem):
        self.P = P
        self.g = P.g_seq.limit_hint or LimitFunc(P.g_seq)
        self.name = "ext-limit"
        self.window = P.window

    def __call__(self, x):
        return self.g(x) if self.P.G.contains(x) else self.P.y0


class _ExtensionTerms:
    def __init__(self, P: ExtensionProblem):
        self.P = P
        self._cache: dict = {}

    def __call__(self, n: int) -> ExtensionTerm:
        if n not in self._cache:
            self._cache[n] = ExtensionTerm(self.P, n)
        return self._cache[n]


def extend_from_open(P: ExtensionProblem, name: str = "ext") -> FuncSeq:
    bad = P.validate()
    if bad:
        raise ValueError(f"invalid extension problem: {bad[:3]}")
    terms = _ExtensionTerms(P)
    for n in (1, 2, 10):
        terms(n).check_carriers()
    source = None
    if P.g_seq.source is not None:
        n = var("n")
        s2 = substitute(call("clamp", (n + 1) * (n + 2) * var("x") - (n + 1), 0, 1), "x", P.phi)
        source = P.y0 + s2 * (P.g_seq.source - P.y0)
    return FuncSeq(terms, "pointwise", ExtensionLimit(P), source, name)


def carrier_index(P: ExtensionProblem, x) -> int | None:
    """Least n with psi_{n,2}(x) = 1, i.e. phi(x) >= 1/(n+1); None off G."""
    p = eval_ast(P.phi, x)
    if p <= 0:
        return None
    return max(1, math.ceil(1 / p) - 1)


# ---------------------------------------------------------------------------
# Lipschitz-window continuity scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuityScan:
    function: str
    points: int
    h: Fraction
    failures: tuple
    max_ratio: float
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"function": self.function, "points": self.points, "h": str(self.h),
                "failures": [[str(x), str(j), str(b)] for x, j, b in self.failures],
                "max_ratio": self.max_ratio, "skipped": self.skipped, "passed": self.passed}


def _lipschitz_of(f: Func, lo, hi):
    own = getattr(f, "lipschitz", None)
    if own is not None:
        return own(lo, hi)
    if isinstance(f, ExprFunc):
        return lipschitz(f.ast, lo, hi, f.env)
    if isinstance(f, PiecewiseFunc):
        best = Fraction(0)
        box = RSet.closed(lo, hi)
        for b, e, _ in f.parts:
            if (b & box).is_empty():
                continue
            L = lipschitz(e, lo, hi, f.env)
            if L is None:
                return None
            best = max(best, L)
        return best
    return None


def continuity_scan(f: Func, points: int = 1000, seed: int = 0, window=None,
                    h=Fraction(1, 2**20)) -> ContinuityScan:
    """Every sampled x has |f(x +- h) - f(x)| <= L h for the Lipschitz bound L of
    f on [x-h, x+h]."""
    lo, hi = window or f.window
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
    xs = rng.uniform(float(lo), float(hi), points)
    fails, worst, skipped = [], 0.0, 0
    for xf in xs:
        x = Fraction(xf)
        L = _lipschitz_of(f, x - h, x + h)
        if L is None:
            skipped += 1
            continue
        fx = f(x)
        for y in (x - h, x + h):
            jump = abs(to_exact(f(y)) - to_exact(fx))
            bound = L * h
            tol = 0 if isinstance(fx, Fraction) else TAU_CMP
            if jump > bound + tol:
                fails.append((x, jump, bound))
            if bound > 0:
                worst = max(worst, float(jump / bound))
    return ContinuityScan(f.describe(), points, h, tuple(fails), worst, skipped)


# ---------------------------------------------------------------------------
# stable sequences from closed piece covers
# ---------------------------------------------------------------------------

def _pieces_of(f: Func) -> list:
    if isinstance(f, PiecewiseFunc):
        return [(b, e, f.env) for b, e, _ in f.parts]
    conv = getattr(f, "as_piecewise", None)
    if conv is not None:
        return _pieces_of(conv(f.window))
    return [(d, e, getattr(f, "env", {})) for d, e in f.pieces()]


def _linear(xa, ya, xb, yb) -> Node:
    slope = (yb - ya) / (xb - xa)
    if slope == 0:
        return const(ya)
    shifted = var("x") if xa == 0 else var("x") - xa
    term = shifted if slope == 1 else slope * shifted
    return term if ya == 0 else ya + term


@dataclass
class StableTerms:
    """f_n = f on U_n (the closed 1/n-shrinks of the pieces), linear across gaps."""

    pieces: list
    window: tuple = DEFAULT_WINDOW
    notes: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict)

    def closed_union(self, n: int) -> RSet:
        out = RSet()
        for b, _, _ in self.pieces:
            out = out | b.shrink(n)
        return out

    def __call__(self, n: int) -> PiecewiseFunc:
        if n in self._cache:
            return self._cache[n]
        comps = []
        for b, e, env in self.pieces:
            for iv in b.shrink(n).intervals:
                comps.append((iv.lo, iv.hi, e, env))
        comps.sort(key=lambda c: (c[0], c[1]))
        pieces, env_all = [], {}
        for lo, hi, e, env in comps:
            for k, v in env.items():
                e = substitute(e, k, v)
            pieces.append((RSet.closed(lo, hi), e))
        if not pieces:
            self.notes.append(f"n={n}: no pieces, constant 0 used")
            term = PiecewiseFunc([(RSet.reals(), const(0))], name=f"stable[n={n}]",
                                 window=self.window)
            self._cache[n] = term
            return term
        gaps = []
        first_lo, first_e = pieces[0][0].intervals[0].lo, pieces[0][1]
        if first_lo != NEG_INF:
            gaps.append((RSet.interval(NEG_INF, first_lo, False, True),
                         const(to_exact(eval_ast(first_e, first_lo)))))
        for (d1, e1), (d2, e2) in zip(pieces, pieces[1:]):
            a, b = d1.intervals[0].hi, d2.intervals[0].lo
            if a < b:
                ya = to_exact(eval_ast(e1, a))
                yb = to_exact(eval_ast(e2, b))
                gaps.append((RSet.closed(a, b), _linear(a, ya, b, yb)))
        last_hi, last_e = pieces[-1][0].intervals[0].hi, pieces[-1][1]
        if last_hi != POS_INF:
            gaps.append((RSet.interval(last_hi, POS_INF, True, False),
                         const(to_exact(eval_ast(last_e, last_hi)))))
        term = PiecewiseFunc(pieces + gaps, name=f"stable[n={n}]", window=self.window,
                             env=env_all)
        self._cache[n] = term
        return term


def stable_sequence(f: Func, name: str | None = None) -> FuncSeq:
    """Continuous f_n with f_n(x) = f(x) once x lies in the n-th closed union."""
    terms = StableTerms(_pieces_of(f), f.window)
    return FuncSeq(terms, "stable", f, None, name or f"stable({f.describe()})")


@dataclass(frozen=True)
class StableCheck:
    samples: int
    horizon: int
    indices: tuple  # per sample: least k, or None when not stabilized
    points: tuple

    @property
    def stabilized(self) -> int:
        return sum(1 for k in self.indices if k is not None)

    @property
    def fraction(self) -> float:
        return self.stabilized / self.samples if self.samples else 1.0

    @property
    def max_index(self):
        ks = [k for k in self.indices if k is not None]
        return max(ks) if ks else None

    def to_json(self) -> dict:
        hist: dict = {}
        for k in self.indices:
            key = "not stabilized" if k is None else str(k)
            hist[key] = hist.get(key, 0) + 1
        return {"samples": self.samples, "horizon": self.horizon,
                "stabilized": self.stabilized, "fraction": self.fraction,
                "max_index": self.max_index, "index_histogram": hist,
                "not_stabilized": [str(x) for x, k in zip(self.points, self.indices)
                                   if k is None][:100]}


def stable_check(seq: FuncSeq, f: Func, samples: int = 10_000, horizon: int = N_MAX,
                 seed: int = 0, window=None) -> StableCheck:
    """Least k <= horizon with term_n(x) = f(x) for all n in [k, horizon], per sample.

    Values are compared in floats first; anything not clearly different is
    confirmed in exact arithmetic.
    """
    lo, hi = window or f.window
    rng = np.random.default_rng(np.random.SeedSequence([seed, 16]))
    xs = rng.uniform(float(lo), float(hi), samples)
    gen = np.zeros(samples, dtype=bool)
    pts = [Fraction(x) for x in xs]
    fv, fu = f.vec(xs, gen)
    fexact = {}

    def f_at(i):
        if i not in fexact:
            fexact[i] = to_exact(f(pts[i]))
        return fexact[i]

    k = np.full(samples, horizon + 1)  # horizon+1 means "not stabilized"
    good = np.ones(samples, dtype=bool)  # equal for every n above the current one
    for n in range(horizon, 0, -1):
        tv, tu = seq.vec_term(n, xs, gen)
        diff = np.abs(tv - fv)
        scale = TAU * np.maximum(1.0, np.abs(fv))
        eq = diff == 0
        clear_ne = diff > scale
        unsure = good & (tu | fu | ~(eq | clear_ne) | (eq & ~np.isfinite(fv)))
        eq = eq & ~unsure
        for i in np.nonzero(unsure)[0]:
            try:
                eq[i] = to_exact(seq.term(n)(pts[i])) == f_at(i)
            except (OutsideCover, DomainError):
                eq[i] = False
        good &= eq
        k = np.where(good, n, k)
        if not good.any():
            break
    indices = tuple(None if v > horizon else int(v) for v in k)
    return StableCheck(samples, horizon, indices, tuple(pts))


# ---------------------------------------------------------------------------
# stabilization sets
# ---------------------------------------------------------------------------

def _bind(e: Node, env: dict) -> Node:
    for k, v in env.items():
        e = substitute(e, k, v)
    return e


def equality_set(f1: Func, f2: Func) -> RSet:
    """{x : f1(x) = f2(x)} exactly, for piecewise-polynomial terms."""
    p1 = [(d, _bind(e, getattr(f1, "env", {}))) for d, e in _raw_pieces(f1)]
    p2 = [(d, _bind(e, getattr(f2, "env", {}))) for d, e in _raw_pieces(f2)]
    breaks = set()
    for d1, e1 in p1:
        breaks.update(v for v in d1.endpoints() if v not in (NEG_INF, POS_INF))
    for d2, e2 in p2:
        breaks.update(v for v in d2.endpoints() if v not in (NEG_INF, POS_INF))
    for d1, e1 in p1:
        for d2, e2 in p2:
            ov = d1 & d2
            if ov.is_empty():
                continue
            lo, hi = ov.hull()
            try:
                breaks.update(level_breakpoints(Node("sub", (e1, e2)), [0], lo, hi))
            except (IrrationalBreak, NotPolynomial) as err:
                raise Unresolvable(f"equality set not certifiable: {err}") from err

    def pred(x):
        try:
            return to_exact(f1(x)) == to_exact(f2(x))
        except (OutsideCover, DomainError):
            return False
    return RSet.make(from_predicate(breaks, pred))


def _raw_pieces(f: Func) -> list:
    if isinstance(f, PiecewiseFunc):
        return [(b, e) for b, e, _ in f.parts]
    return list(f.pieces())


@dataclass(frozen=True)
class StabilizationSets:
    X_kn: dict  # (k, n) with k >= n -> RSet; the relation is symmetric
    X_n: dict
    horizon: int
    label: str = "truncated-intersection"

    def pair(self, k: int, n: int) -> RSet:
        return self.X_kn[(max(k, n), min(k, n))]

    def tags(self, n: int) -> frozenset:
        return classify_set(self.X_n[n])

    def monotone(self) -> bool:
        return all(self.X_n[n].issubset(self.X_n[n + 1]) for n in range(1, self.horizon))

    def check_restriction(self, seq: FuncSeq, f: Func, samples: int = 1000, seed: int = 0,
                          window=None) -> list:
        """Points of X_n where f and the n-th term differ (should be empty)."""
        lo, hi = window or f.window
        rng = np.random.default_rng(np.random.SeedSequence([seed, 17]))
        bad = []
        for n in sorted(self.X_n):
            S = self.X_n[n] & RSet.closed(lo, hi)
            if S.is_empty():
                continue
            pts = [Fraction(float(u)) for u in rng.uniform(float(lo), float(hi), samples)]
            pts = [p for p in pts if S.contains(p)]
            pts += [e for e in S.endpoints() if S.contains(e)]
            for p in pts:
                if to_exact(seq.term(n)(p)) != to_exact(f(p)):
                    bad.append((n, p))
        return bad

    def to_json(self, pairs: bool = False) -> dict:
        out = {"horizon": self.horizon, "label": self.label, "X_kn_count": len(self.X_kn),
               "X_n": {str(n): S.to_json() for n, S in sorted(self.X_n.items())},
               "X_n_tags": {str(n): sorted(self.tags(n)) for n in sorted(self.X_n)}}
        if pairs:
            out["X_kn"] = [[k, n, S.to_json()] for (k, n), S in sorted(self.X_kn.items())]
        return out


def pieces_from_stable(seq: FuncSeq, horizon: int = N_MAX) -> StabilizationSets:
    # one extra term so that X_horizon is not trivially the whole line
    top = horizon + 1
    terms = [None] + [seq.term(n) for n in range(1, top + 1)]
    X_kn = {}
    for n in range(1, top + 1):
        for k in range(n, top + 1):
            X_kn[(k, n)] = RSet.reals() if k == n else equality_set(terms[k], terms[n])
    X_n = {}
    for n in range(1, horizon + 1):
        S = RSet.reals()
        for k in range(n, top + 1):
            S = S & X_kn[(k, n)]
        X_n[n] = S
    return StabilizationSets(X_kn, X_n, horizon)
