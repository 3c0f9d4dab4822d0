"""Runtime functions R -> R: expressions, piecewise, builtins, limits, composites.

Every function supports

* exact evaluation ``f(x)`` at rationals and surds,
* ``vec(xs, gen)``: float evaluation over sample arrays, returning values and a
  mask of entries too close to a discontinuity to trust (callers re-evaluate
  those exactly),
* ``hints(lo, hi)``: adversarial points (piece boundaries, enumeration points).
"""
from __future__ import annotations

import math
import warnings
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import enumeration as en
from .dsl import DomainError, Node, eval_array, eval_ast
from .dsl.ast import substitute, to_source
from .dsl.evaluate import NotEnclosable, enclose
from .dsl.poly import IrrationalBreak, NotPolynomial, level_breakpoints
from .exact import TAU_CMP, Surd, sample_point, to_exact
from .sets import (NEG_INF, POS_INF, Interval, RSet, classify_set, from_predicate,
                   normalize)

N_EVAL = 2**10
DEFAULT_WINDOW = (Fraction(-2), Fraction(2))
NEAR = 1e-9  # float distance below which a breakpoint makes a sample uncertain


class OutsideCover(ValueError):
    pass


class Unresolvable(ValueError):
    pass


class NonConvergedWarning(UserWarning):
    pass


def near_mask(xs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """True where xs lies within NEAR (relative) of a sorted point array."""
    if len(pts) == 0:
        return np.zeros(xs.shape, dtype=bool)
    i = np.searchsorted(pts, xs)
    out = np.zeros(xs.shape, dtype=bool)
    for j in (i - 1, i):
        jj = np.clip(j, 0, len(pts) - 1)
        p = pts[jj]
        out |= np.abs(xs - p) <= NEAR * np.maximum(1.0, np.abs(p))
    return out


def _finite(v) -> bool:
    return v not in (NEG_INF, POS_INF)


# ---------------------------------------------------------------------------
# base class
# ---------------------------------------------------------------------------

class Func:
    kind = "abstract"
    name = "f"
    window = DEFAULT_WINDOW
    # exact values at deeply enumerated rationals need huge integers
    deep_cost = False

    def deep_value(self, p):
        """Float stand-in for the value at a rational deeper than DEEP, or None."""
        return None

    def __call__(self, x):
        raise NotImplementedError

    def vec(self, xs: np.ndarray, gen: np.ndarray):
        vals = np.empty(len(xs))
        for i, (v, g) in enumerate(zip(xs, gen)):
            try:
                vals[i] = float(self(sample_point(v, g)))
            except (OutsideCover, DomainError):
                vals[i] = np.nan
        return vals, np.isnan(vals)

    def hints(self, lo, hi, cap=None) -> list:
        return []

    def preimage(self, V: RSet) -> "Preimage":
        raise Unresolvable(f"no preimage procedure for {self.describe()}")

    def describe(self) -> str:
        return f"{self.kind}:{self.name}"

    def pieces(self):
        """Disjoint plain parts with their expressions, if the function has them."""
        raise Unresolvable(f"{self.describe()} has no finite piece structure")


@dataclass(frozen=True)
class Preimage:
    set: RSet
    tags: frozenset
    uncertain: RSet = RSet()
    clipped_to: tuple | None = None

    def to_json(self):
        return {"set": self.set.to_json(), "tags": sorted(self.tags),
                "uncertain": self.uncertain.to_json(),
                "clipped_to": None if self.clipped_to is None
                else [str(self.clipped_to[0]), str(self.clipped_to[1])]}


def _preimage_result(S: RSet, unc: RSet = RSet(), clip=None) -> Preimage:
    return Preimage(S, classify_set(S), unc, clip)


# ---------------------------------------------------------------------------
# expressions and piecewise functions
# ---------------------------------------------------------------------------

def _value_in(V: RSet, v) -> bool:
    if isinstance(v, float):
        v = Fraction(v)
    return V.contains(v)


def _bisect_preimage(e: Node, iv: Interval, V: RSet, env, tol=Fraction(1, 2**22)):
    """Certified preimage of V under e on a bounded interval, by enclosure
    bisection; returns (inside, uncertain) plain RSets."""
    inside, unsure = [], []
    stack = [(Fraction(iv.lo), Fraction(iv.hi))]
    Vc = V.closure()
    Vi = V.interior()
    while stack:
        l, h = stack.pop()
        try:
            lo_v, hi_v = enclose(e, l, h, env)
        except NotEnclosable as exc:
            raise Unresolvable(str(exc)) from None
        box = RSet.closed(lo_v, hi_v)
        if box.issubset(Vi):
            inside.append(Interval(l, h))
            continue
        if (box & Vc).is_empty():
            continue
        if h - l <= tol:
            unsure.append(Interval(l, h))
            continue
        m = (l + h) / 2
        stack.append((l, m))
        stack.append((m, h))
    own = RSet((iv,))
    return RSet.make(inside) & own, RSet.make(unsure) & own


def expr_preimage(e: Node, domain: RSet, V: RSet, window, env=None):
    """{x in domain : e(x) in V}: exact when level sets are rational, else
    bisection-certified on the window with the uncertainty reported."""
    env = env or {}
    targets = [b for b in V.endpoints()]
    try:
        bps = level_breakpoints(e, targets, NEG_INF, POS_INF, env)
    except (NotPolynomial, IrrationalBreak):
        bps = None
    if bps is not None:
        bps = sorted(set(bps) | set(domain.endpoints()))

        def pred(x):
            if not domain.contains(x):
                return False
            try:
                return _value_in(V, eval_ast(e, x, env))
            except DomainError:
                return False
        return RSet.make(from_predicate(bps, pred)), RSet(), None
    # fallback: certified bisection inside the window
    W = RSet.closed(*window)
    dom = domain & W
    inside, unsure = RSet(), RSet()
    for iv in dom.intervals:
        if iv.is_point:
            try:
                if _value_in(V, eval_ast(e, iv.lo, env)):
                    inside = inside | RSet((iv,))
            except DomainError:
                pass
            continue
        a, b = _bisect_preimage(e, iv, V, env)
        inside, unsure = inside | a, unsure | b
    return inside - unsure, unsure, (window[0], window[1])


class ExprFunc(Func):
    kind = "expr"

    def __init__(self, ast: Node, name: str | None = None, env: dict | None = None,
                 window=DEFAULT_WINDOW):
        self.ast = ast
        self.env = dict(env or {})
        self.name = name or to_source(ast)
        self.window = window

    def __call__(self, x):
        return eval_ast(self.ast, x, self.env)

    def vec(self, xs, gen):
        env = dict(self.env)
        env["x"] = xs
        env["y"] = xs
        vals = np.broadcast_to(np.asarray(eval_array(self.ast, env), dtype=float),
                               np.shape(xs)).copy()
        return vals, np.isnan(vals)

    def preimage(self, V):
        S, unc, clip = expr_preimage(self.ast, RSet.reals(), V, self.window, self.env)
        return _preimage_result(S, unc, clip)

    def pieces(self):
        return [(RSet.reals(), self.ast)]

    def describe(self):
        return f"expr:{self.name}"


class PiecewiseFunc(Func):
    """Pieces (domain, expression); where domains overlap the first wins."""

    kind = "piecewise"

    def __init__(self, pieces: Sequence, name: str = "f", window=DEFAULT_WINDOW,
                 env: dict | None = None):
        self.raw = tuple((d, e) for d, e in pieces)
        for d, _ in self.raw:
            if d.tail is not None:
                raise ValueError("piece domains must be plain sets")
        self.name = name
        self.window = window
        self.env = dict(env or {})
        parts = []
        seen = RSet()
        for i, (d, e) in enumerate(self.raw):
            b = d - seen
            seen = seen | d
            if not b.is_empty():
                parts.append((b, e, i))
        self.parts = tuple(parts)
        self.coverage = seen
        comps = []
        for pi, (b, _, _) in enumerate(self.parts):
            for iv in b.intervals:
                comps.append((iv.lo, iv.hi, pi))
        comps.sort(key=lambda t: (t[0], t[1]))
        self._comp_lo = np.array([float(c[0]) for c in comps])
        self._comp_hi = np.array([float(c[1]) for c in comps])
        self._comp_part = np.array([c[2] for c in comps], dtype=np.int64)
        self._breaks = np.array(sorted({float(v) for c in comps for v in c[:2] if _finite(v)}))

    def locate(self, x):
        for pi, (b, _, _) in enumerate(self.parts):
            if b.contains(x):
                return pi
        raise OutsideCover(f"no piece covers {x}")

    def __call__(self, x):
        pi = self.locate(x)
        return eval_ast(self.parts[pi][1], x, self.env)

    def vec(self, xs, gen):
        vals = np.full(len(xs), np.nan)
        if len(self._comp_lo) == 0:
            return vals, np.ones(len(xs), dtype=bool)
        i = np.searchsorted(self._comp_lo, xs, side="right") - 1
        ic = np.clip(i, 0, len(self._comp_lo) - 1)
        inside = (i >= 0) & (xs <= self._comp_hi[ic])
        part = np.where(inside, self._comp_part[ic], -1)
        env = dict(self.env)
        for pi, (_, e, _) in enumerate(self.parts):
            m = part == pi
            if m.any():
                env["x"] = xs[m]
                env["y"] = xs[m]
                vals[m] = eval_array(e, env)
        unc = near_mask(xs, self._breaks) | np.isnan(vals)
        return vals, unc

    def hints(self, lo, hi, cap=None):
        return [v for v in self.coverage.endpoints() if lo <= v <= hi][:cap]

    def pieces(self):
        return [(b, e) for b, e, _ in self.parts]

    def preimage(self, V):
        out, unc, clip = RSet(), RSet(), None
        for b, e, _ in self.parts:
            s, u, c = expr_preimage(e, b, V, self.window, self.env)
            out, unc = out | s, unc | u
            clip = clip or c
        return _preimage_result(out, unc, clip)

    def consistency_check(self, samples: int = 1000, seed: int = 0, tol=TAU_CMP):
        """Overlapping domains must agree; returns list of disagreeing points."""
        rng = np.random.default_rng(seed)
        bad = []
        for i in range(len(self.raw)):
            for j in range(i + 1, len(self.raw)):
                ov = self.raw[i][0] & self.raw[j][0] & RSet.closed(*self.window)
                if ov.is_empty():
                    continue
                pts = [iv.lo for iv in ov.intervals] + [iv.hi for iv in ov.intervals]
                for iv in ov.intervals:
                    if not iv.is_point:
                        us = rng.random(max(1, samples // max(1, len(ov.intervals))))
                        pts += [iv.lo + (iv.hi - iv.lo) * Fraction(float(u)) for u in us]
                for p in pts:
                    if not ov.contains(p):
                        continue
                    a = eval_ast(self.raw[i][1], p, self.env)
                    b = eval_ast(self.raw[j][1], p, self.env)
                    if abs(a - b) > tol:
                        bad.append((p, a, b))
        return bad

    def describe(self):
        return f"piecewise:{self.name}"

    def to_bdsl(self) -> str:
        from .dsl.ast import rset_source
        body = "; ".join(f"piece on {rset_source(d)}: {to_source(e)}" for d, e in self.raw)
        return f"func {self.name} {{ {body} }}"


# ---------------------------------------------------------------------------
# builtins
# ---------------------------------------------------------------------------

class Builtin(Func):
    kind = "builtin"
    params: tuple = ()

    def describe(self):
        if self.params:
            return f"builtin:{self.name}(" + ",".join(str(p) for p in self.params) + ")"
        return f"builtin:{self.name}"


class Step(Builtin):
    """0 on (-inf, 0], 1 on (0, inf)."""

    name = "step"

    def __call__(self, x):
        return Fraction(0) if x <= 0 else Fraction(1)

    def vec(self, xs, gen):
        return (xs > 0).astype(float), np.abs(xs) <= NEAR

    def hints(self, lo, hi, cap=None):
        return [Fraction(0)] if lo <= 0 <= hi else []

    def preimage(self, V):
        S = RSet()
        if V.contains(Fraction(0)):
            S = S | RSet.interval(NEG_INF, 0, False, True)
        if V.contains(Fraction(1)):
            S = S | RSet.interval(0, POS_INF, False, False)
        return _preimage_result(S)

    def as_piecewise(self, window=DEFAULT_WINDOW) -> PiecewiseFunc:
        from .dsl import const
        return PiecewiseFunc([(RSet.interval(NEG_INF, 0, False, True), const(0)),
                              (RSet.interval(0, POS_INF, False, False), const(1))],
                             name="step", window=window)

    def pieces(self):
        return self.as_piecewise().pieces()


class JumpSum(Builtin):
    """x -> sum of 2^-n over n <= N with r_n <= x."""

    name = "jumpsum"

    def __init__(self, N: int = 20):
        self.N = int(N)
        self.params = (self.N,)
        pts = en.first(self.N)
        order = sorted(range(self.N), key=lambda i: pts[i])
        self.points = tuple(pts[i] for i in order)
        self.indices = tuple(i + 1 for i in order)
        acc, cum = Fraction(0), [Fraction(0)]
        for i in order:
            acc += Fraction(1, 2 ** (i + 1))
            cum.append(acc)
        self.cumulative = tuple(cum)
        self._pts_f = np.array([float(p) for p in self.points])
        self._cum_f = np.array([float(c) for c in cum])

    def __call__(self, x):
        return self.cumulative[bisect_right(self.points, x)]

    def vec(self, xs, gen):
        k = np.searchsorted(self._pts_f, xs, side="right")
        return self._cum_f[k], near_mask(xs, self._pts_f)

    def hints(self, lo, hi, cap=None):
        return [p for p in self.points if lo <= p <= hi][:cap]

    def jump_at(self, n: int) -> Fraction:
        return Fraction(1, 2**n)

    def preimage(self, V):
        pts = list(self.points)
        S = RSet.make(from_predicate(pts, lambda x: V.contains(self(x))))
        return _preimage_result(S)

    def as_piecewise(self, window=DEFAULT_WINDOW) -> PiecewiseFunc:
        from .dsl import const
        pieces = []
        bounds = [NEG_INF] + list(self.points) + [POS_INF]
        for k in range(len(bounds) - 1):
            pieces.append((RSet.interval(bounds[k], bounds[k + 1], k > 0, False),
                           const(self.cumulative[k])))
        return PiecewiseFunc(pieces, name=f"jumpsum{self.N}", window=window)


def enum_hints(N: int, lo, hi, cap: int | None = None) -> list:
    """r_n (n <= N) in [lo, hi]; with a cap, the earliest-enumerated ones."""
    _, exact, idx = en.sorted_prefix(N)
    i, j = bisect_left(exact, lo), bisect_right(exact, hi)
    if cap is None or j - i <= cap:
        return list(exact[i:j])
    keep = np.sort(np.argsort(idx[i:j], kind="stable")[:cap])
    return [exact[i + k] for k in keep]


class _EnumeratedBuiltin(Builtin):
    def __init__(self, N: int = 1000):
        self.N = int(N)
        self.params = ()

    def hints(self, lo, hi, cap=None):
        return enum_hints(self.N, lo, hi, cap)


class Riemann(_EnumeratedBuiltin):
    """1/n at r_n, 0 at every other point."""

    name = "riemann"
    deep_cost = True

    def deep_value(self, p):
        return 0.0  # true value is below 2^-DEEP

    def __call__(self, x):
        if en.in_range(x):
            return Fraction(1, _index(x))
        return Fraction(0)

    def vec(self, xs, gen):
        vals = np.zeros(len(xs))
        idx = np.nonzero((~gen) & (xs > 0) & (xs < 1))[0]
        for i in idx:
            vals[i] = en.float_reciprocal_index(float(xs[i]))
        return vals, np.zeros(len(xs), dtype=bool)

    def preimage(self, V):
        off = RSet.reals() if V.contains(Fraction(0)) else RSet()
        # indices n with 1/n in V: cofinitely many when V reaches down to 0
        reach = next((iv.hi for iv in V.intervals if iv.lo <= 0 < iv.hi), None)
        if reach is not None:
            top = 2 if reach == POS_INF else math.floor(1 / reach) + 1
            missing = [en.rational_at(n) for n in range(1, top + 1)
                       if not V.contains(Fraction(1, n))]
            on = RSet.open(0, 1) - RSet.points(missing)
        else:
            lows = [iv.lo for iv in V.intervals if iv.lo > 0]
            top = math.floor(1 / min(lows)) if lows else 0
            on = RSet.points(en.rational_at(n) for n in range(1, top + 1)
                             if V.contains(Fraction(1, n)))
        return _preimage_result(RSet.make(off.intervals, _tail(self.N), on.intervals))


MAX_DEPTH = 10**5


def _index(p) -> int:
    if en.depth_of(p) > MAX_DEPTH:
        raise Unresolvable(f"enumeration index of {p} has more than {MAX_DEPTH} bits")
    return en.index_of(p)


def _tail(N):
    from .sets import Tail
    return Tail("rationals", N)


class Dirichlet(_EnumeratedBuiltin):
    """Indicator of the enumerated rationals of (0, 1)."""

    name = "dirichlet"

    def __call__(self, x):
        return Fraction(1) if en.in_range(x) else Fraction(0)

    def vec(self, xs, gen):
        # sample floats are the points themselves, so the screen is exact
        return ((~gen) & (xs > 0) & (xs < 1)).astype(float), np.zeros(len(xs), dtype=bool)

    def preimage(self, V):
        off = RSet.reals() if V.contains(Fraction(0)) else RSet()
        on = RSet.open(0, 1) if V.contains(Fraction(1)) else RSet()
        return _preimage_result(RSet.make(off.intervals, _tail(self.N), on.intervals))


class Reciprocals(Builtin):
    """Indicator of {1/n : n >= 1}."""

    name = "reciprocals"

    def __call__(self, x):
        if isinstance(x, Fraction) and x > 0 and x.numerator == 1:
            return Fraction(1)
        return Fraction(0)

    def vec(self, xs, gen):
        with np.errstate(divide="ignore"):
            inv = np.where(xs > 0, 1.0 / np.where(xs > 0, xs, 1.0), 0.5)
        hit = (~gen) & (xs > 0) & (np.abs(inv - np.round(inv)) == 0)
        unc = (xs > 0) & (np.abs(inv - np.round(inv)) < 1e-6) & ~hit
        return hit.astype(float), unc


class Sequenced(Func):
    """t -> value(index(t)) on the enumerated rationals, ``off`` elsewhere."""

    kind = "enumerated"

    def __init__(self, on_index: Callable[[int], object], off, name: str, N: int = 1000,
                 deep=None):
        self.on_index = on_index
        self.off = off
        self.name = name
        self.N = N
        self.deep = deep  # limit of on_index(n), used past DEEP

    deep_cost = True

    def deep_value(self, p):
        return None if self.deep is None else float(self.deep)

    def __call__(self, t):
        if en.in_range(t):
            return self.on_index(_index(t))
        return self.off

    def hints(self, lo, hi, cap=None):
        return enum_hints(self.N, lo, hi, cap)

    def vec(self, xs, gen):
        vals = np.full(len(xs), float(self.off))
        unc = np.zeros(len(xs), dtype=bool)
        for i in np.nonzero((~gen) & (xs > 0) & (xs < 1))[0]:
            p = Fraction(float(xs[i]))
            if en.depth_of(p) > DEEP:
                if self.deep is None:
                    unc[i] = True
                else:
                    vals[i] = float(self.deep)
            else:
                vals[i] = float(self.on_index(en.index_of(p)))
        return vals, unc

    def then(self, outer: Func, name: str | None = None, deep=None) -> "Sequenced":
        """outer after self, again of the enumerated form.

        ``deep`` is the eventual value of outer(on_index(n)); it is not
        outer(self.deep) unless outer is continuous there, so the caller supplies it.
        """
        return Sequenced(lambda n: outer(self.on_index(n)), outer(self.off),
                         name or f"{outer.describe()}∘{self.name}", self.N, deep)

    def preimage(self, V):
        """Exact on r_1..r_N; indices beyond N follow the ``deep`` value."""
        if self.deep is None:
            raise Unresolvable("tail behaviour unknown without a deep value")
        off = RSet.reals() if _value_in(V, self.off) else RSet()
        pts = en.first(self.N)
        hit = [pts[n - 1] for n in range(1, self.N + 1) if _value_in(V, self.on_index(n))]
        if _value_in(V, self.deep):
            miss = [pts[n - 1] for n in range(1, self.N + 1)
                    if not _value_in(V, self.on_index(n))]
            on = RSet.open(0, 1) - RSet.points(miss)
        else:
            on = RSet.points(hit)
        return _preimage_result(RSet.make(off.intervals, _tail(self.N), on.intervals))


class Composite(Func):
    kind = "composite"

    def __init__(self, outer: Func, inner: Func, name: str | None = None):
        self.outer = outer
        self.inner = inner
        self.name = name or f"{outer.describe()}∘{inner.describe()}"
        self.deep_cost = outer.deep_cost or inner.deep_cost

    def __call__(self, x):
        return self.outer(self.inner(x))

    def vec(self, xs, gen):
        v, u = self.inner.vec(xs, gen)
        w, uw = self.outer.vec(v, np.zeros(len(v), dtype=bool))
        return w, u | uw

    def hints(self, lo, hi, cap=None):
        return _hints(self.inner, lo, hi, cap)

    def preimage(self, V):
        inner_set = self.outer.preimage(V)
        if not inner_set.uncertain.is_empty():
            raise Unresolvable("outer preimage is not exact")
        return self.inner.preimage(inner_set.set)


# ---------------------------------------------------------------------------
# sequences
# ---------------------------------------------------------------------------

class AstTerms:
    """n -> ExprFunc of an expression in x and n."""

    def __init__(self, ast: Node):
        self.ast = ast

    def __call__(self, n: int) -> Func:
        return ExprFunc(self.ast, name=f"{to_source(self.ast)}[n={n}]", env={"n": Fraction(n)})


@dataclass(frozen=True)
class FuncSeq:
    generator: Callable[[int], Func]
    mode: str = "pointwise"
    limit_hint: Func | None = None
    source: Node | None = None
    name: str = "seq"

    def term(self, n: int) -> Func:
        return self.generator(n)

    def vec_term(self, n: int, xs, gen):
        fast = getattr(self.generator, "vec_term", None)
        if fast is not None:
            return fast(n, xs, gen)
        return self.term(n).vec(xs, gen)

    def to_bdsl(self) -> str:
        if self.source is None:
            raise Unresolvable("sequence has no closed form in n")
        return f"limit {self.name} {{ seq(n): {to_source(self.source)}; mode: {self.mode} }}"


def seq_from_ast(ast: Node, mode: str = "pointwise", name: str = "seq",
                 limit_hint: Func | None = None) -> FuncSeq:
    return FuncSeq(AstTerms(ast), mode, limit_hint, ast, name)


class LimitFunc(Func):
    kind = "limit"

    def __init__(self, seq: FuncSeq, name: str | None = None, n_eval: int = N_EVAL):
        self.seq = seq
        self.name = name or seq.name
        self.n_eval = n_eval

    def __call__(self, x):
        if self.seq.mode == "pointwise":
            warnings.warn(f"{self.name}: evaluated at n={self.n_eval} (approximate)",
                          NonConvergedWarning, stacklevel=2)
        return self.seq.term(self.n_eval)(x)

    def vec(self, xs, gen):
        return self.seq.vec_term(self.n_eval, xs, gen)

    def preimage(self, V):
        raise Unresolvable("preimage of a limit function is not computed")


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def evaluate(f: Func, x):
    x = to_exact(x)
    return f(x)


def evaluate_report(f: Func, x) -> dict:
    x = to_exact(x)
    approx = isinstance(f, LimitFunc) and f.seq.mode != "stable"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergedWarning)
        v = f(x)
    return {"x": str(x), "value": str(v), "approximate": approx,
            "n_eval": getattr(f, "n_eval", None)}


def preimage(f: Func, V: RSet) -> Preimage:
    if isinstance(f, LimitFunc):
        raise Unresolvable("Limit variant rejected")
    if V.is_empty():
        return _preimage_result(RSet())
    return f.preimage(V)


BUILTINS = ("riemann", "dirichlet", "jumpsum", "step", "reciprocals")


def builtin(name: str, N: int | None = None) -> Func:
    if name == "step":
        return Step()
    if name == "jumpsum":
        return JumpSum(N or 20)
    if name == "riemann":
        return Riemann(N or 1000)
    if name == "dirichlet":
        return Dirichlet(N or 1000)
    if name == "reciprocals":
        return Reciprocals()
    raise ValueError(f"unknown builtin {name!r}")


# ---------------------------------------------------------------------------
# oscillation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscillationEstimate:
    x: object
    radii: tuple
    estimates: tuple
    monotone: bool
    samples: int

    @property
    def final(self):
        return self.estimates[-1]

    def to_json(self):
        return {"x": str(self.x), "radii": [str(r) for r in self.radii],
                "estimates": [float(e) for e in self.estimates],
                "monotone": self.monotone, "samples": self.samples}


DEEP = 2048


def _hints(f: Func, lo, hi, cap):
    return f.hints(lo, hi, cap)


def _forced_points(f: Func, lo, hi, cap: int = 64):
    return [p for p in _hints(f, lo, hi, cap) if lo < p < hi]


def _too_deep(f: Func, p) -> bool:
    return f.deep_cost and en.in_range(p) and en.depth_of(p) > DEEP


def _window_samples(rng, x, w, m):
    xf = float(x)
    out = []
    us = rng.random(m)
    for j, u in enumerate(us):
        v = xf + float(w) * (2 * float(u) - 1)
        p = sample_point(v, j % 2 == 1)
        if x - w < p < x + w:
            out.append(p)
    return out


def oscillation(f: Func, x, K: int = 20, m: int = 16, seed: int = 0,
                restrict: RSet | None = None, forced_cap: int = 64,
                finest_only: bool = False) -> OscillationEstimate:
    """Lower-bound estimates of the oscillation of f (or f restricted) at x
    over windows of radius 2^-k, k = 1..K; samples are nested so the
    estimates are non-increasing.

    The finest window is processed first, so ``finest_only`` yields the same
    ``final`` value without the coarser windows."""
    x = to_exact(x)
    rng = np.random.default_rng([seed, 0x05C1])
    pool = []
    estimates = []
    radii = []
    for k in range(K, K - 1 if finest_only else 0, -1):
        w = Fraction(1, 2**k)
        lo, hi = x - w, x + w
        cand = [x, x - w / 2, x + w / 2]
        cand += [sample_point(float(c), True) for c in (x - w / 2, x + w / 2)]
        cand += _window_samples(rng, x, w, m)
        cand += _forced_points(f, lo, hi, forced_cap)
        for p in cand:
            if restrict is not None and not restrict.contains(p):
                continue
            if _too_deep(f, p):
                v = f.deep_value(p)
                if v is not None:
                    pool.append(v)
                continue
            try:
                pool.append(f(p))
            except (OutsideCover, DomainError):
                continue
        est = (max(pool) - min(pool)) if pool else Fraction(0)
        estimates.append(est)
        radii.append(w)
    estimates.reverse()
    radii.reverse()
    mono = all(estimates[i + 1] <= estimates[i] + TAU_CMP for i in range(len(estimates) - 1))
    return OscillationEstimate(x, tuple(radii), tuple(estimates), mono, len(pool))


@dataclass(frozen=True)
class ScanVerdict:
    eps: object
    witness: object | None
    omega: object | None
    scanned: int
    label: str

    @property
    def found(self) -> bool:
        return self.witness is not None

    def to_json(self):
        return {"eps": str(self.eps), "witness": None if self.witness is None else str(self.witness),
                "omega": None if self.omega is None else float(self.omega),
                "scanned": self.scanned, "label": self.label}


def scan_candidates(F: RSet, window, budget: int, seed: int = 0, N: int = 1000):
    """Seeded candidate points of F within the window."""
    W = RSet.closed(*window)
    if F.tail is not None:
        fl, exact, idx = en.sorted_prefix(N)
        order = sorted(range(len(exact)), key=lambda i: idx[i])
        pts = [exact[i] for i in order if F.contains(exact[i]) and W.contains(exact[i])]
        return pts[:budget], "truncated-subspace"
    G = F & W
    pts = list(G.isolated_points())
    comps = [iv for iv in G.intervals if not iv.is_point]
    if comps:
        rng = np.random.default_rng([seed, 0x5CA7])
        lengths = np.array([float(iv.hi - iv.lo) for iv in comps])
        probs = lengths / lengths.sum()
        which = rng.choice(len(comps), size=budget, p=probs)
        us = rng.random(budget)
        for j, (c, u) in enumerate(zip(which, us)):
            iv = comps[c]
            v = float(iv.lo) + float(iv.hi - iv.lo) * float(u)
            p = sample_point(v, j % 2 == 0)
            if G.contains(p):
                pts.append(p)
    return pts[:budget], "grid"


def barely_continuity_scan(f: Func, F: RSet, eps, budget: int = 10_000, seed: int = 0,
                           K: int = 20, m: int = 8, N: int = 1000,
                           window=DEFAULT_WINDOW) -> ScanVerdict:
    """Look for x in F whose restricted oscillation estimate is below eps."""
    eps = to_exact(eps)
    pts, label = scan_candidates(F, window, budget, seed, N)
    for i, p in enumerate(pts):
        est = oscillation(f, p, K=K, m=m, seed=seed + i, restrict=F, finest_only=True).final
        if est <= eps - TAU_CMP:
            return ScanVerdict(eps, p, est, i + 1, label)
    return ScanVerdict(eps, None, None, len(pts), label)
