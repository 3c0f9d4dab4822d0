"""Gauges, neighbourhood maps and sigma-discrete covers.

A parts-based cover starts from disjoint plain sets B_1, B_2, ...; its level n
is the family of shrinks {x in B_i : dist(x, cl(B_i) minus B_i) >= 1/n}.  The
shrinks are closed, increase with n, and distinct parts stay apart by at least
1/n at level n, so every level is discrete and the levels exhaust the parts.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dsl import DomainError, Node, eval_array, eval_ast, to_source
from .dsl.evaluate import NotEnclosable, enclose
from .exact import DELTA_MAX, TAU_CMP, fmt_number, sample_point, to_exact
from .falsify import EpsilonSpec, eps_delta_falsify
from .functions import (NEAR, Func, JumpSum, OutsideCover, PiecewiseFunc, Riemann, Step,
                        Unresolvable, expr_preimage, near_mask, preimage)
from .sets import (NEG_INF, POS_INF, DiscreteFamily, Interval, RSet, classify_set, min_gap)
from . import enumeration as en

N_LEVELS = 32
DMAX = float(DELTA_MAX)


class RefinementFailure(ValueError):
    pass


class ThresholdUnresolvable(ValueError):
    pass


class NotCovered(OutsideCover):
    pass


class GaugeValidationError(ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"gauge failed validation: {report.violation_count} violation(s)")


def _fin(v) -> bool:
    return v not in (NEG_INF, POS_INF)


def _finite_abs(a: np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(a), np.abs(a), 0.0)


# ---------------------------------------------------------------------------
# gauges
# ---------------------------------------------------------------------------

class Gauge:
    kind = "gauge"
    claimed_class = "unknown"
    validation = None

    def __call__(self, x):
        raise NotImplementedError

    def vec(self, xs, gen):
        vals = np.empty(len(xs))
        for i, (v, g) in enumerate(zip(xs, gen)):
            try:
                vals[i] = float(self(sample_point(v, g)))
            except (OutsideCover, DomainError):
                vals[i] = np.nan
        return vals, np.isnan(vals)

    def level_set(self, c, window) -> RSet:
        """{x : delta(x) > c} as an exact set."""
        raise ThresholdUnresolvable(f"no exact threshold for {self.describe()}")

    def neighborhood(self, x) -> RSet:
        d = self(x)
        return RSet.open(x - d, x + d)

    def describe(self) -> str:
        return self.kind

    def to_json(self) -> dict:
        out = {"kind": self.kind, "describe": self.describe(),
               "claimed_class": self.claimed_class}
        if self.validation is not None:
            out["validation"] = self.validation.to_json()
        return out


class ConstantGauge(Gauge):
    kind = "constant"
    claimed_class = "continuous"

    def __init__(self, value):
        self.value = min(to_exact(value), DELTA_MAX)
        if not self.value > 0:
            raise ValueError("gauge must be positive")

    def __call__(self, x):
        return self.value

    def vec(self, xs, gen):
        return np.full(len(xs), float(self.value)), np.zeros(len(xs), dtype=bool)

    def level_set(self, c, window):
        return RSet.reals() if self.value > c else RSet()

    def describe(self):
        return f"const:{fmt_number(self.value)}"


class FormulaGauge(Gauge):
    """delta(x) = e(x) where e(x) > 0, and ``floor`` where e(x) <= 0."""

    kind = "formula"

    def __init__(self, ast: Node, floor=Fraction(1), env: dict | None = None):
        self.ast = ast
        self.floor = to_exact(floor)
        self.env = dict(env or {})
        self.claimed_class = "baire_one"

    def __call__(self, x):
        v = eval_ast(self.ast, x, self.env)
        if not v > 0:
            return self.floor
        return min(v, DELTA_MAX)

    def vec(self, xs, gen):
        env = dict(self.env)
        env["x"] = xs
        env["y"] = xs
        v = np.broadcast_to(np.asarray(eval_array(self.ast, env), dtype=float),
                            np.shape(xs)).copy()
        unc = np.isnan(v) | (np.abs(v) <= NEAR)
        v = np.where(v > 0, np.minimum(v, DMAX), float(self.floor))
        return v, unc

    def level_set(self, c, window):
        c = to_exact(c)
        if c >= DELTA_MAX:
            return RSet()
        S, unc, _ = expr_preimage(self.ast, RSet.reals(), RSet.interval(c, POS_INF, False, False),
                                  window, self.env)
        if self.floor > c:
            S0, unc0, _ = expr_preimage(self.ast, RSet.reals(),
                                        RSet.interval(NEG_INF, 0, False, True), window, self.env)
            S, unc = S | S0, unc | unc0
        if not unc.is_empty():
            raise ThresholdUnresolvable(f"level set of {to_source(self.ast)} at {c} not certified")
        return S

    def describe(self):
        return f"formula:{to_source(self.ast)}"


class JumpGauge(Gauge):
    """Half the distance to the nearest other big jump point."""

    kind = "jump"
    claimed_class = "baire_one"

    def __init__(self, points, source: str, eps):
        self.points = tuple(sorted(points))
        self.source = source
        self.eps = to_exact(eps)
        self._pf = np.array([float(p) for p in self.points])

    @staticmethod
    def for_function(f: Func, eps) -> "JumpGauge":
        eps = to_exact(eps)
        if isinstance(f, JumpSum):
            big = [en.rational_at(n) for n in range(1, f.N + 1) if Fraction(1, 2**n) >= eps / 2]
        elif isinstance(f, Riemann):
            big = [en.rational_at(n) for n in range(1, math.floor(2 / eps) + 1)]
        else:
            raise Unresolvable(f"no jump gauge for {f.describe()}")
        return JumpGauge(big, f.describe(), eps)

    def __call__(self, x):
        pts = self.points
        i = bisect_left(pts, x)
        best = DELTA_MAX
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(pts) and pts[j] != x:
                best = min(best, abs(x - pts[j]) / 2)
        return best

    def vec(self, xs, gen):
        if len(self._pf) == 0:
            return np.full(len(xs), DMAX), np.zeros(len(xs), dtype=bool)
        i = np.searchsorted(self._pf, xs)
        left = np.where(i > 0, xs - self._pf[np.clip(i - 1, 0, None)], np.inf)
        right = np.where(i < len(self._pf), self._pf[np.clip(i, None, len(self._pf) - 1)] - xs,
                         np.inf)
        d = np.minimum(np.minimum(left, right) / 2, DMAX)
        return d, near_mask(xs, self._pf)

    def level_set(self, c, window):
        c = to_exact(c)
        pts = self.points
        balls = RSet.make(Interval(p - 2 * c, p + 2 * c) for p in pts)
        S = balls.complement()
        lonely = [p for k, p in enumerate(pts)
                  if all(abs(p - q) > 2 * c for q in pts[max(0, k - 1):k + 2] if q != p)]
        if c >= DELTA_MAX:
            return RSet()
        return S | RSet.points(lonely)

    def describe(self):
        return f"jump:{self.source}@{fmt_number(self.eps)}"


# ---------------------------------------------------------------------------
# covers
# ---------------------------------------------------------------------------

def disjointify(sets) -> list:
    out, seen = [], RSet()
    for s in sets:
        out.append(s - seen)
        seen = seen | s
    return out


@dataclass(frozen=True)
class SigmaDiscreteCover:
    """Either parts-based (levels are shrinks of disjoint parts) or explicit."""

    parts: tuple = ()
    explicit: tuple | None = None  # tuple of tuples of closed RSets, one per level
    window: tuple = (Fraction(-2), Fraction(2))
    truncation: int = N_LEVELS
    label: str = "parts"
    gaps: tuple | None = None  # known gaps for explicit levels

    @property
    def n_levels(self) -> int:
        return len(self.explicit) if self.explicit is not None else self.truncation

    def members(self, n: int) -> list:
        if self.explicit is not None:
            return list(self.explicit[n - 1])
        return [p.shrink(n) for p in self.parts]

    def level(self, n: int) -> DiscreteFamily:
        ms = [m for m in self.members(n) if not m.is_empty()]
        if self.gaps is not None:
            return DiscreteFamily(tuple(ms), self.gaps[n - 1])
        if len(ms) <= 1:
            return DiscreteFamily(tuple(ms), DELTA_MAX)
        try:
            return min_gap(ms)
        except Exception as exc:
            raise RefinementFailure(f"level {n}: {exc}") from None

    def link(self, n: int, j: int):
        """Index at level n+1 of the designated superset of member j at level n."""
        if self.explicit is None:
            return j
        m = self.explicit[n - 1][j]
        if n >= len(self.explicit):
            return None
        for k, s in enumerate(self.explicit[n]):
            if m.issubset(s):
                return k
        return None

    def check(self) -> dict:
        links_ok = True
        for n in range(1, self.n_levels):
            for j, m in enumerate(self.members(n)):
                k = self.link(n, j)
                if k is None or not m.issubset(self.members(n + 1)[k]):
                    links_ok = False
        W = RSet.closed(*self.window)
        if self.explicit is None:
            union = RSet()
            for p in self.parts:
                union = union | p
            covered = W.issubset(union)
            label = "in the limit of levels"
        else:
            union = RSet()
            for n in range(1, self.n_levels + 1):
                for m in self.members(n):
                    union = union | m
            covered = W.issubset(union)
            label = f"by levels 1..{self.n_levels}"
        return {"links_ok": links_ok, "covers_window": covered, "coverage": label,
                "truncation": self.n_levels}

    def to_json(self, max_levels: int = 4) -> dict:
        out = {"label": self.label, "truncation": self.n_levels,
               "window": [fmt_number(self.window[0]), fmt_number(self.window[1])]}
        if self.explicit is None:
            out["parts"] = [p.to_json() for p in self.parts]
        out["levels"] = [self.level(n).to_json() for n in range(1, min(max_levels, self.n_levels) + 1)]
        return out


def refine_cover(pieces, window=(Fraction(-2), Fraction(2)), truncation: int = N_LEVELS
                 ) -> SigmaDiscreteCover:
    """Parts-based cover from a list of plain sets (disjointified in order)."""
    parts = tuple(p for p in disjointify(pieces) if not p.is_empty())
    for p in parts:
        if p.tail is not None:
            raise RefinementFailure("pieces must be plain sets")
    cover = SigmaDiscreteCover(parts, None, window, truncation)
    # a level with touching members means two parts share a limit point
    for n in (1, 2):
        cover.level(n)
    return cover


def explicit_cover(levels, window=(Fraction(-2), Fraction(2))) -> SigmaDiscreteCover:
    return SigmaDiscreteCover((), tuple(tuple(l) for l in levels), window, len(levels), "explicit")


@dataclass(frozen=True)
class NeighborhoodMap:
    gauge: Gauge
    provenance: str

    def __call__(self, x) -> RSet:
        return self.gauge.neighborhood(to_exact(x))

    def check(self, xs) -> bool:
        for x in xs:
            U = self(x)
            if not U.contains(to_exact(x)) or "open" not in classify_set(U):
                return False
        return True


class CoverGauge(Gauge):
    """delta(x) = distance from x to the other members of the first level
    containing x, for a parts-based cover."""

    kind = "cover"
    claimed_class = "baire_one"

    def __init__(self, cover: SigmaDiscreteCover, name: str = "cover"):
        if cover.explicit is not None:
            raise ValueError("use ExplicitCoverGauge for explicit covers")
        self.cover = cover
        self.name = name
        rows = []
        for pi, p in enumerate(cover.parts):
            miss = p.missing_endpoints()
            for iv in p.intervals:
                k = bisect_right(miss, iv.lo) - 1
                mL = miss[k] if k >= 0 and miss[k] <= iv.lo else NEG_INF
                k = bisect_left(miss, iv.hi)
                mR = miss[k] if k < len(miss) else POS_INF
                rows.append((iv.lo, iv.hi, iv, pi, mL, mR))
        rows.sort(key=lambda r: (r[0], r[1]))
        self.rows = tuple(rows)
        self._lo_e = [r[0] for r in rows]
        self._lo = np.array([float(r[0]) for r in rows])
        self._hi = np.array([float(r[1]) for r in rows])
        self._part = np.array([r[3] for r in rows], dtype=np.int64)
        self._mL = np.array([float(r[4]) for r in rows])
        self._mR = np.array([float(r[5]) for r in rows])
        self._ends = np.array(sorted({float(v) for r in rows for v in (r[0], r[1], r[4], r[5])
                                      if _fin(v)}))

    # exact ------------------------------------------------------------
    def locate(self, x) -> int:
        k = bisect_right(self._lo_e, x) - 1
        for j in (k, k - 1):
            if 0 <= j < len(self.rows) and self.rows[j][2].contains(x):
                return j
        raise NotCovered(f"{x} lies in no part of the cover")

    def level_of(self, x) -> int:
        c = self.locate(x)
        _, _, _, _, mL, mR = self.rows[c]
        d = min(x - mL if mL != NEG_INF else POS_INF, mR - x if mR != POS_INF else POS_INF)
        if d == POS_INF:
            return 1
        return max(1, math.ceil(1 / d))

    def _shrunk(self, j, r):
        lo, hi, iv, _, mL, mR = self.rows[j]
        a = lo if mL == NEG_INF else max(lo, mL + r)
        b = hi if mR == POS_INF else min(hi, mR - r)
        return a, b

    def __call__(self, x):
        c = self.locate(x)
        n = self.level_of(x)
        r = Fraction(1, n)
        part = self.rows[c][3]
        best = DELTA_MAX
        for step in (-1, 1):
            j = c + step
            while 0 <= j < len(self.rows):
                lo, hi = self.rows[j][0], self.rows[j][1]
                raw = x - hi if step < 0 else lo - x
                if raw >= best:
                    break
                if self.rows[j][3] != part:
                    a, b = self._shrunk(j, r)
                    if a <= b:
                        best = min(best, x - b if step < 0 else a - x)
                j += step
        return best

    def neighborhood(self, x):
        c = self.locate(x)
        n = self.level_of(x)
        part = self.rows[c][3]
        others = RSet()
        for k, p in enumerate(self.cover.parts):
            if k != part:
                others = others | p.shrink(n)
        return others.complement()

    # vectorized -------------------------------------------------------
    def locate_vec(self, xs):
        k = np.searchsorted(self._lo, xs, side="right") - 1
        kc = np.clip(k, 0, max(len(self._lo) - 1, 0))
        ok = (k >= 0) & (xs <= self._hi[kc]) if len(self._lo) else np.zeros(len(xs), bool)
        unc = near_mask(xs, self._ends) | ~ok
        return kc, ok, unc

    def vec(self, xs, gen):
        if len(self._lo) == 0:
            return np.full(len(xs), np.nan), np.ones(len(xs), dtype=bool)
        c, ok, unc = self.locate_vec(xs)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            d = np.minimum(xs - self._mL[c], self._mR[c] - xs)
            inv = np.where(np.isinf(d), 1.0, 1.0 / d)
            n = np.maximum(1.0, np.ceil(inv))
            # float error of 1/d, from rounding in d = x - m
            scale = np.abs(xs) + _finite_abs(self._mL[c]) + _finite_abs(self._mR[c])
            err = inv * (4e-16 * scale / d + 1e-14)
            unc |= ~np.isinf(d) & (np.abs(inv - np.round(inv)) <= np.nan_to_num(err, nan=1.0))
            r = 1.0 / n
        best = np.full(len(xs), DMAX)
        m = len(self._lo)
        part = self._part[c]
        # walk outward until the raw gap to the next component exceeds best
        active = {-1: np.ones(len(xs), dtype=bool), 1: np.ones(len(xs), dtype=bool)}
        pending = []
        for k in range(1, m):
            for step, act in active.items():
                idx = np.nonzero(act)[0]
                if len(idx) == 0:
                    continue
                j = c[idx] + step * k
                valid = (j >= 0) & (j < m)
                jj = np.clip(j, 0, m - 1)
                x = xs[idx]
                raw = (x - self._hi[jj]) if step < 0 else (self._lo[jj] - x)
                still = valid & (raw < best[idx])
                act[idx] = still
                idx, jj, x = idx[still], jj[still], x[still]
                other = self._part[jj] != part[idx]
                rr = r[idx]
                a = np.maximum(self._lo[jj], self._mL[jj] + rr)
                b = np.minimum(self._hi[jj], self._mR[jj] - rr)
                close = np.isfinite(a - b) & (np.abs(a - b) <= NEAR * np.maximum(1.0, np.abs(a)))
                dist = (x - b) if step < 0 else (a - x)
                # a nearly degenerate shrink only matters if it could set the minimum
                hit = other & close
                if hit.any():
                    pending.append((idx[hit], jj[hit], dist[hit]))
                take = other & ~close & (a <= b)
                best[idx] = np.where(take, np.minimum(best[idx], dist), best[idx])
            if not (active[-1].any() or active[1].any()):
                break
        # decide nearly degenerate shrinks exactly, only where they could matter
        for idx, jj, dist in pending:
            for i, j, dv in zip(idx, jj, dist):
                if dv > best[i] + NEAR or not np.isfinite(n[i]):
                    continue
                if n[i] > 2**52:
                    unc[i] = True
                    continue
                a, b = self._shrunk(int(j), Fraction(1, int(n[i])))
                if a <= b:
                    best[i] = min(best[i], dv)
        best = np.where(ok, best, np.nan)
        return best, unc | np.isnan(best)

    def level_set(self, c, window):
        c = to_exact(c)
        parts = self.cover.parts
        K = max(N_LEVELS, math.ceil(4 / c) + 2)
        out = RSet()
        prev = [RSet() for _ in parts]
        for k in range(1, K + 1):
            shr = [p.shrink(k) for p in parts]
            total = RSet()
            for s in shr:
                total = total | s
            for i, p in enumerate(parts):
                layer = shr[i] - prev[i]
                if layer.is_empty():
                    continue
                others = total - p
                if others.is_empty():
                    out = out | layer
                else:
                    out = out | (layer - others.closed_swell(c))
            prev = shr
        # beyond level K, delta(x) <= dist(x, other parts at level K)
        for i, p in enumerate(parts):
            rest = p - prev[i]
            if rest.is_empty():
                continue
            others = total - p
            if others.is_empty() or not (rest - others.closed_swell(c)).is_empty():
                raise ThresholdUnresolvable("level set depends on levels beyond the truncation")
        return out

    def describe(self):
        return f"cover:{self.name}[{len(self.cover.parts)} parts]"


class ExplicitCoverGauge(Gauge):
    kind = "cover"
    claimed_class = "baire_one"

    def __init__(self, cover: SigmaDiscreteCover, name: str = "explicit"):
        self.cover = cover
        self.name = name

    def _find(self, x):
        for n in range(1, self.cover.n_levels + 1):
            ms = self.cover.members(n)
            for j, m in enumerate(ms):
                if m.contains(x):
                    return n, j, ms
        raise NotCovered(f"{x} lies in no level")

    def level_of(self, x) -> int:
        return self._find(x)[0]

    def _others(self, x) -> RSet:
        _, j, ms = self._find(x)
        others = RSet()
        for k, m in enumerate(ms):
            if k != j:
                others = others | m
        return others

    def __call__(self, x):
        return min(DELTA_MAX, self._others(x).distance(x))

    def neighborhood(self, x):
        return self._others(x).complement()

    def level_set(self, c, window):
        c = to_exact(c)
        out, seen = RSet(), RSet()
        for n in range(1, self.cover.n_levels + 1):
            ms = self.cover.members(n)
            for j, m in enumerate(ms):
                region = m - seen
                others = RSet()
                for k, o in enumerate(ms):
                    if k != j:
                        others = others | o
                out = out | (region if others.is_empty() else region - others.closed_swell(c))
            for m in ms:
                seen = seen | m
        return out

    def describe(self):
        return f"cover:{self.name}[{self.cover.n_levels} levels]"


def gauge_from_cover(C: SigmaDiscreteCover, name: str = "cover"):
    g = ExplicitCoverGauge(C, name) if C.explicit is not None else CoverGauge(C, name)
    return NeighborhoodMap(g, f"cover:{C.label}"), g


# ---------------------------------------------------------------------------
# gauge synthesis for a constant epsilon
# ---------------------------------------------------------------------------

def as_piecewise(f: Func, window) -> PiecewiseFunc:
    if isinstance(f, PiecewiseFunc):
        return f
    if isinstance(f, (Step, JumpSum)):
        return f.as_piecewise(window)
    try:
        pieces = f.pieces()
    except Unresolvable:
        raise
    return PiecewiseFunc(pieces, name=f.name, window=window, env=getattr(f, "env", None))


MIN_CELL = Fraction(1, 2**30)


def _diameter_cuts(e: Node, lo, hi, eps, env) -> list:
    cuts = []
    stack = [(Fraction(lo), Fraction(hi))]
    while stack:
        l, h = stack.pop()
        try:
            a, b = enclose(e, l, h, env)
        except NotEnclosable as exc:
            raise RefinementFailure(str(exc)) from None
        if b - a < eps:
            continue
        if h - l < MIN_CELL:
            raise RefinementFailure(f"cannot bring the image diameter below {eps} near {float(l)}")
        m = (l + h) / 2
        cuts.append(m)
        stack.append((l, m))
        stack.append((m, h))
    return sorted(cuts)


def diameter_refined_parts(f: PiecewiseFunc, eps, window) -> list:
    """Disjoint parts, each with image diameter < eps inside the window;
    the pieces' remainders outside the window are kept unrefined."""
    eps = to_exact(eps)
    W = RSet.closed(*window)
    parts = []
    for b, e in f.pieces():
        inside, outside = b & W, b - W
        for iv in inside.intervals:
            if iv.is_point:
                parts.append(RSet((iv,)))
                continue
            pts = [iv.lo] + _diameter_cuts(e, iv.lo, iv.hi, eps, f.env) + [iv.hi]
            for k in range(len(pts) - 1):
                lo_c = iv.lo_closed if k == 0 else True
                hi_c = iv.hi_closed if k == len(pts) - 2 else False
                parts.append(RSet((Interval(pts[k], pts[k + 1], lo_c, hi_c),)))
        if not outside.is_empty():
            parts.append(outside)
    return parts


def gauge_for_epsilon(f: Func, eps, window=None, validate_pairs: int = 10**5, seed: int = 0,
                      workers: int = 1) -> Gauge:
    eps = to_exact(eps)
    window = window or f.window
    if isinstance(f, (JumpSum, Riemann)):
        g = JumpGauge.for_function(f, eps)
    else:
        pw = as_piecewise(f, window)
        cover = refine_cover(diameter_refined_parts(pw, eps, window), window)
        g = CoverGauge(cover, name=f"{f.name}@{fmt_number(eps)}")
    if validate_pairs:
        rep = eps_delta_falsify(f, g, EpsilonSpec.const(eps), validate_pairs, seed, window,
                                workers=workers)
        if not rep.passed:
            raise GaugeValidationError(rep)
        g.validation = rep
    return g


# ---------------------------------------------------------------------------
# cover from a gauge
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverCertificate:
    bound: Fraction
    max_diameter: float
    pairs_tested: int
    seed: int
    levels: int
    worst: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.max_diameter <= float(self.bound) + float(TAU_CMP)

    def to_json(self):
        return {"bound": fmt_number(self.bound), "max_observed_diameter": self.max_diameter,
                "pairs_tested": self.pairs_tested, "seed": self.seed, "levels": self.levels,
                "passed": self.passed,
                "worst": None if self.worst is None else [str(w) for w in self.worst],
                "truncation": f"levels 1..{self.levels}"}


def _mesh_members(clD: RSet, a, b, h):
    cells = {}
    for iv in clD.intervals:
        lo = max(iv.lo, a)
        hi = min(iv.hi, b)
        if lo > hi:
            continue
        k0 = math.floor((lo - a) / h)
        k1 = math.ceil((hi - a) / h)
        for k in range(max(k0 - 1, 0), k1 + 1):
            cl, ch = a + k * h, min(b, a + (k + 1) * h)
            if cl > b:
                break
            l2, h2 = max(cl, lo), min(ch, hi)
            if l2 <= h2:
                cells.setdefault(k, []).append(Interval(l2, h2))
    return {k: RSet.make(v) for k, v in cells.items()}


def cover_from_gauge(f: Func, gauge: Gauge, eps, levels: int = N_LEVELS, window=None,
                     pairs: int = 10**5, seed: int = 0):
    """Mesh cover H_n ∩ cl{delta > 1/n} with a sampled image-diameter certificate."""
    eps = to_exact(eps)
    window = window or f.window
    a, b = to_exact(window[0]), to_exact(window[1])
    W = RSet.closed(a, b)
    fams, gaps = [], []
    for n in range(1, levels + 1):
        D = gauge.level_set(Fraction(1, n), window)
        clD = D.closure() & W
        h = Fraction(1, 3 * n + 1)
        cells = _mesh_members(clD, a, b, h)
        for parity in (0, 1):
            fams.append(tuple(cells[k] for k in sorted(cells) if k % 2 == parity))
            gaps.append(h)
    cover = SigmaDiscreteCover((), tuple(fams), (a, b), len(fams), "mesh", tuple(gaps))
    cert = _certify(f, cover, eps, pairs, seed)
    return cover, cert


def _certify(f: Func, cover: SigmaDiscreteCover, eps, pairs: int, seed: int) -> CoverCertificate:
    cache = {}

    def val(p):
        if p not in cache:
            cache[p] = f(p)
        return cache[p]

    best, worst, tested = 0.0, None, 0
    rows = []
    for fam in cover.explicit:
        for m in fam:
            ends = sorted({v for iv in m.intervals for v in (iv.lo, iv.hi)})
            vals = [(val(p), p) for p in ends]
            lo_v, hi_v = min(vals, key=lambda t: t[0]), max(vals, key=lambda t: t[0])
            tested += len(ends) * (len(ends) - 1) // 2
            d = float(hi_v[0] - lo_v[0])
            if d > best:
                best, worst = d, (lo_v[1], hi_v[1])
            for iv in m.intervals:
                if iv.hi > iv.lo:
                    rows.append((float(iv.lo), float(iv.hi)))
    if rows and pairs:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC0E7]))
        lo = np.array([r[0] for r in rows])
        hi = np.array([r[1] for r in rows])
        w = hi - lo
        pick = rng.choice(len(rows), size=pairs, p=w / w.sum())
        xs = lo[pick] + w[pick] * rng.random(pairs)
        ys = lo[pick] + w[pick] * rng.random(pairs)
        gx, gy = rng.random(pairs) < 0.5, rng.random(pairs) < 0.5
        fx, ux = f.vec(xs, gx)
        fy, uy = f.vec(ys, gy)
        gap = np.abs(fx - fy)
        unsure = np.nonzero(ux | uy | np.isnan(gap))[0]
        for i in unsure:
            x, y = sample_point(xs[i], gx[i]), sample_point(ys[i], gy[i])
            try:
                gap[i] = float(abs(f(x) - f(y)))
            except (OutsideCover, DomainError):
                gap[i] = 0.0
        k = int(np.argmax(gap))
        if gap[k] > best:
            best, worst = float(gap[k]), (sample_point(xs[k], gx[k]), sample_point(ys[k], gy[k]))
        tested += pairs
    return CoverCertificate(3 * eps / 4, best, tested, seed, cover.n_levels, worst)


# ---------------------------------------------------------------------------
# reduction and variable epsilon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionPartition:
    inputs: tuple
    outputs: tuple

    def check(self) -> dict:
        disjoint = all((self.outputs[i] & self.outputs[j]).is_empty()
                       for i in range(len(self.outputs)) for j in range(i + 1, len(self.outputs)))
        contained = all(b.issubset(a) for a, b in zip(self.inputs, self.outputs))
        ua, ub = RSet(), RSet()
        for a in self.inputs:
            ua = ua | a
        for b in self.outputs:
            ub = ub | b
        tags = [sorted(classify_set(b)) for b in self.outputs]
        return {"disjoint": disjoint, "contained": contained, "union_equal": ua.equals(ub),
                "ambiguous": all("ambiguous_1" in t for t in tags), "tags": tags}

    def to_json(self):
        return {"inputs": [a.to_json() for a in self.inputs],
                "outputs": [b.to_json() for b in self.outputs], "check": self.check()}


def reduction_partition(A) -> ReductionPartition:
    A = tuple(A)
    for a in A:
        if "F_sigma" not in classify_set(a):
            raise ValueError("reduction needs F_sigma sets")
    return ReductionPartition(A, tuple(disjointify(A)))


class VariableGauge(Gauge):
    kind = "variable"
    claimed_class = "baire_one"

    def __init__(self, base: CoverGauge, level_of_part: dict, gauges: dict, name: str):
        self.base = base
        self.level_of_part = level_of_part
        self.gauges = gauges
        self.name = name

    def _n(self, x) -> int:
        return self.level_of_part[self.base.rows[self.base.locate(x)][3]]

    def __call__(self, x):
        return min(self.base(x), self.gauges[self._n(x)](x))

    def neighborhood(self, x):
        return self.base.neighborhood(x) & self.gauges[self._n(x)].neighborhood(x)

    def vec(self, xs, gen):
        d, unc = self.base.vec(xs, gen)
        c, ok, _ = self.base.locate_vec(xs)
        parts = self.base._part[c]
        lev = np.array([self.level_of_part.get(int(p), 0) for p in parts]) if len(parts) else parts
        out = d.copy()
        for n, g in self.gauges.items():
            m = ok & (lev == n)
            if m.any():
                v, u = g.vec(xs[m], gen[m])
                out[m] = np.minimum(out[m], v)
                unc[m] |= u
        return out, unc

    def describe(self):
        return f"variable:{self.name}"


def variable_gauge(f: Func, eps: EpsilonSpec, window=None, levels: int = N_LEVELS,
                   validate_pairs: int = 10**5, seed: int = 0, workers: int = 1):
    if eps.func is None:
        eps = EpsilonSpec(func=_ConstFunc(eps.value))
    window = window or f.window
    A = []
    for n in range(1, levels + 1):
        Vn = preimage(eps.func, RSet.interval(Fraction(1, 2**n), POS_INF, False, False))
        if not Vn.uncertain.is_empty():
            raise Unresolvable("epsilon level set is not exact")
        An = preimage(f, Vn.set)
        if not An.uncertain.is_empty():
            raise Unresolvable("preimage of an epsilon level set is not exact")
        A.append(An.set)
    red = reduction_partition(A)
    union = RSet()
    for a in A:
        union = union | a
    if not RSet.closed(*window).issubset(union):
        raise RefinementFailure(f"epsilon o f drops below 2^-{levels} inside the window")
    pw = as_piecewise(f, window)
    parts, level_of = [], {}
    for n, Bn in enumerate(red.outputs, start=1):
        if Bn.is_empty():
            continue
        for P, _ in pw.pieces():
            s = Bn & P
            if not s.is_empty():
                level_of[len(parts)] = n
                parts.append(s)
    base = CoverGauge(refine_cover(parts, window), name="reduction")
    # refine_cover keeps nonempty parts in order, so indices line up
    gauges = {}
    for n in sorted(set(level_of.values())):
        gauges[n] = gauge_for_epsilon(f, Fraction(1, 2**n), window, validate_pairs=0)
    g = VariableGauge(base, level_of, gauges, f"{f.describe()}|{eps.describe()}")
    if validate_pairs:
        rep = eps_delta_falsify(f, g, eps, validate_pairs, seed, window, workers=workers)
        if not rep.passed:
            raise GaugeValidationError(rep)
        g.validation = rep
    return NeighborhoodMap(g, "variable"), g, red


class _ConstFunc(Func):
    kind = "const"

    def __init__(self, c):
        self.c = to_exact(c)
        self.name = fmt_number(self.c)

    def __call__(self, x):
        return self.c

    def vec(self, xs, gen):
        return np.full(len(xs), float(self.c)), np.zeros(len(xs), dtype=bool)

    def preimage(self, V):
        from .functions import _preimage_result
        return _preimage_result(RSet.reals() if V.contains(self.c) else RSet())
