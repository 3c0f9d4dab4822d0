"""Seeded, sharded epsilon-delta falsification campaigns.

Pairs are screened in floating point; any pair within a margin of a decision
boundary or flagged uncertain by a function or gauge is re-decided in exact
arithmetic.  Clear violations are counted from the screen, and every stored
violation is confirmed exactly.  Shards have a fixed size and are seeded by
``(seed, shard index)``; the campaign stops after the first shard at which the
running count of antecedent-true pairs reaches the budget, so the result does
not depend on the number of workers.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dsl import DomainError
from .exact import DELTA_MAX, TAU_CMP, fmt_number, sample_point, to_exact
from .functions import Func, OutsideCover

SHARD_SIZE = 2**15
MAX_STORED = 1000
HINT_PAIRS = 32  # exact pairs anchored at hint points, per shard
TAU = float(TAU_CMP)


@dataclass(frozen=True)
class EpsilonSpec:
    """Constant epsilon, or a function of the value f(x)."""

    value: Fraction | None = None
    func: Func | None = None

    def __post_init__(self):
        if (self.value is None) == (self.func is None):
            raise ValueError("give exactly one of value or func")
        if self.value is not None and not self.value > 0:
            raise ValueError("epsilon must be positive")

    @staticmethod
    def const(v) -> "EpsilonSpec":
        return EpsilonSpec(value=to_exact(v))

    @property
    def condition(self) -> str:
        return "eq_1_3" if self.value is not None else "eq_1_2"

    def bound(self, fx, fy):
        if self.value is not None:
            return self.value
        return min(self.func(to_exact(fx)), self.func(to_exact(fy)))

    def vec_bound(self, fx: np.ndarray, fy: np.ndarray):
        if self.value is not None:
            return np.full(len(fx), float(self.value)), np.zeros(len(fx), dtype=bool)
        no = np.zeros(len(fx), dtype=bool)
        a, ua = self.func.vec(fx, no)
        b, ub = self.func.vec(fy, no)
        return np.minimum(a, b), ua | ub

    def describe(self) -> str:
        if self.value is not None:
            return fmt_number(self.value)
        return self.func.describe()


@dataclass(frozen=True)
class Violation:
    x: object
    y: object
    fx: object
    fy: object
    bound: object

    @property
    def gap(self):
        return abs(self.fx - self.fy)

    def row(self) -> dict:
        return {"x": str(self.x), "y": str(self.y), "fx": str(self.fx), "fy": str(self.fy),
                "bound": str(self.bound)}


@dataclass(frozen=True)
class FalsificationReport:
    condition: str
    function: str
    gauge: str
    eps: str
    seed: int
    pairs_tested: int
    candidates: int
    shards: int
    budget: int
    violation_count: int
    violations: tuple = ()
    exact_checks: int = 0
    window: tuple = ()

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    @property
    def budget_met(self) -> bool:
        return self.pairs_tested >= self.budget

    def to_json(self) -> dict:
        return {"condition": self.condition, "function": self.function, "gauge": self.gauge,
                "eps": self.eps, "seed": self.seed, "pairs_tested": self.pairs_tested,
                "candidates": self.candidates, "shards": self.shards, "budget": self.budget,
                "budget_met": self.budget_met, "violation_count": self.violation_count,
                "violations": [v.row() for v in self.violations],
                "violations_stored": len(self.violations), "exact_checks": self.exact_checks,
                "window": [fmt_number(self.window[0]), fmt_number(self.window[1])],
                "passed": self.passed}


# ---------------------------------------------------------------------------
# exact decision for one pair
# ---------------------------------------------------------------------------

def _delta_exact(gauge, p):
    return min(gauge(p), DELTA_MAX)


def decide_exact(f: Func, gauge, eps: EpsilonSpec, x, y):
    """(antecedent, Violation or None) in exact arithmetic."""
    try:
        if not abs(x - y) < min(_delta_exact(gauge, x), _delta_exact(gauge, y)):
            return False, None
        fx, fy = f(x), f(y)
    except (OutsideCover, DomainError):
        return False, None
    b = eps.bound(fx, fy)
    if abs(fx - fy) < b:
        return True, None
    return True, Violation(x, y, fx, fy, b)


def replay(report_violations, f, gauge, eps) -> bool:
    """Every stored violation re-verifies in isolation."""
    return all(decide_exact(f, gauge, eps, v.x, v.y)[1] is not None for v in report_violations)


# ---------------------------------------------------------------------------
# shards
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Context:
    f: Func
    gauge: object
    eps: EpsilonSpec
    seed: int
    lo: float
    hi: float
    lo_exact: object
    hi_exact: object
    hints: tuple
    hints_f: np.ndarray = field(compare=False)
    shard_size: int = SHARD_SIZE


def _guided(ctx, rng, xs, gen):
    d, _ = ctx.gauge.vec(xs, gen)
    d = np.nan_to_num(d, nan=0.0, posinf=ctx.hi - ctx.lo)
    step = np.minimum(d, ctx.hi - ctx.lo) * rng.random(len(xs))
    sign = np.where(rng.random(len(xs)) < 0.5, -1.0, 1.0)
    return xs + sign * step


def _shard_pairs(ctx: _Context, rng):
    n = ctx.shard_size
    n_uni, n_adv = n // 2, (3 * n) // 10
    n_gui = n - n_uni - n_adv
    lo, hi = ctx.lo, ctx.hi
    xu = rng.uniform(lo, hi, n_uni)
    yu = rng.uniform(lo, hi, n_uni)
    if len(ctx.hints_f):
        p = ctx.hints_f[rng.integers(0, len(ctx.hints_f), n_adv)]
        sx = np.where(rng.random(n_adv) < 0.5, -1.0, 1.0) * np.exp2(-rng.uniform(0, 24, n_adv))
        sy = np.where(rng.random(n_adv) < 0.5, -1.0, 1.0) * np.exp2(-rng.uniform(0, 24, n_adv))
        xa, ya = p + sx * (hi - lo) / 4, p + sy * (hi - lo) / 4
    else:
        xa, ya = rng.uniform(lo, hi, n_adv), rng.uniform(lo, hi, n_adv)
    xg = rng.uniform(lo, hi, n_gui)
    xg_gen = rng.random(n_gui) < 0.5
    yg = _guided(ctx, rng, xg, xg_gen)
    xs = np.concatenate([xu, xa, xg])
    ys = np.concatenate([yu, ya, yg])
    gx = np.concatenate([rng.random(n_uni + n_adv) < 0.5, xg_gen])
    gy = rng.random(n) < 0.5
    keep = (xs >= lo) & (xs <= hi) & (ys >= lo) & (ys <= hi)
    return xs[keep], gx[keep], ys[keep], gy[keep]


def _hint_pairs(ctx: _Context, rng):
    out = []
    if not ctx.hints:
        return out
    for _ in range(HINT_PAIRS):
        p = ctx.hints[int(rng.integers(0, len(ctx.hints)))]
        try:
            d = float(min(ctx.gauge(p), ctx.hi - ctx.lo))
        except (OutsideCover, DomainError):
            continue
        off = float(rng.random()) * d * (1 if rng.random() < 0.5 else -1)
        gen = bool(rng.random() < 0.5)
        q = p + sample_point(off, gen)
        if ctx.lo_exact <= q <= ctx.hi_exact:
            out.append((p, q))
    return out


def _run_shard(args):
    ctx, shard = args
    rng = np.random.default_rng(np.random.SeedSequence([ctx.seed, shard]))
    xs, gx, ys, gy = _shard_pairs(ctx, rng)
    tested, count, stored, exact_checks = 0, 0, [], 0

    dx, ux = ctx.gauge.vec(xs, gx)
    dy, uy = ctx.gauge.vec(ys, gy)
    dmin = np.minimum(np.minimum(dx, dy), float(DELTA_MAX))
    dist = np.abs(xs - ys)
    margin = TAU * np.maximum(1.0, dmin)
    ant_true = dist < dmin - margin
    ant_unsure = (np.abs(dist - dmin) <= margin) | ux | uy | np.isnan(dmin)
    ant_true &= ~ant_unsure

    fx, ufx = ctx.f.vec(xs, gx)
    fy, ufy = ctx.f.vec(ys, gy)
    b, ub = ctx.eps.vec_bound(fx, fy)
    gap = np.abs(fx - fy)
    bm = TAU * np.maximum(1.0, np.abs(b))
    ok = gap < b - bm
    con_unsure = (np.abs(gap - b) <= bm) | ufx | ufy | ub | np.isnan(gap) | np.isnan(b)

    settled = ant_true & ok & ~con_unsure
    tested += int(settled.sum())
    # clear violations count from the screen; only the ones kept are re-decided exactly
    clear_bad = np.nonzero(ant_true & ~ok & ~con_unsure)[0]
    tested += len(clear_bad)
    count += len(clear_bad)
    for i in clear_bad[:MAX_STORED]:
        exact_checks += 1
        ant, v = decide_exact(ctx.f, ctx.gauge, ctx.eps, sample_point(xs[i], gx[i]),
                              sample_point(ys[i], gy[i]))
        if v is None:
            count -= 1
            tested -= 0 if ant else 1
        else:
            stored.append(v)
    recheck = np.nonzero(ant_unsure | (ant_true & con_unsure))[0]
    pairs = [(sample_point(xs[i], gx[i]), sample_point(ys[i], gy[i])) for i in recheck]
    pairs += _hint_pairs(ctx, rng)
    for x, y in pairs:
        exact_checks += 1
        ant, v = decide_exact(ctx.f, ctx.gauge, ctx.eps, x, y)
        if ant:
            tested += 1
        if v is not None:
            count += 1
            if len(stored) < MAX_STORED:
                stored.append(v)
    return tested, count, stored, exact_checks, len(xs)


def eps_delta_falsify(f: Func, gauge, eps, pairs: int = 10**6, seed: int = 0,
                      window=None, workers: int = 1, shard_size: int = SHARD_SIZE,
                      max_shards: int | None = None) -> FalsificationReport:
    """Search for pairs with |x-y| < min(d(x), d(y)) and |f(x)-f(y)| >= eps."""
    if not isinstance(eps, EpsilonSpec):
        eps = EpsilonSpec.const(eps)
    window = window or f.window
    lo_e, hi_e = to_exact(window[0]), to_exact(window[1])
    hints = tuple(h for h in f.hints(lo_e, hi_e, 4096) if lo_e <= h <= hi_e)
    ctx = _Context(f, gauge, eps, int(seed), float(lo_e), float(hi_e), lo_e, hi_e, hints,
                   np.array([float(h) for h in hints]), shard_size)
    if max_shards is None:
        max_shards = 50 * (pairs // shard_size + 1) + 10
    tested = count = shards = checks = candidates = 0
    stored: list = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        wave = max(1, workers)
        while tested < pairs and shards < max_shards:
            ids = list(range(shards, min(shards + wave, max_shards)))
            jobs = [(ctx, i) for i in ids]
            results = list(pool.map(_run_shard, jobs)) if pool else [_run_shard(j) for j in jobs]
            for t, c, st, ch, cand in results:
                if tested >= pairs:
                    break  # shards past the stopping point are discarded
                tested += t
                count += c
                checks += ch
                candidates += cand
                shards += 1
                stored.extend(st[: MAX_STORED - len(stored)])
    finally:
        if pool:
            pool.shutdown()
    return FalsificationReport(eps.condition, f.describe(), gauge.describe(), eps.describe(),
                               int(seed), tested, candidates, shards, pairs, count,
                               tuple(stored), checks, (lo_e, hi_e))
