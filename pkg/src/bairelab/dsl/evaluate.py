"""Evaluation of expression trees.

* ``eval_ast``     exact for rational-closed trees, binary64 after any sin/cos/exp
  or non-integer power (relative error a few ulps per node).
* ``eval_array``   vectorised float evaluation used by sampling campaigns.
* ``enclose``      interval arithmetic with rational bounds (outward rounded
  where floats are involved).
* ``lipschitz``    Lipschitz bound on a compact interval, or None when a
  denominator range contains zero.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping

import numpy as np

from ..exact import Surd
from ..sets import NEG_INF, POS_INF
from .ast import Node


class DomainError(ArithmeticError):
    pass


class NotEnclosable(ValueError):
    pass


def _int_exponent(e):
    if isinstance(e, int):
        return e
    if isinstance(e, Fraction) and e.denominator == 1:
        return int(e)
    return None


def _pow(b, e):
    k = _int_exponent(e)
    if k is not None:
        if b == 0 and k < 0:
            raise DomainError("0 raised to a negative power")
        if isinstance(b, float):
            try:
                return b ** k
            except (OverflowError, ZeroDivisionError) as exc:
                raise DomainError(str(exc)) from None
        return b ** k
    bf, ef = float(b), float(e)
    if bf < 0:
        raise DomainError("negative base with non-integer exponent")
    if bf == 0 and ef < 0:
        raise DomainError("0 raised to a negative power")
    try:
        return math.pow(bf, ef)
    except OverflowError as exc:
        raise DomainError(str(exc)) from None


def eval_ast(e: Node, x=None, env: Mapping | None = None, funcs: Mapping | None = None):
    """Evaluate ``e`` with variable ``x`` (plus optional extra bindings)."""
    bindings = dict(env or {})
    if x is not None:
        bindings.setdefault("x", x)
        bindings.setdefault("y", x)
    if isinstance(bindings.get("x"), int):
        bindings["x"] = Fraction(bindings["x"])
    return _eval(e, bindings, funcs or {})


def _eval(e: Node, env, funcs):
    k = e.kind
    if k == "const":
        return e.value
    if k == "var":
        try:
            return env[e.value]
        except KeyError:
            raise DomainError(f"unbound variable {e.value!r}") from None
    if k == "dist":
        x = env["x"]
        if isinstance(x, float):
            x = Fraction(x)
        return e.value.distance(x)
    ch = [_eval(c, env, funcs) for c in e.children]
    if k == "add":
        return ch[0] + ch[1]
    if k == "sub":
        return ch[0] - ch[1]
    if k == "mul":
        return ch[0] * ch[1]
    if k == "div":
        if ch[1] == 0:
            raise DomainError("division by zero")
        return ch[0] / ch[1]
    if k == "pow":
        return _pow(ch[0], ch[1])
    if k == "neg":
        return -ch[0]
    if k == "abs":
        return abs(ch[0])
    if k == "min":
        return ch[0] if ch[0] <= ch[1] else ch[1]
    if k == "max":
        return ch[0] if ch[0] >= ch[1] else ch[1]
    if k == "clamp":
        v, lo, hi = ch
        v = v if v >= lo else lo
        return v if v <= hi else hi
    if k == "sin":
        return math.sin(float(ch[0]))
    if k == "cos":
        return math.cos(float(ch[0]))
    if k == "exp":
        try:
            return math.exp(float(ch[0]))
        except OverflowError:
            raise DomainError("exp overflow") from None
    if k == "call":
        try:
            f = funcs[e.value]
        except KeyError:
            raise DomainError(f"unknown function {e.value!r}") from None
        return f(ch[0])
    raise DomainError(f"cannot evaluate node {k}")


# ---------------------------------------------------------------------------
# vectorised evaluation
# ---------------------------------------------------------------------------

def plain_distance_array(xs: np.ndarray, closed_plain) -> np.ndarray:
    if not closed_plain:
        return np.full(xs.shape, 1e9)
    lo = np.array([float(iv.lo) for iv in closed_plain])
    hi = np.array([float(iv.hi) for iv in closed_plain])
    i = np.searchsorted(lo, xs, side="right") - 1
    d = np.full(xs.shape, np.inf)
    for j in (i, i + 1):
        ok = (j >= 0) & (j < len(lo))
        jj = np.clip(j, 0, len(lo) - 1)
        dj = np.maximum(np.maximum(lo[jj] - xs, xs - hi[jj]), 0.0)
        d = np.where(ok, np.minimum(d, dj), d)
    return d


def eval_array(e: Node, env: Mapping, funcs: Mapping | None = None) -> np.ndarray:
    """Float evaluation over numpy arrays; invalid points come back as nan."""
    with np.errstate(all="ignore"):
        return np.asarray(_eval_np(e, env, funcs or {}), dtype=float)


def _eval_np(e: Node, env, funcs):
    k = e.kind
    if k == "const":
        return float(e.value)
    if k == "var":
        v = env[e.value]
        return v if isinstance(v, np.ndarray) else float(v)
    if k == "dist":
        return plain_distance_array(np.asarray(env["x"], dtype=float), e.value.closure_plain)
    ch = [_eval_np(c, env, funcs) for c in e.children]
    if k == "add":
        return ch[0] + ch[1]
    if k == "sub":
        return ch[0] - ch[1]
    if k == "mul":
        return ch[0] * ch[1]
    if k == "div":
        den = np.asarray(ch[1], dtype=float)
        return np.where(den == 0, np.nan, ch[0] / np.where(den == 0, 1.0, den))
    if k == "pow":
        base, ex = np.asarray(ch[0], dtype=float), np.asarray(ch[1], dtype=float)
        integral = np.equal(np.round(ex), ex)
        bad = ((base < 0) & ~integral) | ((base == 0) & (ex < 0))
        return np.where(bad, np.nan, np.power(np.where(bad, 1.0, base), ex))
    if k == "neg":
        return -ch[0]
    if k == "abs":
        return np.abs(ch[0])
    if k == "min":
        return np.minimum(ch[0], ch[1])
    if k == "max":
        return np.maximum(ch[0], ch[1])
    if k == "clamp":
        return np.minimum(np.maximum(ch[0], ch[1]), ch[2])
    if k == "sin":
        return np.sin(ch[0])
    if k == "cos":
        return np.cos(ch[0])
    if k == "exp":
        return np.exp(ch[0])
    if k == "call":
        f = funcs[e.value]
        return f(np.asarray(ch[0], dtype=float))
    raise DomainError(f"cannot evaluate node {k}")


# ---------------------------------------------------------------------------
# interval arithmetic
# ---------------------------------------------------------------------------

_REL = 1e-12


def _down(v: float) -> Fraction:
    return Fraction(v - abs(v) * _REL - 1e-300)


def _up(v: float) -> Fraction:
    return Fraction(v + abs(v) * _REL + 1e-300)


def _imul(a, b):
    ps = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return min(ps), max(ps)


def _ipow_int(a, k: int):
    lo, hi = a
    if k == 0:
        return Fraction(1), Fraction(1)
    if k < 0:
        if lo <= 0 <= hi:
            raise NotEnclosable("negative power over a range containing 0")
        p = _ipow_int(a, -k)
        return 1 / p[1], 1 / p[0]
    if k % 2 == 0:
        m = max(abs(lo), abs(hi)) ** k
        if lo <= 0 <= hi:
            return Fraction(0), m
        return min(lo ** k, hi ** k), m
    return lo ** k, hi ** k


_TWO_PI = 2 * math.pi


def _trig_enclosure(lo: Fraction, hi: Fraction, phase: float):
    """Enclosure of sin(t + phase) over [lo, hi]."""
    a, b = float(lo), float(hi)
    if b - a >= _TWO_PI - 1e-9:
        return Fraction(-1), Fraction(1)
    va, vb = math.sin(a + phase), math.sin(b + phase)
    vmin, vmax = min(va, vb), max(va, vb)
    # critical points where t + phase = pi/2 + k*pi
    kmin = math.floor((a + phase - math.pi / 2) / math.pi - 1e-9)
    kmax = math.ceil((b + phase - math.pi / 2) / math.pi + 1e-9)
    for kk in range(kmin, kmax + 1):
        t = math.pi / 2 + kk * math.pi - phase
        if a - 1e-9 <= t <= b + 1e-9:
            v = 1.0 if kk % 2 == 0 else -1.0
            vmin, vmax = min(vmin, v), max(vmax, v)
    return max(Fraction(-1), _down(vmin)), min(Fraction(1), _up(vmax))


def enclose(e: Node, lo, hi, env: Mapping | None = None):
    """Rational bounds (l, u) with l <= e(x) <= u for all x in [lo, hi]."""
    return _enc(e, Fraction(lo), Fraction(hi), env or {})


def _enc(e: Node, lo, hi, env):
    k = e.kind
    if k == "const":
        return e.value, e.value
    if k == "var":
        if e.value in ("x", "y"):
            return lo, hi
        v = Fraction(env[e.value])
        return v, v
    if k == "dist":
        mid = (lo + hi) / 2
        d = e.value.distance(mid)
        r = (hi - lo) / 2
        return max(Fraction(0), d - r), d + r
    if k == "call":
        raise NotEnclosable(f"no enclosure for call {e.value!r}")
    ch = [_enc(c, lo, hi, env) for c in e.children]
    if k == "add":
        return ch[0][0] + ch[1][0], ch[0][1] + ch[1][1]
    if k == "sub":
        return ch[0][0] - ch[1][1], ch[0][1] - ch[1][0]
    if k == "mul":
        return _imul(ch[0], ch[1])
    if k == "div":
        d = ch[1]
        if d[0] <= 0 <= d[1]:
            raise NotEnclosable("denominator range contains 0")
        return _imul(ch[0], (1 / d[1], 1 / d[0]))
    if k == "pow":
        ex = ch[1]
        if ex[0] == ex[1]:
            kk = _int_exponent(ex[0])
            if kk is not None:
                return _ipow_int(ch[0], kk)
            b = ch[0]
            if b[0] > 0:
                vs = [math.pow(float(b[0]), float(ex[0])), math.pow(float(b[1]), float(ex[0]))]
                return _down(min(vs)), _up(max(vs))
        raise NotEnclosable("power with non-constant or unsupported exponent")
    if k == "neg":
        return -ch[0][1], -ch[0][0]
    if k == "abs":
        a, b = ch[0]
        if a >= 0:
            return a, b
        if b <= 0:
            return -b, -a
        return Fraction(0), max(-a, b)
    if k == "min":
        return min(ch[0][0], ch[1][0]), min(ch[0][1], ch[1][1])
    if k == "max":
        return max(ch[0][0], ch[1][0]), max(ch[0][1], ch[1][1])
    if k == "clamp":
        v, l, h = ch
        lo_ = min(max(v[0], l[0]), h[0])
        hi_ = min(max(v[1], l[1]), h[1])
        return min(lo_, hi_), max(lo_, hi_)
    if k == "sin":
        return _trig_enclosure(ch[0][0], ch[0][1], 0.0)
    if k == "cos":
        return _trig_enclosure(ch[0][0], ch[0][1], math.pi / 2)
    if k == "exp":
        try:
            return _down(math.exp(float(ch[0][0]))), _up(math.exp(float(ch[0][1])))
        except OverflowError:
            raise NotEnclosable("exp overflow") from None
    raise NotEnclosable(k)


def lipschitz(e: Node, lo, hi, env: Mapping | None = None):
    """Lipschitz constant of x -> e(x) on [lo, hi], or None if unavailable."""
    try:
        return _lip(e, Fraction(lo), Fraction(hi), env or {})[1]
    except NotEnclosable:
        return None


def _mag(r):
    return max(abs(r[0]), abs(r[1]))


def _lip(e: Node, lo, hi, env):
    k = e.kind
    rng = _enc(e, lo, hi, env)
    if k == "const":
        return rng, Fraction(0)
    if k == "var":
        return rng, Fraction(1) if e.value in ("x", "y") else Fraction(0)
    if k == "dist":
        return rng, Fraction(1)
    if k == "call":
        raise NotEnclosable("call")
    sub = [_lip(c, lo, hi, env) for c in e.children]
    (r0, l0) = sub[0]
    if k in ("add", "sub"):
        return rng, l0 + sub[1][1]
    if k == "mul":
        r1, l1 = sub[1]
        return rng, _mag(r1) * l0 + _mag(r0) * l1
    if k == "div":
        r1, l1 = sub[1]
        if r1[0] <= 0 <= r1[1]:
            raise NotEnclosable("denominator range contains 0")
        m = min(abs(r1[0]), abs(r1[1]))
        return rng, (l0 * _mag(r1) + _mag(r0) * l1) / (m * m)
    if k == "pow":
        r1, l1 = sub[1]
        if l1 != 0 or r1[0] != r1[1]:
            raise NotEnclosable("variable exponent")
        ex = r1[0]
        kk = _int_exponent(ex)
        if kk is not None:
            if kk == 0:
                return rng, Fraction(0)
            if kk > 0:
                return rng, kk * _mag(r0) ** (kk - 1) * l0
            if r0[0] <= 0 <= r0[1]:
                raise NotEnclosable("negative power near 0")
            m = min(abs(r0[0]), abs(r0[1]))
            return rng, (-kk) * m ** (kk - 1) * l0
        if r0[0] <= 0:
            raise NotEnclosable("non-integer power of non-positive base")
        ef = float(ex)
        vs = [abs(ef) * math.pow(float(r0[0]), ef - 1), abs(ef) * math.pow(float(r0[1]), ef - 1)]
        return rng, _up(max(vs)) * l0
    if k in ("neg", "abs"):
        return rng, l0
    if k in ("min", "max"):
        return rng, max(l0, sub[1][1])
    if k == "clamp":
        return rng, max(l0, sub[1][1], sub[2][1])
    if k in ("sin", "cos"):
        return rng, l0
    if k == "exp":
        return rng, _up(math.exp(float(r0[1]))) * l0
    raise NotEnclosable(k)


def is_finite_bound(v) -> bool:
    return v not in (NEG_INF, POS_INF)


def exact_or_float(v):
    return v if isinstance(v, (Fraction, Surd, int)) else float(v)
