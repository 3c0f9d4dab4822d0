"""Piecewise-polynomial normal form and exact breakpoint search.

For rational-closed trees built from + - * / (by constants), integer powers,
abs, min, max, clamp and dist, the real line splits into cells on which the tree
is a polynomial.  Level sets {e = t} are then found exactly; an irrational
crossing raises ``IrrationalBreak`` so callers can fall back or fail loudly.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

from ..sets import NEG_INF, POS_INF
from .ast import Node


class NotPolynomial(ValueError):
    pass


class IrrationalBreak(ValueError):
    pass


Poly = tuple  # coefficients, lowest degree first, no trailing zeros


def _trim(c) -> Poly:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def p_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def p_neg(a: Poly) -> Poly:
    return tuple(-c for c in a)


def p_sub(a: Poly, b: Poly) -> Poly:
    return p_add(a, p_neg(b))


def p_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def p_eval(a: Poly, x):
    v = Fraction(0)
    for c in reversed(a):
        v = v * x + c
    return v


def p_deriv(a: Poly) -> Poly:
    return _trim(i * a[i] for i in range(1, len(a)))


def p_divmod(a: Poly, b: Poly):
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        coef = a[-1] / b[-1]
        shift = len(a) - len(b)
        q[shift] = coef
        for i, c in enumerate(b):
            a[i + shift] -= coef * c
        a = list(_trim(a))
    return _trim(q), _trim(a)


def p_gcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, p_divmod(a, b)[1]
    if not a:
        return a
    return tuple(c / a[-1] for c in a)


def const_poly(v) -> Poly:
    return _trim([Fraction(v)])


X_POLY: Poly = (Fraction(0), Fraction(1))


def _sign_at(p: Poly, x) -> int:
    v = p_eval(p, x)
    return (v > 0) - (v < 0)


def _sign_inf(p: Poly, positive: bool) -> int:
    if not p:
        return 0
    s = (p[-1] > 0) - (p[-1] < 0)
    if not positive and (len(p) - 1) % 2 == 1:
        s = -s
    return s


def _sturm(p: Poly) -> list:
    seq = [p, p_deriv(p)]
    while seq[-1]:
        r = p_divmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append(p_neg(r))
    return seq


def _variations(signs) -> int:
    s = [x for x in signs if x != 0]
    return sum(1 for i in range(1, len(s)) if s[i] != s[i - 1])


def _count(seq, a, b) -> int:
    """Distinct real roots of seq[0] in the half-open (a, b]."""
    sa = [_sign_inf(p, False) if a == NEG_INF else _sign_at(p, a) for p in seq]
    sb = [_sign_inf(p, True) if b == POS_INF else _sign_at(p, b) for p in seq]
    return _variations(sa) - _variations(sb)


def _root_bound(p: Poly) -> Fraction:
    lead = abs(p[-1])
    return 1 + max(abs(c) for c in p[:-1]) / lead if len(p) > 1 else Fraction(1)


def real_roots(p: Poly, a=NEG_INF, b=POS_INF) -> list:
    """Exact rational roots of p in the open interval (a, b).

    Raises IrrationalBreak if p has an irrational root there.
    """
    p = _trim(p)
    if len(p) <= 1:
        return []
    if len(p) == 2:
        r = -p[0] / p[1]
        return [r] if a < r < b else []
    sq = p_divmod(p, p_gcd(p, p_deriv(p)))[0]
    if len(sq) == 2:
        r = -sq[0] / sq[1]
        return [r] if a < r < b else []
    bound = _root_bound(sq)
    lo = max(a, -bound - 1) if a != NEG_INF else -bound - 1
    hi = min(b, bound + 1) if b != POS_INF else bound + 1
    lo, hi = Fraction(lo), Fraction(hi)
    seq = _sturm(sq)
    # denominators of rational roots divide the leading coefficient of the
    # integer-scaled polynomial; isolate below half the minimal spacing
    den = math.lcm(*(c.denominator for c in sq))
    ints = [int(c * den) for c in sq]
    g = math.gcd(*ints)
    lead = abs(ints[-1] // g)
    width = Fraction(1, 4 * lead * lead)
    roots = []
    stack = [(lo, hi)]
    while stack:
        l, h = stack.pop()
        n = _count(seq, l, h)
        if n == 0:
            continue
        if n == 1 and h - l < width:
            cand = ((l + h) / 2).limit_denominator(lead)
            if l < cand <= h and p_eval(sq, cand) == 0:
                roots.append(cand)
            elif p_eval(sq, h) == 0:
                roots.append(h)
            else:
                raise IrrationalBreak(f"irrational root in ({float(l)}, {float(h)}]")
            continue
        m = (l + h) / 2
        stack.append((l, m))
        stack.append((m, h))
    return sorted(r for r in set(roots) if a < r < b)


# ---------------------------------------------------------------------------
# piecewise normal form
# ---------------------------------------------------------------------------

Cells = list  # [(a, b, poly)] with a < b, consecutive, covering (lo, hi)


def _refine(c1: Cells, c2: Cells):
    """Common refinement of two cell lists over the same span."""
    cuts = sorted({a for a, _, _ in c1} | {a for a, _, _ in c2}
                  | {b for _, b, _ in c1} | {b for _, b, _ in c2}, key=_key)
    out = []
    i = j = 0
    for a, b in zip(cuts, cuts[1:]):
        while c1[i][1] <= a and i + 1 < len(c1):
            i += 1
        while c2[j][1] <= a and j + 1 < len(c2):
            j += 1
        out.append((a, b, c1[i][2], c2[j][2]))
    return out


def _key(v):
    return (0, v) if v not in (NEG_INF, POS_INF) else ((-1, 0) if v == NEG_INF else (1, 0))


def _split_sign(cells4, pick):
    """Split refined cells at roots of (p - q) and pick a branch per sub-cell."""
    out = []
    for a, b, p, q in cells4:
        d = p_sub(p, q)
        cuts = [a] + real_roots(d, a, b) + [b]
        for l, h in zip(cuts, cuts[1:]):
            if not d:
                out.append((l, h, pick(p, q, 0)))
                continue
            probe = _probe(l, h)
            s = _sign_at(d, probe)
            out.append((l, h, pick(p, q, s)))
    return out


def _probe(l, h):
    if l == NEG_INF and h == POS_INF:
        return Fraction(0)
    if l == NEG_INF:
        return h - 1
    if h == POS_INF:
        return l + 1
    return (l + h) / 2


def pw_poly(e: Node, lo=NEG_INF, hi=POS_INF, env: Mapping | None = None) -> Cells:
    return _merge(_pw(e, lo, hi, env or {}))


def _merge(cells: Cells) -> Cells:
    out = []
    for a, b, p in cells:
        if out and out[-1][2] == p:
            out[-1] = (out[-1][0], b, p)
        else:
            out.append((a, b, p))
    return out


def _pw(e: Node, lo, hi, env) -> Cells:
    k = e.kind
    if k == "const":
        return [(lo, hi, const_poly(e.value))]
    if k == "var":
        if e.value in ("x", "y"):
            return [(lo, hi, X_POLY)]
        if e.value in env:
            return [(lo, hi, const_poly(env[e.value]))]
        raise NotPolynomial(f"unbound variable {e.value}")
    if k == "dist":
        return _dist_cells(e.value.closure_plain, lo, hi)
    if k in ("sin", "cos", "exp", "call"):
        raise NotPolynomial(k)
    if k == "neg":
        return [(a, b, p_neg(p)) for a, b, p in _pw(e.children[0], lo, hi, env)]
    if k == "abs":
        c = _pw(e.children[0], lo, hi, env)
        c4 = [(a, b, p, ()) for a, b, p in c]
        return _split_sign(c4, lambda p, q, s: p if s >= 0 else p_neg(p))
    if k == "pow":
        ex = e.children[1]
        if ex.variables() or ex.uses({"dist"}):
            raise NotPolynomial("variable exponent")
        from .evaluate import eval_ast
        kk = eval_ast(ex, env=env)
        if not isinstance(kk, Fraction) or kk.denominator != 1 or kk < 0:
            raise NotPolynomial("non-natural exponent")
        out = []
        for a, b, p in _pw(e.children[0], lo, hi, env):
            r = const_poly(1)
            for _ in range(int(kk)):
                r = p_mul(r, p)
            out.append((a, b, r))
        return out
    if k == "clamp":
        v, l, h = e.children
        return _pw(Node("min", (Node("max", (v, l)), h)), lo, hi, env)
    c1 = _pw(e.children[0], lo, hi, env)
    c2 = _pw(e.children[1], lo, hi, env)
    c4 = _refine(c1, c2)
    if k == "add":
        return [(a, b, p_add(p, q)) for a, b, p, q in c4]
    if k == "sub":
        return [(a, b, p_sub(p, q)) for a, b, p, q in c4]
    if k == "mul":
        return [(a, b, p_mul(p, q)) for a, b, p, q in c4]
    if k == "div":
        out = []
        for a, b, p, q in c4:
            if len(q) != 1:
                raise NotPolynomial("division by a non-constant")
            out.append((a, b, tuple(c / q[0] for c in p)))
        return out
    if k == "min":
        return _split_sign(c4, lambda p, q, s: q if s > 0 else p)
    if k == "max":
        return _split_sign(c4, lambda p, q, s: p if s >= 0 else q)
    raise NotPolynomial(k)


def _dist_cells(closed, lo, hi) -> Cells:
    if not closed:
        return [(lo, hi, const_poly(10**9))]
    pieces = []  # (a, b, poly) over the whole line
    prev_hi = NEG_INF
    for idx, iv in enumerate(closed):
        if idx == 0:
            if iv.lo != NEG_INF:
                pieces.append((NEG_INF, iv.lo, (iv.lo, Fraction(-1))))
        else:
            mid = (prev_hi + iv.lo) / 2
            pieces.append((prev_hi, mid, (-prev_hi, Fraction(1))))
            pieces.append((mid, iv.lo, (iv.lo, Fraction(-1))))
        pieces.append((iv.lo, iv.hi, ()))
        prev_hi = iv.hi
    if prev_hi != POS_INF:
        pieces.append((prev_hi, POS_INF, (-prev_hi, Fraction(1))))
    out = []
    for a, b, p in pieces:
        a2 = a if _key(a) > _key(lo) else lo
        b2 = b if _key(b) < _key(hi) else hi
        if _key(a2) < _key(b2):
            out.append((a2, b2, _trim(p)))
    return out


def level_breakpoints(e: Node, targets: Iterable, lo=NEG_INF, hi=POS_INF,
                      env: Mapping | None = None) -> list:
    """Rational points splitting (lo, hi) so that e - t keeps a constant sign
    on every open gap, for every target t."""
    cells = pw_poly(e, lo, hi, env)
    out = set()
    for a, b, p in cells:
        for v in (a, b):
            if v not in (NEG_INF, POS_INF):
                out.add(v)
        for t in targets:
            d = p_sub(p, const_poly(t))
            if d:
                out.update(real_roots(d, a, b))
    return sorted(out)
