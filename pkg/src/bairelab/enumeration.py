"""Fixed enumeration r_1, r_2, ... of the rationals in (0, 1).

Breadth-first order of the Stern-Brocot subtree rooted at 1/2:
1/2, 1/3, 2/3, 1/4, 2/5, 3/5, 3/4, 1/5, ...  The index of ``p/q`` is the
binary word ``1`` followed by the tree path below 1/2 (left = 0, right = 1),
so both directions are exact for every rational.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np


def in_range(x) -> bool:
    """True when ``x`` is a rational inside (0, 1), i.e. enumerated."""
    return isinstance(x, (int, Fraction)) and 0 < x < 1


def index_of(q) -> int:
    """Exact enumeration index of a rational in (0, 1)."""
    q = Fraction(q)
    if not 0 < q < 1:
        raise ValueError(f"{q} is not in (0, 1)")
    p, d = q.numerator, q.denominator
    # first step from 1/1 is always left (the leading 1 bit)
    d -= p
    idx = 1
    while p != d:
        if p < d:
            run = (d - 1) // p
            d -= run * p
            idx <<= run
        else:
            run = (p - 1) // d
            p -= run * d
            idx = ((idx + 1) << run) - 1
    return idx


def depth_of(q) -> int:
    """Depth in the subtree (1/2 has depth 1); index lies in [2^(d-1), 2^d)."""
    q = Fraction(q)
    p, d = q.numerator, q.denominator - q.numerator
    depth = 1
    while p != d:
        if p < d:
            run = (d - 1) // p
            d -= run * p
        else:
            run = (p - 1) // d
            p -= run * d
        depth += run
    return depth


def rational_at(n: int) -> Fraction:
    """The n-th enumerated rational (n >= 1)."""
    if n < 1:
        raise ValueError("index must be >= 1")
    bits = bin(n)[3:]
    lo_n, lo_d, hi_n, hi_d = 0, 1, 1, 1
    cur_n, cur_d = 1, 2
    for b in bits:
        if b == "0":
            hi_n, hi_d = cur_n, cur_d
        else:
            lo_n, lo_d = cur_n, cur_d
        cur_n, cur_d = lo_n + hi_n, lo_d + hi_d
    return Fraction(cur_n, cur_d)


@lru_cache(maxsize=16)
def first(n: int) -> tuple[Fraction, ...]:
    """``(r_1, ..., r_n)``."""
    return tuple(rational_at(k) for k in range(1, n + 1))


@lru_cache(maxsize=16)
def sorted_prefix(n: int) -> tuple[np.ndarray, tuple[Fraction, ...], np.ndarray]:
    """First n rationals sorted by value: (float values, exact values, indices)."""
    pts = first(n)
    order = sorted(range(n), key=lambda i: pts[i])
    exact = tuple(pts[i] for i in order)
    return (np.array([float(x) for x in exact]), exact,
            np.array([i + 1 for i in order], dtype=np.int64))


def float_reciprocal_index(v: float) -> float:
    """Float approximation of 1/index(v) for a dyadic float v in (0, 1)."""
    q = Fraction(v)
    if depth_of(q) > 1080:
        return 0.0
    return float(Fraction(1, index_of(q)))
