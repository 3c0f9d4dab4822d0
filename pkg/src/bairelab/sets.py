"""Exact representable subsets of the real line.

A *plain* set is a finite sorted union of disjoint, non-adjacent intervals with
rational (or infinite) endpoints; isolated points are degenerate intervals.

An ``RSet`` is either plain, or carries the tail tag ``rationals`` naming the
set T of all rationals in (0, 1).  Tagged sets have the form

    S = (P \\ T)  ∪  (C ∩ T)

with P and C plain: P decides membership off T, C decides it on T.  This form is
closed under every Boolean operation, and the canonical form below makes
structural equality coincide with set equality.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .enumeration import in_range
from .exact import DELTA_MAX, TAU_SNAP, Surd, fmt_number, parse_rational, snap

NEG_INF = -math.inf
POS_INF = math.inf
UNIT_LO = Fraction(0)
UNIT_HI = Fraction(1)


class UnrepresentableResult(ValueError):
    pass


class NotDiscrete(ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: object
    hi: object
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        lo, hi = self.lo, self.hi
        if isinstance(lo, (int,)) and not isinstance(lo, bool):
            object.__setattr__(self, "lo", Fraction(lo))
        if isinstance(hi, (int,)) and not isinstance(hi, bool):
            object.__setattr__(self, "hi", Fraction(hi))
        if self.lo == NEG_INF:
            object.__setattr__(self, "lo_closed", False)
        if self.hi == POS_INF:
            object.__setattr__(self, "hi_closed", False)
        if self.lo == POS_INF or self.hi == NEG_INF:
            raise ValueError("invalid infinite endpoint")
        if self.lo > self.hi:
            raise ValueError(f"lo > hi in interval [{self.lo}, {self.hi}]")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ValueError("degenerate interval must be closed")

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if x < self.lo or (x == self.lo and not self.lo_closed):
            return False
        if x > self.hi or (x == self.hi and not self.hi_closed):
            return False
        return True

    def closure(self) -> "Interval":
        return Interval(self.lo, self.hi, True, True)

    def __str__(self):
        if self.is_point:
            return "{" + fmt_number(self.lo) + "}"
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{fmt_number(self.lo)}, {fmt_number(self.hi)}{right}"


Plain = tuple  # tuple[Interval, ...], normalized


# ---------------------------------------------------------------------------
# plain-set primitives
# ---------------------------------------------------------------------------

def _plain_contains(ivs: Plain, x) -> bool:
    if not ivs:
        return False
    los = [iv.lo for iv in ivs]
    i = bisect_right(los, x) - 1
    if i >= 0 and ivs[i].contains(x):
        return True
    # the point may equal the open lower end of the next interval
    return False


def _representative(breaks: Sequence, k: int):
    """Representative of gap k (k = 0..len(breaks)) in the segment sweep."""
    if not breaks:
        return Fraction(0)
    if k == 0:
        return breaks[0] - 1
    if k == len(breaks):
        return breaks[-1] + 1
    return (breaks[k - 1] + breaks[k]) / 2


def from_predicate(breaks: Iterable, pred: Callable[[object], bool]) -> Plain:
    """Plain set whose membership is constant between the given breakpoints."""
    bs = sorted(set(b for b in breaks if b != NEG_INF and b != POS_INF))
    # segments: gap0, pt0, gap1, pt1, ..., pt_{k-1}, gap_k
    segs = []
    for k in range(len(bs) + 1):
        segs.append(("gap", k, pred(_representative(bs, k))))
        if k < len(bs):
            segs.append(("pt", k, pred(bs[k])))
    out = []
    i = 0
    while i < len(segs):
        if not segs[i][2]:
            i += 1
            continue
        j = i
        while j + 1 < len(segs) and segs[j + 1][2]:
            j += 1
        kind_i, ki, _ = segs[i]
        kind_j, kj, _ = segs[j]
        if kind_i == "gap":
            lo = NEG_INF if ki == 0 else bs[ki - 1]
            lo_c = False
        else:
            lo, lo_c = bs[ki], True
        if kind_j == "gap":
            hi = POS_INF if kj == len(bs) else bs[kj]
            hi_c = False
        else:
            hi, hi_c = bs[kj], True
        out.append(Interval(lo, hi, lo_c, hi_c))
        i = j + 1
    return tuple(out)


def _breaks(*plains: Plain) -> list:
    out = []
    for ivs in plains:
        for iv in ivs:
            out.append(iv.lo)
            out.append(iv.hi)
    return out


def normalize(ivs: Iterable[Interval]) -> Plain:
    ivs = list(ivs)
    if not ivs:
        return ()
    ivs_t = tuple(sorted(ivs, key=lambda iv: (iv.lo, not iv.lo_closed)))
    return from_predicate(_breaks(ivs_t), lambda x: any(iv.contains(x) for iv in ivs_t))


def plain_op(a: Plain, b: Plain, fn: Callable[[bool, bool], bool]) -> Plain:
    return from_predicate(_breaks(a, b),
                          lambda x: fn(_plain_contains(a, x), _plain_contains(b, x)))


def plain_complement(a: Plain) -> Plain:
    return from_predicate(_breaks(a), lambda x: not _plain_contains(a, x))


def plain_closure(a: Plain) -> Plain:
    return normalize(iv.closure() for iv in a)


def plain_interior(a: Plain) -> Plain:
    return normalize(Interval(iv.lo, iv.hi, False, False) for iv in a if not iv.is_point)


def plain_distance(x, closed: Plain):
    """Distance from x to a closed plain set (DELTA_MAX when empty)."""
    if not closed:
        return DELTA_MAX
    los = [iv.lo for iv in closed]
    i = bisect_right(los, x) - 1
    best = None
    for j in (i, i + 1):
        if 0 <= j < len(closed):
            iv = closed[j]
            if iv.lo <= x <= iv.hi:
                return Fraction(0)
            d = iv.lo - x if x < iv.lo else x - iv.hi
            if best is None or d < best:
                best = d
    return best


def interval_gap(a: Interval, b: Interval):
    """Distance between the closures of two intervals."""
    if a.hi < b.lo:
        return b.lo - a.hi
    if b.hi < a.lo:
        return a.lo - b.hi
    return Fraction(0)


def plain_set_gap(a: Plain, b: Plain):
    best = None
    for ia in a:
        for ib in b:
            d = interval_gap(ia, ib)
            if best is None or d < best:
                best = d
    return DELTA_MAX if best is None else best


UNIT_OPEN: Plain = (Interval(UNIT_LO, UNIT_HI, False, False),)


# ---------------------------------------------------------------------------
# RSet
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tail:
    """Symbolic countable tail: the rationals of (0,1) in the fixed enumeration."""
    name: str = "rationals"
    N: int = field(default=1000, compare=False)


def _canon_off(p: Plain) -> Plain:
    """Largest plain set agreeing with p off T."""
    out = []
    for iv in p:
        if iv.is_point:
            if UNIT_LO < iv.lo < UNIT_HI:
                continue
            out.append(iv)
            continue
        lo_c = iv.lo_closed or (UNIT_LO < iv.lo < UNIT_HI)
        hi_c = iv.hi_closed or (UNIT_LO < iv.hi < UNIT_HI)
        out.append(Interval(iv.lo, iv.hi, lo_c, hi_c))
    return normalize(out)


def _has_interior(p: Plain) -> bool:
    return any(not iv.is_point for iv in p)


@dataclass(frozen=True)
class RSet:
    intervals: Plain = ()
    tail: Tail | None = None
    on_tail: Plain = ()

    # -- construction ------------------------------------------------------
    @staticmethod
    def make(off: Iterable[Interval], tail: Tail | None = None,
             on: Iterable[Interval] | None = None) -> "RSet":
        off_p = normalize(off)
        if tail is None:
            return RSet(off_p)
        on_p = normalize(on) if on is not None else off_p
        return _canonical(off_p, on_p, tail)

    @staticmethod
    def empty() -> "RSet":
        return RSet(())

    @staticmethod
    def reals() -> "RSet":
        return RSet((Interval(NEG_INF, POS_INF, False, False),))

    @staticmethod
    def interval(lo, hi, lo_closed=True, hi_closed=True) -> "RSet":
        lo = Fraction(lo) if not isinstance(lo, float) else lo
        hi = Fraction(hi) if not isinstance(hi, float) else hi
        return RSet((Interval(lo, hi, lo_closed, hi_closed),))

    @staticmethod
    def closed(lo, hi) -> "RSet":
        return RSet.interval(lo, hi, True, True)

    @staticmethod
    def open(lo, hi) -> "RSet":
        return RSet.interval(lo, hi, False, False)

    @staticmethod
    def points(pts: Iterable) -> "RSet":
        return RSet.make(Interval(Fraction(p), Fraction(p)) for p in pts)

    @staticmethod
    def rationals(N: int = 1000) -> "RSet":
        """T itself: the enumerated rationals of (0,1)."""
        return _canonical((), UNIT_OPEN, Tail("rationals", N))

    # -- basic predicates --------------------------------------------------
    @property
    def is_plain(self) -> bool:
        return self.tail is None

    @property
    def on(self) -> Plain:
        return self.intervals if self.tail is None else self.on_tail

    def contains(self, x) -> bool:
        if isinstance(x, float):
            x = snap(x)
        if self.tail is not None and in_range(x):
            return _plain_contains(self.on_tail, x)
        return _plain_contains(self.intervals, x)

    __contains__ = contains

    def is_empty(self) -> bool:
        if self.tail is None:
            return not self.intervals
        # off-part empty iff it has no interior and its points all lie in T
        return not self.intervals and not plain_op(self.on_tail, UNIT_OPEN, lambda a, b: a and b)

    def __bool__(self):
        return not self.is_empty()

    # -- Boolean operations ------------------------------------------------
    def _binary(self, other: "RSet", fn) -> "RSet":
        off = plain_op(self.intervals, other.intervals, fn)
        if self.tail is None and other.tail is None:
            return RSet(off)
        on = plain_op(self.on, other.on, fn)
        tail = _merge_tail(self.tail, other.tail)
        return _canonical(off, on, tail)

    def union(self, other: "RSet") -> "RSet":
        return self._binary(other, lambda a, b: a or b)

    def intersect(self, other: "RSet") -> "RSet":
        return self._binary(other, lambda a, b: a and b)

    def difference(self, other: "RSet") -> "RSet":
        return self._binary(other, lambda a, b: a and not b)

    def complement(self) -> "RSet":
        if self.tail is None:
            return RSet(plain_complement(self.intervals))
        return _canonical(plain_complement(self.intervals),
                          plain_complement(self.on_tail), self.tail)

    __or__ = union
    __and__ = intersect
    __sub__ = difference

    def __invert__(self):
        return self.complement()

    def symmetric_difference(self, other: "RSet") -> "RSet":
        return self._binary(other, lambda a, b: a != b)

    def equals(self, other: "RSet") -> bool:
        return self.symmetric_difference(other).is_empty()

    def issubset(self, other: "RSet") -> bool:
        return self.difference(other).is_empty()

    # -- topology ----------------------------------------------------------
    @cached_property
    def closure_plain(self) -> Plain:
        """Closure as a plain closed set."""
        if self.tail is None:
            return plain_closure(self.intervals)
        parts = []
        for iv in self.intervals:
            if iv.is_point and UNIT_LO < iv.lo < UNIT_HI:
                continue
            parts.append(iv.closure())
        on_unit = plain_op(self.on_tail, UNIT_OPEN, lambda a, b: a and b)
        parts.extend(iv.closure() for iv in on_unit)
        return normalize(parts)

    def closure(self) -> "RSet":
        return RSet(self.closure_plain)

    def interior(self) -> "RSet":
        if self.tail is None:
            return RSet(plain_interior(self.intervals))
        # interior needs both P and C around a point
        both = plain_op(self.intervals, self.on_tail, lambda a, b: a and b)
        return RSet(plain_interior(both))

    def distance(self, x):
        return plain_distance(x, self.closure_plain)

    def hull(self):
        cl = self.closure_plain
        if not cl:
            return None
        return cl[0].lo, cl[-1].hi

    def components(self) -> Plain:
        if self.tail is not None:
            raise UnrepresentableResult("tail-tagged set has no finite component list")
        return self.intervals

    def endpoints(self) -> list:
        out = set()
        for iv in self.intervals + (self.on_tail if self.tail else ()):
            for e in (iv.lo, iv.hi):
                if e not in (NEG_INF, POS_INF):
                    out.add(e)
        return sorted(out)

    def isolated_points(self) -> list:
        return [iv.lo for iv in self.intervals if iv.is_point]

    def swell(self, r) -> "RSet":
        """Open r-neighbourhood of the closure."""
        return RSet.make(Interval(iv.lo - r if iv.lo != NEG_INF else NEG_INF,
                                  iv.hi + r if iv.hi != POS_INF else POS_INF, False, False)
                         for iv in self.closure_plain)

    def closed_swell(self, r) -> "RSet":
        return RSet.make(Interval(iv.lo - r if iv.lo != NEG_INF else NEG_INF,
                                  iv.hi + r if iv.hi != POS_INF else POS_INF, True, True)
                         for iv in self.closure_plain)

    def missing_endpoints(self) -> list:
        """Points of the closure not in the set (plain sets only)."""
        if self.tail is not None:
            raise UnrepresentableResult("missing endpoints undefined for tail sets")
        out = []
        for iv in self.intervals:
            if not iv.lo_closed and iv.lo != NEG_INF:
                out.append(iv.lo)
            if not iv.hi_closed and iv.hi != POS_INF:
                out.append(iv.hi)
        return sorted(set(out))

    def shrink(self, n: int) -> "RSet":
        """{x in S : dist(x, cl(S) minus S) >= 1/n}; closed, increasing in n."""
        miss = self.missing_endpoints()
        if not miss:
            return self
        r = Fraction(1, n)
        balls = RSet.make(Interval(m - r, m + r, False, False) for m in miss)
        return self.difference(balls)

    # -- display -----------------------------------------------------------
    def __str__(self):
        off = " ∪ ".join(str(iv) for iv in self.intervals) or "∅"
        if self.tail is None:
            return off
        on = " ∪ ".join(str(iv) for iv in self.on_tail) or "∅"
        return f"({off}) off T ; ({on}) on T [tail={self.tail.name}, N={self.tail.N}]"

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        def ivj(iv):
            return {"lo": fmt_number(iv.lo), "hi": fmt_number(iv.hi),
                    "lo_closed": iv.lo_closed, "hi_closed": iv.hi_closed}
        enum = None
        if self.tail is not None:
            enum = {"name": self.tail.name, "N": self.tail.N,
                    "on": [ivj(iv) for iv in self.on_tail]}
        return {"intervals": [ivj(iv) for iv in self.intervals], "enum": enum}

    @staticmethod
    def from_json(obj: dict) -> "RSet":
        def num(s):
            if s in ("-inf",):
                return NEG_INF
            if s in ("inf", "+inf"):
                return POS_INF
            return parse_rational(str(s))

        def ivs(lst):
            return [Interval(num(d["lo"]), num(d["hi"]), bool(d.get("lo_closed", True)),
                             bool(d.get("hi_closed", True))) for d in lst]

        off = ivs(obj.get("intervals", []))
        off += [Interval(parse_rational(str(p)), parse_rational(str(p)))
                for p in obj.get("points", [])]
        enum = obj.get("enum")
        if not enum:
            return RSet.make(off)
        if enum.get("name") != "rationals":
            raise ValueError(f"unknown tail tag {enum.get('name')!r}")
        tail = Tail("rationals", int(enum.get("N", 1000)))
        if "on" in enum:
            return RSet.make(off, tail, ivs(enum["on"]))
        # shorthand: intervals together with the enumerated rationals
        return RSet.make(off, tail, list(off) + [UNIT_OPEN[0]])


def _merge_tail(a: Tail | None, b: Tail | None) -> Tail:
    if a is None:
        return b
    if b is None:
        return a
    return Tail(a.name, max(a.N, b.N))


def _canonical(off: Plain, on: Plain, tail: Tail) -> RSet:
    off_c = _canon_off(off)
    on_unit = plain_op(on, UNIT_OPEN, lambda a, b: a and b)
    outside = plain_op(off_c, UNIT_OPEN, lambda a, b: a and not b)
    on_c = plain_op(on_unit, outside, lambda a, b: a or b)
    diff = plain_op(off_c, on_c, lambda a, b: a != b)
    if not _has_interior(diff):
        # differs from a plain set at finitely many rationals only
        pts = [iv.lo for iv in diff]
        flip = {p: _plain_contains(on_c, p) for p in pts}
        merged = from_predicate(_breaks(off_c, on_c),
                                lambda x: flip[x] if x in flip else _plain_contains(off_c, x))
        return RSet(merged)
    return RSet(off_c, tail, on_c)


# ---------------------------------------------------------------------------
# module-level API
# ---------------------------------------------------------------------------

def distance(x, S: RSet):
    """inf |x - s| over s in S; DELTA_MAX when S is empty."""
    if isinstance(x, float):
        x = snap(x)
    return S.distance(x)


@dataclass(frozen=True)
class Membership:
    value: bool
    point: object
    snapped: bool
    ambiguous: bool


def member(x, S: RSet) -> bool:
    return member_report(x, S).value


def member_report(x, S: RSet, tol: Fraction = TAU_SNAP) -> Membership:
    if isinstance(x, float):
        q = snap(x, tol)
        ambiguous = any(abs(q - e) <= tol for e in S.endpoints())
        return Membership(S.contains(q), q, True, ambiguous)
    if isinstance(x, int):
        x = Fraction(x)
    return Membership(S.contains(x), x, False, False)


def boolean_ops(A: RSet, B: RSet | None, op: str) -> RSet:
    if op == "union":
        return A.union(B)
    if op == "intersect":
        return A.intersect(B)
    if op == "difference":
        return A.difference(B)
    if op == "complement":
        return A.complement()
    raise ValueError(f"unknown op {op!r}")


TAGS = ("open", "closed", "F_sigma", "G_delta", "ambiguous_1", "other")


def classify_set(S: RSet) -> frozenset:
    """Descriptive class tags of S relative to the real line."""
    if S.tail is None:
        tags = {"F_sigma", "G_delta", "ambiguous_1"}
        ivs = S.intervals
        if all(not iv.is_point and not iv.lo_closed and not iv.hi_closed for iv in ivs):
            tags.add("open")
        if all((iv.lo_closed or iv.lo == NEG_INF) and (iv.hi_closed or iv.hi == POS_INF)
               for iv in ivs):
            tags.add("closed")
        return frozenset(tags)
    on_only = plain_op(S.on_tail, S.intervals, lambda a, b: a and not b)
    off_only = plain_op(S.intervals, S.on_tail, lambda a, b: a and not b)
    # a patch J∩T (rationals only) blocks G_delta; a patch J minus T blocks F_sigma
    f_sigma = not _has_interior(plain_op(off_only, UNIT_OPEN, lambda a, b: a and b))
    g_delta = not _has_interior(plain_op(on_only, UNIT_OPEN, lambda a, b: a and b))
    tags = set()
    if f_sigma:
        tags.add("F_sigma")
    if g_delta:
        tags.add("G_delta")
    if f_sigma and g_delta:
        tags.add("ambiguous_1")
    if not tags:
        tags.add("other")
    return frozenset(tags)


@dataclass(frozen=True)
class DiscreteFamily:
    members: tuple
    gap: Fraction
    envelopes: tuple | None = None

    def __post_init__(self):
        if self.gap <= 0:
            raise NotDiscrete("gap must be positive")

    def locate(self, x):
        """Index of the unique member containing x, or None."""
        for i, m in enumerate(self.members):
            if m.contains(x):
                return i
        return None

    def to_json(self) -> dict:
        return {"members": [m.to_json() for m in self.members], "gap": fmt_number(self.gap),
                "envelopes": None if self.envelopes is None
                else [e.to_json() for e in self.envelopes]}


def pairwise_gap(members: Sequence[RSet]):
    """Exact minimum distance between closures of distinct members."""
    cls = [m.closure_plain for m in members]
    best = DELTA_MAX
    pair = None
    for i in range(len(cls)):
        for j in range(i + 1, len(cls)):
            d = plain_set_gap(cls[i], cls[j])
            if d < best:
                best, pair = d, (i, j)
    return best, pair


def min_gap(F: Sequence[RSet]) -> DiscreteFamily:
    if not F:
        raise ValueError("family must be non-empty")
    gap, pair = pairwise_gap(F)
    if gap == 0:
        raise NotDiscrete(f"members {pair[0]} and {pair[1]} are at distance 0")
    envs = tuple(m.swell(gap / 3) for m in F)
    return DiscreteFamily(tuple(F), gap, envs)
