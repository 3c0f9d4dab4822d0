"""Exact scalars: rationals via ``Fraction`` plus surds ``a + b*sqrt(2)``.

Surds stand in for irrational sample points.  They are never rational when
``b != 0``, so builtins that look at rationality (riemann, dirichlet) see a
genuinely irrational argument, while order and arithmetic stay exact.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

TAU_SNAP = Fraction(1, 2**40)
TAU_CMP = Fraction(1, 2**30)
DELTA_MAX = Fraction(10**9)
# offset used for generic (irrational) companions of dyadic sample points
GENERIC_ETA = Fraction(1, 2**80)

INF = math.inf


class Surd:
    """The number ``a + b*sqrt(2)`` with rational ``a, b`` and ``b != 0``."""

    __slots__ = ("a", "b")

    def __new__(cls, a, b):
        a = Fraction(a)
        b = Fraction(b)
        if b == 0:
            return a
        obj = object.__new__(cls)
        obj.a = a
        obj.b = b
        return obj

    def __reduce__(self):
        return (Surd, (self.a, self.b))

    # -- helpers -----------------------------------------------------------
    def _sign(self) -> int:
        # sign of a + b*sqrt2 decided by comparing a^2 with 2b^2
        a, b = self.a, self.b
        if a >= 0 and b >= 0:
            return 1
        if a <= 0 and b <= 0:
            return -1
        if a * a > 2 * b * b:
            return 1 if a > 0 else -1
        return 1 if b > 0 else -1

    @staticmethod
    def _coerce(other):
        if isinstance(other, Surd):
            return other.a, other.b
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def _cmp(self, other) -> int | None:
        if isinstance(other, float):
            if math.isinf(other):
                return -1 if other > 0 else 1
            if math.isnan(other):
                return None
            other = Fraction(other)
        c = self._coerce(other)
        if c is None:
            return None
        d = Surd(self.a - c[0], self.b - c[1])
        if isinstance(d, Fraction):
            return (d > 0) - (d < 0)
        return d._sign()

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Surd(self.a + c[0], self.b + c[1])

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Surd(self.a - c[0], self.b - c[1])

    def __rsub__(self, other):
        if isinstance(other, float):
            return other - float(self)
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Surd(c[0] - self.a, c[1] - self.b)

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b = c
        return Surd(self.a * a + 2 * self.b * b, self.a * b + self.b * a)

    __rmul__ = __mul__

    def _inverse(self):
        n = self.a * self.a - 2 * self.b * self.b
        return Surd(self.a / n, -self.b / n)

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        other = Surd(*c)
        if other == 0:
            raise ZeroDivisionError("division by zero")
        if isinstance(other, Fraction):
            return Surd(self.a / other, self.b / other)
        return self * other._inverse()

    def __rtruediv__(self, other):
        if isinstance(other, float):
            return other / float(self)
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Surd(*c) * self._inverse()

    def __pow__(self, k):
        if isinstance(k, Fraction) and k.denominator == 1:
            k = int(k)
        if not isinstance(k, int):
            return float(self) ** float(k)
        if k < 0:
            return (self._inverse()) ** (-k)
        result: Union[Fraction, Surd] = Fraction(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __abs__(self):
        return self if self._sign() > 0 else -self

    # -- comparisons -------------------------------------------------------
    def __eq__(self, other):
        c = self._cmp(other)
        return c == 0 if c is not None else NotImplemented

    def __ne__(self, other):
        c = self._cmp(other)
        return c != 0 if c is not None else NotImplemented

    def __lt__(self, other):
        c = self._cmp(other)
        return c < 0 if c is not None else NotImplemented

    def __le__(self, other):
        c = self._cmp(other)
        return c <= 0 if c is not None else NotImplemented

    def __gt__(self, other):
        c = self._cmp(other)
        return c > 0 if c is not None else NotImplemented

    def __ge__(self, other):
        c = self._cmp(other)
        return c >= 0 if c is not None else NotImplemented

    def __hash__(self):
        return hash(("surd", self.a, self.b))

    # -- conversions -------------------------------------------------------
    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(2.0)

    def __floor__(self):
        guess = math.floor(float(self))
        while self < guess:
            guess -= 1
        while self >= guess + 1:
            guess += 1
        return guess

    def __ceil__(self):
        return -math.floor(-self)

    def __repr__(self):
        return f"Surd({self.a}, {self.b})"

    def __str__(self):
        sign = "+" if self.b > 0 else "-"
        return f"{self.a}{sign}{abs(self.b)}*sqrt(2)"


Exact = Union[Fraction, Surd]


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, Surd))


def is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Simplest rational (smallest denominator) in the closed interval [lo, hi]."""
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_between(-hi, -lo)
    fl = math.floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    # lo and hi share integer part; recurse on reciprocals of fractional parts
    rest = simplest_between(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / rest


def snap(x: float, tol: Fraction = TAU_SNAP) -> Fraction:
    """Simplest rational within ``tol`` of the float ``x``."""
    if not math.isfinite(x):
        raise ValueError(f"cannot snap non-finite value {x!r}")
    q = Fraction(x)
    return simplest_between(q - tol, q + tol)


def to_exact(x) -> Exact:
    """Convert user input to an exact scalar; floats are snapped."""
    if isinstance(x, (Fraction, Surd)):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a number")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return snap(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"unsupported scalar {x!r}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def generic_point(v) -> Surd:
    """Irrational companion of the dyadic ``v``: ``v + GENERIC_ETA*sqrt(2)``."""
    return Surd(Fraction(v), GENERIC_ETA)


def sample_point(v: float, generic: bool) -> Exact:
    return generic_point(v) if generic else Fraction(v)


def fmt_number(x) -> str:
    """Serialize a number as ``p/q``, ``-inf``/``+inf`` or a float repr."""
    if isinstance(x, float):
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return repr(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Surd):
        return str(x)
    return str(x)


def to_float(x) -> float:
    return float(x)
