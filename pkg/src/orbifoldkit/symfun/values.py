"""Exact scalars: rationals plus single-radical values ``s * b**e + k``.

Everything the fragment produces is either a :class:`fractions.Fraction` or a
:class:`PowerValue`.  Rational results are always returned as ``Fraction``;
a ``PowerValue`` only appears when a fractional power of a rational is
irrational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Union

import sympy
from sympy import integer_nthroot

INF = math.inf


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not allowed in exact code")
    return Fraction(x)


@lru_cache(maxsize=65536)
def _nth_root_int(n: int, k: int) -> int | None:
    root, exact = integer_nthroot(n, k)
    return int(root) if exact else None


@lru_cache(maxsize=65536)
def rational_power(q: Fraction, r: Fraction) -> Fraction | None:
    """Return ``q**r`` for ``q >= 0`` when it is rational, else ``None``."""
    if q < 0:
        raise ValueError("negative base")
    if q == 0:
        if r <= 0:
            raise ZeroDivisionError("0 to a non-positive power")
        return Fraction(0)
    if r < 0:
        inv = rational_power(1 / q, -r)
        return inv
    p, n = r.numerator, r.denominator
    num = _nth_root_int(q.numerator, n)
    if num is None:
        return None
    den = _nth_root_int(q.denominator, n)
    if den is None:
        return None
    return Fraction(num, den) ** p


@total_ordering
@dataclass(frozen=True)
class PowerValue:
    """The exact real ``scale * base**exponent + offset`` (``base > 0``)."""

    scale: Fraction
    base: Fraction
    exponent: Fraction
    offset: Fraction

    def rational(self) -> Fraction | None:
        p = rational_power(self.base, self.exponent)
        if p is None:
            return None
        return self.scale * p + self.offset

    def sym(self) -> sympy.Expr:
        return _sym(self.scale, self.base, self.exponent, self.offset)

    def __eq__(self, other):
        return compare(self, other) == 0

    def __lt__(self, other):
        return compare(self, other) < 0

    def __hash__(self):
        return hash(self.sym())

    def __str__(self):
        return f"{self.scale}*({self.base})^({self.exponent}) + {self.offset}"


Exact = Union[Fraction, PowerValue]


@lru_cache(maxsize=16384)
def _sym(scale, base, exponent, offset):
    return sympy.Rational(scale.numerator, scale.denominator) * sympy.Rational(
        base.numerator, base.denominator
    ) ** sympy.Rational(exponent.numerator, exponent.denominator) + sympy.Rational(
        offset.numerator, offset.denominator
    )


def power_value(scale: Fraction, base: Fraction, exponent: Fraction, offset: Fraction) -> Exact:
    """Build ``scale*base**exponent + offset``, collapsing to a Fraction when rational."""
    if scale == 0:
        return offset
    p = rational_power(base, exponent)
    if p is not None:
        return scale * p + offset
    return PowerValue(scale, base, exponent, offset)


def _to_sym(x):
    if isinstance(x, PowerValue):
        return x.sym()
    return sympy.Rational(x.numerator, x.denominator)


def compare(a, b) -> int:
    """Exact three-way comparison of Fractions, PowerValues and +-inf."""
    if isinstance(a, float) or isinstance(b, float):
        av = a if isinstance(a, float) else 0.0
        bv = b if isinstance(b, float) else 0.0
        if isinstance(a, float) and isinstance(b, float):
            return (a > b) - (a < b)
        if isinstance(a, float):
            return 1 if a > 0 else -1
        return -1 if b > 0 else 1
    if isinstance(a, PowerValue):
        ra = a.rational()
        if ra is not None:
            a = ra
    if isinstance(b, PowerValue):
        rb = b.rational()
        if rb is not None:
            b = rb
    if not isinstance(a, PowerValue) and not isinstance(b, PowerValue):
        return (a > b) - (a < b)
    return _compare_radical(a, b)


def _compare_radical(a, b) -> int:
    # Single radical against a rational: decide by raising to the root degree.
    if isinstance(a, PowerValue) and not isinstance(b, PowerValue):
        return _radical_vs_rational(a, b)
    if isinstance(b, PowerValue) and not isinstance(a, PowerValue):
        return -_radical_vs_rational(b, a)
    diff = sympy.expand(_to_sym(a) - _to_sym(b))
    if diff == 0:
        return 0
    # Nonzero algebraic number of small height; 60 digits decides the sign.
    val = sympy.N(diff, 60)
    return 1 if val > 0 else -1


def _radical_vs_rational(a: PowerValue, q: Fraction) -> int:
    # sign(s*b^e + k - q) with s != 0
    d = q - a.offset
    s = a.scale
    if d == 0:
        return 1 if s > 0 else -1
    if (s > 0) != (d > 0):
        return 1 if s > 0 else -1
    # same sign: compare |s|*b^e with |d|
    p, n = a.exponent.numerator, a.exponent.denominator
    lhs = (abs(s) ** n) * (a.base ** p)
    rhs = abs(d) ** n
    c = (lhs > rhs) - (lhs < rhs)
    return c if s > 0 else -c


def exact_eq(a, b) -> bool:
    return compare(a, b) == 0


def as_fraction(x) -> Fraction:
    """Return ``x`` as a Fraction, raising NotInFragment when irrational."""
    from orbifoldkit.errors import NotInFragment

    if isinstance(x, PowerValue):
        r = x.rational()
        if r is None:
            raise NotInFragment(f"value {x} is irrational")
        return r
    return x


def fmt_frac(q) -> str:
    if isinstance(q, float):
        return "inf" if q > 0 else "-inf"
    if isinstance(q, PowerValue):
        return str(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_frac(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational")
    return Fraction(text)
