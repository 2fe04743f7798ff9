"""Intervals with rational (or infinite) endpoints and finite unions of them."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union

from orbifoldkit.symfun.values import INF, compare, fmt_frac, parse_frac

Bound = Union[Fraction, float]


@dataclass(frozen=True, order=False)
class Interval:
    lo: Bound
    hi: Bound
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self):
        if isinstance(self.lo, float) and self.lo != -INF:
            raise TypeError("finite float bound")
        if isinstance(self.hi, float) and self.hi != INF:
            raise TypeError("finite float bound")
        if self.lo == -INF and not self.lo_open or self.hi == INF and not self.hi_open:
            raise ValueError("infinite endpoints must be open")
        if self.lo > self.hi or (self.lo == self.hi and (self.lo_open or self.hi_open)):
            raise ValueError(f"empty interval {self.lo}, {self.hi}")

    @classmethod
    def make(cls, lo, hi, lo_open=True, hi_open=True) -> Interval | None:
        """Like the constructor, but returns ``None`` for an empty interval."""
        if lo > hi or (lo == hi and (lo_open or hi_open)):
            return None
        return cls(lo, hi, lo_open, hi_open)

    @classmethod
    def open(cls, lo, hi) -> Interval:
        return cls(Fraction(lo) if not isinstance(lo, float) else lo,
                   Fraction(hi) if not isinstance(hi, float) else hi, True, True)

    @classmethod
    def closed(cls, lo, hi) -> Interval:
        return cls(Fraction(lo), Fraction(hi), False, False)

    @classmethod
    def point(cls, p) -> Interval:
        return cls(Fraction(p), Fraction(p), False, False)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def is_open(self) -> bool:
        return self.lo_open and self.hi_open

    def contains(self, x) -> bool:
        c_lo = compare(x, self.lo)
        c_hi = compare(x, self.hi)
        if c_lo < 0 or (c_lo == 0 and self.lo_open):
            return False
        if c_hi > 0 or (c_hi == 0 and self.hi_open):
            return False
        return True

    __contains__ = contains

    def interior_contains(self, x) -> bool:
        return compare(x, self.lo) > 0 and compare(x, self.hi) < 0

    def intersect(self, other: Interval) -> Interval | None:
        if self.lo > other.lo or (self.lo == other.lo and self.lo_open):
            lo, lo_open = self.lo, self.lo_open
        else:
            lo, lo_open = other.lo, other.lo_open
        if self.hi < other.hi or (self.hi == other.hi and self.hi_open):
            hi, hi_open = self.hi, self.hi_open
        else:
            hi, hi_open = other.hi, other.hi_open
        return Interval.make(lo, hi, lo_open, hi_open)

    def interior(self) -> Interval | None:
        return Interval.make(self.lo, self.hi, True, True)

    def subset_of(self, other: Interval) -> bool:
        i = self.intersect(other)
        return i == self

    def midpoint(self) -> Fraction:
        if self.lo == -INF and self.hi == INF:
            return Fraction(0)
        if self.lo == -INF:
            return self.hi - 1
        if self.hi == INF:
            return self.lo + 1
        return (self.lo + self.hi) / 2

    def length(self):
        return self.hi - self.lo

    def reflected(self) -> Interval:
        """The image under ``x -> -x``."""
        return Interval(-self.hi, -self.lo, self.hi_open, self.lo_open)

    def shifted(self, c: Fraction) -> Interval:
        return Interval(self.lo + c, self.hi + c, self.lo_open, self.hi_open)

    def sort_key(self):
        return (self.lo, self.lo_open, self.hi, not self.hi_open)

    def __str__(self) -> str:
        if self.is_point:
            return f"[{fmt_frac(self.lo)},{fmt_frac(self.lo)}]"
        return (("(" if self.lo_open else "[") + fmt_frac(self.lo) + "," + fmt_frac(self.hi)
                + (")" if self.hi_open else "]"))


def _touch(a: Interval, b: Interval) -> bool:
    """True when ``a`` (left of ``b``) overlaps or abuts ``b`` with no gap."""
    if a.hi > b.lo:
        return True
    if a.hi == b.lo:
        return not (a.hi_open and b.lo_open)
    return False


@dataclass(frozen=True)
class DomainSet:
    intervals: tuple[Interval, ...] = ()

    @classmethod
    def of(cls, intervals: Iterable[Interval | None]) -> DomainSet:
        items = sorted((i for i in intervals if i is not None), key=Interval.sort_key)
        out: list[Interval] = []
        for iv in items:
            if out and _touch(out[-1], iv):
                last = out.pop()
                if iv.hi > last.hi or (iv.hi == last.hi and not iv.hi_open):
                    hi, hi_open = iv.hi, iv.hi_open
                else:
                    hi, hi_open = last.hi, last.hi_open
                out.append(Interval(last.lo, hi, last.lo_open, hi_open))
            else:
                out.append(iv)
        return cls(tuple(out))

    @classmethod
    def empty(cls) -> DomainSet:
        return cls(())

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def contains(self, x) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    __contains__ = contains

    def union(self, other: DomainSet) -> DomainSet:
        return DomainSet.of(self.intervals + other.intervals)

    def intersect(self, other: DomainSet | Interval) -> DomainSet:
        others = (other,) if isinstance(other, Interval) else other.intervals
        return DomainSet.of(a.intersect(b) for a in self.intervals for b in others)

    def complement(self) -> DomainSet:
        out = []
        lo, lo_open = -INF, True
        for iv in self.intervals:
            out.append(Interval.make(lo, iv.lo, lo_open, not iv.lo_open))
            lo, lo_open = iv.hi, not iv.hi_open
        out.append(Interval.make(lo, INF, lo_open, True))
        return DomainSet.of(x for x in out if x is not None and not (x.lo == -INF and x.hi == -INF))

    def difference(self, other: DomainSet) -> DomainSet:
        return self.intersect(other.complement())

    def subset_of(self, other: DomainSet | Interval) -> bool:
        if isinstance(other, Interval):
            other = DomainSet.of([other])
        return self.intersect(other) == self

    def interior(self) -> DomainSet:
        return DomainSet.of(iv.interior() for iv in self.intervals)

    def is_open(self) -> bool:
        return all(iv.is_open for iv in self.intervals)

    def hull(self) -> Interval:
        a, b = self.intervals[0], self.intervals[-1]
        return Interval(a.lo, b.hi, a.lo_open, b.hi_open)

    def __str__(self) -> str:
        if not self.intervals:
            return "empty"
        return " u ".join(str(iv) for iv in self.intervals)


_IV_RE = re.compile(r"^\s*([\[(])\s*([^,]+?)\s*,\s*([^\])]+?)\s*([\])])\s*$")


def _parse_bound(text: str):
    t = text.strip()
    if t in ("inf", "+inf"):
        return INF
    if t == "-inf":
        return -INF
    return parse_frac(t)


def parse_interval(text: str) -> Interval:
    m = _IV_RE.match(text)
    if not m:
        raise ValueError(f"bad interval {text!r}")
    lo = _parse_bound(m.group(2))
    hi = _parse_bound(m.group(3))
    return Interval(lo, hi, m.group(1) == "(", m.group(4) == ")")


def parse_domain(text: str) -> DomainSet:
    text = text.strip()
    if text == "empty":
        return DomainSet.empty()
    return DomainSet.of(parse_interval(part) for part in text.split(" u "))
