"""Smoothness, critical points and diffeomorphism checks by jet comparison."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from orbifoldkit.symfun.forms import derivative_at, jet_order_bound, normalize
from orbifoldkit.symfun.piecewise import PiecewiseFn, find_non_injective_pair, germ_at
from orbifoldkit.symfun.values import compare, exact_eq, fmt_frac


@dataclass(frozen=True)
class Smooth:
    def __bool__(self):
        return True

    def text(self) -> str:
        return "Smooth"


@dataclass(frozen=True)
class NotSmooth:
    point: Fraction
    order: int
    unbounded: bool = False

    def __bool__(self):
        return False

    def text(self) -> str:
        tail = " Unbounded" if self.unbounded else ""
        return f"NotSmooth({fmt_frac(self.point)}, order {self.order}{tail})"


@dataclass(frozen=True)
class CriticalPoint:
    point: Fraction

    def text(self) -> str:
        return f"CriticalPoint({fmt_frac(self.point)})"


@dataclass(frozen=True)
class NotInjectivePair:
    x: object
    y: object

    def text(self) -> str:
        return f"NotInjective({fmt_frac(self.x)}, {fmt_frac(self.y)})"


@dataclass(frozen=True)
class Diffeo:
    def __bool__(self):
        return True

    def text(self) -> str:
        return "Diffeo"


Reason = Union[NotSmooth, CriticalPoint, NotInjectivePair]


@dataclass(frozen=True)
class Fails:
    reason: Reason

    def __bool__(self):
        return False

    def text(self) -> str:
        return f"Fails({self.reason.text()})"


def _special_points(f: PiecewiseFn) -> list[Fraction]:
    pts = set(f.breakpoints()) | set(f.centers())
    return sorted(p for p in pts if f.domain.contains(p))


def is_smooth(f: PiecewiseFn) -> Smooth | NotSmooth:
    for p in _special_points(f):
        g = germ_at(f, p)
        sides = [(s, g.side(s)) for s in (-1, 1) if g.side(s) is not None]
        for _, form in sides:
            if not form.is_affine and form.center == p and form.exponent.denominator != 1:
                r = form.exponent
                return NotSmooth(p, r.numerator // r.denominator + 1, True)
        for s, form in sides:
            if not exact_eq(derivative_at(form, p, s, 0), g.value):
                return NotSmooth(p, 0)
        if len(sides) == 2:
            (_, left), (_, right) = sides
            for m in range(1, jet_order_bound(left, right) + 1):
                a = derivative_at(left, p, -1, m)
                b = derivative_at(right, p, 1, m)
                if not exact_eq(a, b):
                    return NotSmooth(p, m)
    return Smooth()


def critical_point(f: PiecewiseFn) -> Fraction | None:
    """First point where the derivative vanishes (constant stretches included)."""
    found = []
    for piece in f.pieces:
        form = normalize(piece.form, piece.support)
        s = piece.support
        if s.is_point:
            continue
        if form.is_constant:
            found.append(s.lo if not s.lo_open else s.midpoint())
        elif not form.is_affine and form.exponent > 1 and f.domain.contains(form.center) \
                and compare(s.lo, form.center) <= 0 and compare(form.center, s.hi) <= 0:
            found.append(form.center)
    return min(found) if found else None


def is_local_diffeomorphism(f: PiecewiseFn) -> Diffeo | Fails:
    sm = is_smooth(f)
    if not sm:
        return Fails(sm)
    c = critical_point(f)
    if c is not None:
        return Fails(CriticalPoint(c))
    return Diffeo()


def is_diffeomorphism(f: PiecewiseFn) -> Diffeo | Fails:
    local = is_local_diffeomorphism(f)
    if not local:
        return local
    pair = find_non_injective_pair(f)
    if pair is not None:
        return Fails(NotInjectivePair(*pair))
    return Diffeo()
