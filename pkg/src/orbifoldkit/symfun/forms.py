"""Single-formula maps ``x -> a * eps(x - h) * |x - h|**r + k``.

``eps`` is the constant 1 (``odd=False``, the "even" power ``|t|**r``) or
``sign`` (``odd=True``).  A :class:`Form` carries no support; the support
lives on :class:`~orbifoldkit.symfun.piecewise.Piece`.  Canonical forms
depend on the support, see :func:`normalize`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from orbifoldkit.errors import NotInFragment
from orbifoldkit.symfun.intervals import INF, Interval
from orbifoldkit.symfun.values import (
    Exact,
    as_fraction,
    fmt_frac,
    power_value,
    rational_power,
)

ONE = Fraction(1)
ZERO = Fraction(0)


@dataclass(frozen=True)
class Form:
    scale: Fraction
    odd: bool
    center: Fraction
    exponent: Fraction
    offset: Fraction

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")

    @property
    def is_constant(self) -> bool:
        return self.scale == 0

    @property
    def is_affine(self) -> bool:
        return self.scale == 0 or (self.exponent == 1 and self.odd)

    @property
    def integer_exponent(self) -> bool:
        return self.exponent.denominator == 1

    @property
    def is_polynomial(self) -> bool:
        """True when the formula is a polynomial on all of R."""
        if self.is_constant:
            return True
        return self.integer_exponent and self.odd == bool(self.exponent.numerator % 2)

    def __call__(self, x) -> Exact:
        return evaluate_form(self, x)

    def text(self) -> str:
        eps = "sign" if self.odd else "1"
        return (f"piece({fmt_frac(self.scale)}, {eps}, {fmt_frac(self.center)}, "
                f"{fmt_frac(self.exponent)}, {fmt_frac(self.offset)})")

    __str__ = text


def constant(k) -> Form:
    return Form(ZERO, True, ZERO, ONE, Fraction(k))


def affine(a, b) -> Form:
    """``x -> a*x + b``."""
    return canonical(Form(Fraction(a), True, ZERO, ONE, Fraction(b)))


IDENTITY = Form(ONE, True, ZERO, ONE, ZERO)


def canonical(f: Form) -> Form:
    """Support-independent canonical form (constants and affine maps)."""
    if f.scale == 0:
        return constant(f.offset) if f != constant(f.offset) else f
    if f.exponent == 1 and f.odd and f.center != 0:
        return Form(f.scale, True, ZERO, ONE, f.offset - f.scale * f.center)
    return f


def preferred_parity(exponent: Fraction) -> bool:
    """Parity used for one-sided forms: the polynomial one for integer exponents."""
    if exponent.denominator == 1:
        return bool(exponent.numerator % 2)
    return True


def _with_parity(f: Form, odd: bool, side: int) -> Form:
    """Re-express ``f`` with parity ``odd`` on the side ``side`` of its center."""
    if f.odd == odd:
        return f
    scale = f.scale if side > 0 else -f.scale
    return Form(scale, odd, f.center, f.exponent, f.offset)


def one_sided(f: Form, side: int) -> Form:
    """Canonical form of ``f`` restricted to the side ``side`` (+1/-1) of its center."""
    f = canonical(f)
    if f.is_affine:
        return f
    g = _with_parity(f, preferred_parity(f.exponent), side)
    return canonical(g)


def side_of_support(f: Form, support: Interval) -> int:
    """+1/-1 if the support lies on one side of the center, 0 if the center is interior."""
    if support.hi <= f.center:
        return -1
    if support.lo >= f.center:
        return 1
    return 0


def normalize(f: Form, support: Interval) -> Form:
    f = canonical(f)
    if f.is_affine:
        return f
    if support.is_point:
        value = evaluate_form(f, support.lo)
        if isinstance(value, Fraction):
            return constant(value)
        return one_sided(f, 1 if support.lo > f.center else -1)
    side = side_of_support(f, support)
    if side == 0:
        return f
    return one_sided(f, side)


def side_normalize(f: Form, x: Fraction, side: int) -> Form:
    """Canonical form of the germ of ``f`` on the side ``side`` of ``x``."""
    f = canonical(f)
    if f.is_affine:
        return f
    if x > f.center:
        s = 1
    elif x < f.center:
        s = -1
    else:
        s = side
    return one_sided(f, s)


def evaluate_form(f: Form, x) -> Exact:
    if f.scale == 0:
        return f.offset
    if isinstance(x, float):
        raise NotInFragment("evaluation at infinity")
    t = x - f.center
    if t == 0:
        return f.offset
    s = f.scale
    if f.odd and t < 0:
        s = -s
    return power_value(s, abs(t), f.exponent, f.offset)


def limit_at(f: Form, x):
    """Value at ``x`` including the limits at +-inf."""
    if isinstance(x, float):
        if f.scale == 0:
            return f.offset
        sgn = 1 if x > 0 else -1
        s = f.scale if (not f.odd or sgn > 0) else -f.scale
        return INF if s > 0 else -INF
    return evaluate_form(f, x)


def direction(f: Form, side: int) -> int:
    """Monotonicity (+1 increasing, -1 decreasing, 0 constant) on side ``side`` of the center."""
    if f.scale == 0:
        return 0
    if f.odd:
        return 1 if f.scale > 0 else -1
    s = 1 if f.scale > 0 else -1
    return s * side


def direction_on(f: Form, support: Interval) -> int:
    """Monotonicity of ``f`` on a support not straddling its center (affine maps: any support)."""
    if f.is_affine:
        if f.scale == 0:
            return 0
        return 1 if f.scale > 0 else -1
    side = side_of_support(f, support)
    if side == 0:
        if f.odd:
            return direction(f, 1)
        raise ValueError("even form is not monotone across its center")
    return direction(f, side)


def image_side(f: Form, x: Fraction, side: int) -> int:
    """Side of ``f(x)`` on which the points just ``side`` of ``x`` land (0: constant)."""
    if f.scale == 0:
        return 0
    if f.is_affine:
        return side * (1 if f.scale > 0 else -1)
    if x != f.center:
        s = 1 if x > f.center else -1
        return side * direction(f, s)
    # at the center the image of both sides is governed by sign(a)*eps(side)
    sgn = 1 if f.scale > 0 else -1
    return sgn * (side if f.odd else 1)


def solve(f: Form, y: Fraction, side: int) -> Fraction:
    """The point ``x`` on side ``side`` of the center with ``f(x) = y`` (rational or error)."""
    if f.scale == 0:
        raise ValueError("constant form has no inverse")
    if f.is_affine:
        return (y - f.offset) / f.scale
    a = f.scale * (side if f.odd else 1)
    ratio = (y - f.offset) / a
    if ratio < 0:
        raise ValueError("value not attained on this side")
    root = rational_power(ratio, 1 / f.exponent)
    if root is None:
        raise NotInFragment(f"preimage of {fmt_frac(y)} under {f} is irrational")
    return f.center + side * root


def inverse_form(f: Form, side: int) -> Form:
    """Inverse of ``f`` restricted to the side ``side`` of its center."""
    if f.scale == 0:
        raise ValueError("constant form has no inverse")
    if f.is_affine:
        return canonical(Form(1 / f.scale, True, ZERO, ONE, -f.offset / f.scale))
    a = f.scale * (side if f.odd else 1)
    mag = rational_power(abs(a), -1 / f.exponent)
    if mag is None:
        raise NotInFragment(f"inverse of {f} has irrational scale")
    sgn_a = 1 if a > 0 else -1
    c = side * sgn_a * mag
    return canonical(Form(c, True, f.offset, 1 / f.exponent, f.center))


def compose_forms(outer: Form, inner: Form) -> Form:
    """Formula of ``outer(inner(x))`` wherever both formulas apply."""
    outer = canonical(outer)
    inner = canonical(inner)
    if outer.scale == 0:
        return outer
    if inner.scale == 0:
        return constant(as_fraction(evaluate_form(outer, inner.offset)))
    if outer.is_affine:
        return canonical(Form(outer.scale * inner.scale, inner.odd, inner.center,
                              inner.exponent, outer.scale * inner.offset + outer.offset))
    if inner.is_affine:
        a = inner.scale
        mag = rational_power(abs(a), outer.exponent)
        if mag is None:
            raise NotInFragment(f"|{fmt_frac(a)}|^{fmt_frac(outer.exponent)} is irrational")
        sgn = 1 if a > 0 else -1
        scale = outer.scale * mag * (sgn if outer.odd else 1)
        center = (outer.center - inner.offset) / a
        return canonical(Form(scale, outer.odd, center, outer.exponent, outer.offset))
    if inner.offset != outer.center:
        raise NotInFragment(
            f"cannot compose {outer} after {inner}: offset {fmt_frac(inner.offset)} "
            f"does not meet center {fmt_frac(outer.center)}")
    a = inner.scale
    mag = rational_power(abs(a), outer.exponent)
    if mag is None:
        raise NotInFragment(f"|{fmt_frac(a)}|^{fmt_frac(outer.exponent)} is irrational")
    sgn = 1 if a > 0 else -1
    scale = outer.scale * mag * (sgn if outer.odd else 1)
    return canonical(Form(scale, outer.odd and inner.odd, inner.center,
                          inner.exponent * outer.exponent, outer.offset))


def falling(r: Fraction, m: int) -> Fraction:
    out = ONE
    for i in range(m):
        out *= r - i
    return out


def derivative_at(f: Form, x: Fraction, side: int, m: int):
    """One-sided ``m``-th derivative of ``f`` at ``x``; ``None`` if unbounded."""
    f = side_normalize(f, x, side)
    if m == 0:
        return evaluate_form(f, x)
    if f.scale == 0:
        return ZERO
    if f.is_affine:
        return f.scale if m == 1 else ZERO
    t = x - f.center
    s = 1 if t > 0 else (-1 if t < 0 else side)
    coef = f.scale * (s if f.odd else 1) * (s ** m) * falling(f.exponent, m)
    if coef == 0:
        return ZERO
    if t == 0:
        if f.exponent - m > 0:
            return ZERO
        if f.exponent == m:
            return coef
        return None
    return power_value(coef, abs(t), f.exponent - m, ZERO)


def jet_order_bound(f: Form, g: Form) -> int:
    """Number of derivatives whose agreement forces two side forms to agree.

    Polynomials are settled past their degree.  Otherwise each form's
    derivative ratio satisfies a first-order relation, and two consecutive
    matching ratios beyond the largest exponent pin it down.
    """
    rs = (f.exponent, g.exponent)
    if all(r.denominator == 1 for r in rs):
        return int(max(rs)) + 1
    return max(-(-r.numerator // r.denominator) for r in rs) + 3
