"""Piecewise signed-power maps with exact composition, inversion and germs."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, Optional, Union

import sympy

from orbifoldkit.errors import NotInFragment, NotInjective, OutOfDomain
from orbifoldkit.symfun.forms import (
    IDENTITY,
    Form,
    canonical,
    compose_forms,
    constant,
    direction_on,
    evaluate_form,
    image_side,
    inverse_form,
    limit_at,
    normalize,
    side_normalize,
    side_of_support,
    solve,
)
from orbifoldkit.symfun.intervals import DomainSet, Interval
from orbifoldkit.symfun.values import Exact, PowerValue, compare, exact_eq

Region = Union[Interval, DomainSet]


@dataclass(frozen=True)
class Piece:
    form: Form
    support: Interval

    def text(self) -> str:
        return f"{self.form.text()} on {self.support}"


@dataclass(frozen=True)
class Part:
    """A maximal monotone (or constant) stretch of a single piece."""

    form: Form
    support: Interval
    direction: int
    side: int

    def image(self) -> Interval:
        if self.direction == 0:
            v = evaluate_form(self.form, self.support.lo)
            return Interval(v, v, False, False)
        s = self.support
        a = limit_at(self.form, s.lo)
        b = limit_at(self.form, s.hi)
        if self.direction > 0:
            return Interval(a, b, s.lo_open, s.hi_open)
        return Interval(b, a, s.hi_open, s.lo_open)

    def point_preimage(self, y, image: Interval | None = None) -> Exact:
        """The unique ``x`` in the part with ``f(x) = y`` (``y`` in the image)."""
        image = image or self.image()
        s = self.support
        if self.direction == 0:
            return s.lo
        lo_end, hi_end = (s.lo, s.hi) if self.direction > 0 else (s.hi, s.lo)
        if not isinstance(image.lo, float) and exact_eq(y, image.lo):
            return lo_end
        if not isinstance(image.hi, float) and exact_eq(y, image.hi):
            return hi_end
        if isinstance(y, Fraction):
            try:
                return solve(self.form, y, self.side)
            except NotInFragment:
                pass
        return evaluate_form(inverse_form(self.form, self.side), y)

    def preimage(self, target: Interval) -> Interval | None:
        image = self.image()
        j = image.intersect(target)
        if j is None:
            return None
        if self.direction == 0:
            return self.support
        lo = self.point_preimage(j.lo, image) if not isinstance(j.lo, float) else None
        hi = self.point_preimage(j.hi, image) if not isinstance(j.hi, float) else None
        s = self.support
        if self.direction > 0:
            a, a_open = (s.lo if lo is None else lo), j.lo_open
            b, b_open = (s.hi if hi is None else hi), j.hi_open
        else:
            a, a_open = (s.lo if hi is None else hi), j.hi_open
            b, b_open = (s.hi if lo is None else lo), j.lo_open
        for bound in (a, b):
            if isinstance(bound, PowerValue):
                raise NotInFragment(f"preimage endpoint {bound} is irrational")
        return Interval(a, b, a_open, b_open)


def _split(form: Form, support: Interval) -> list[Part]:
    form = normalize(form, support)
    if support.is_point or form.is_constant:
        return [Part(form, support, 0, 1)]
    if form.is_affine:
        return [Part(form, support, direction_on(form, support), 1)]
    h = form.center
    if support.interior_contains(h):
        out = []
        left = Interval(support.lo, h, support.lo_open, True)
        right = Interval(h, support.hi, True, support.hi_open)
        lf = normalize(form, left)
        out.append(Part(lf, left, direction_on(lf, left), -1))
        out.append(Part(constant(form.offset), Interval.point(h), 0, 1))
        rf = normalize(form, right)
        out.append(Part(rf, right, direction_on(rf, right), 1))
        return out
    return [Part(form, support, direction_on(form, support), side_of_support(form, support))]


def _atoms(pieces: Iterable[Piece]):
    atoms = []
    for p in pieces:
        f = normalize(p.form, p.support)
        s = p.support
        if s.is_point:
            atoms.append(("pt", s.lo, f))
            continue
        atoms.append(("seg", Interval(s.lo, s.hi, True, True), f))
        if not s.lo_open:
            atoms.append(("pt", s.lo, f))
        if not s.hi_open:
            atoms.append(("pt", s.hi, f))

    def key(atom):
        if atom[0] == "pt":
            return (atom[1], 1)
        return (atom[1].lo, 2)

    atoms.sort(key=key)
    return atoms


def _merge_candidates(left: Form, right: Form, p: Fraction, value) -> list[Form]:
    out = [left, right]
    if isinstance(value, Fraction) and right.scale != 0 and left.exponent == right.exponent:
        for odd in (True, False):
            out.append(Form(right.scale, odd, p, right.exponent, value))
    return out


def _try_merge(lseg, p, value, rseg):
    (_, li, lf), (_, ri, rf) = lseg, rseg
    for cand in _merge_candidates(lf, rf, p, value):
        if (normalize(cand, li) == lf and normalize(cand, ri) == rf
                and exact_eq(evaluate_form(cand, p), value)):
            merged = Interval(li.lo, ri.hi, True, True)
            return ("seg", merged, normalize(cand, merged))
    return None


def canonical_pieces(pieces: Iterable[Piece]) -> tuple[Piece, ...]:
    """Unique piece list for the function described by ``pieces``."""
    pieces = [p for p in pieces]
    ordered = sorted(pieces, key=lambda p: p.support.sort_key())
    for a, b in zip(ordered, ordered[1:]):
        if a.support.intersect(b.support) is not None:
            raise ValueError(f"overlapping supports {a.support} and {b.support}")
    atoms = _atoms(ordered)
    # merge segments across an interior point when one formula covers both
    i = 0
    while i + 2 < len(atoms):
        a, b, c = atoms[i], atoms[i + 1], atoms[i + 2]
        if (a[0] == "seg" and b[0] == "pt" and c[0] == "seg"
                and a[1].hi == b[1] and c[1].lo == b[1]):
            merged = _try_merge(a, b[1], evaluate_form(b[2], b[1]), c)
            if merged is not None:
                atoms[i:i + 3] = [merged]
                continue
        i += 1
    out: list[list] = []  # [form, lo, hi, lo_open, hi_open]
    pending_point = None
    for idx, atom in enumerate(atoms):
        if atom[0] == "seg":
            _, iv, f = atom
            lo_open = True
            if pending_point is not None:
                p, v = pending_point
                if p == iv.lo and exact_eq(evaluate_form(f, p), v):
                    lo_open = False
                else:
                    out.append([_point_form(p, v), p, p, False, False])
                pending_point = None
            out.append([f, iv.lo, iv.hi, lo_open, True])
        else:
            _, p, f = atom
            v = evaluate_form(f, p)
            if pending_point is not None:
                q, w = pending_point
                out.append([_point_form(q, w), q, q, False, False])
                pending_point = None
            prev = out[-1] if out else None
            nxt = atoms[idx + 1] if idx + 1 < len(atoms) else None
            right_ok = (nxt is not None and nxt[0] == "seg" and nxt[1].lo == p
                        and exact_eq(evaluate_form(nxt[2], p), v))
            if right_ok:
                pending_point = (p, v)
            elif (prev is not None and prev[2] == p and prev[1] != prev[2]
                  and exact_eq(evaluate_form(prev[0], p), v)):
                prev[4] = False
            else:
                out.append([_point_form(p, v), p, p, False, False])
    if pending_point is not None:
        q, w = pending_point
        out.append([_point_form(q, w), q, q, False, False])
    result = []
    for f, lo, hi, lo_open, hi_open in out:
        iv = Interval(lo, hi, lo_open, hi_open)
        result.append(Piece(normalize(f, iv), iv))
    return tuple(result)


def _point_form(p, v) -> Form:
    if isinstance(v, Fraction):
        return constant(v)
    raise NotInFragment(f"isolated point value {v} at {p} is irrational")


@dataclass(frozen=True)
class Germ:
    """Germ of a map at ``base``: one-sided formulas plus the value there."""

    base: Fraction
    left: Optional[Form]
    value: Exact
    right: Optional[Form]

    def side(self, s: int) -> Optional[Form]:
        return self.left if s < 0 else self.right

    @property
    def target(self) -> Exact:
        return self.value

    def then(self, outer: Germ) -> Germ:
        """Germ of ``outer o self`` (``outer`` based at ``self.value``)."""
        if not exact_eq(outer.base, self.value):
            raise ValueError("germs are not composable")
        sides = {}
        for s in (-1, 1):
            f = self.side(s)
            if f is None:
                sides[s] = None
                continue
            t = image_side(f, self.base, s)
            if t == 0:
                sides[s] = constant(outer.value)
                continue
            g = outer.side(t)
            if g is None:
                raise OutOfDomain(self.value, "germ side")
            sides[s] = side_normalize(compose_forms(g, f), self.base, s)
        return Germ(self.base, sides[-1], outer.value, sides[1])

    def inverse(self) -> Germ:
        if not isinstance(self.value, Fraction):
            raise NotInFragment("germ value is irrational")
        sides = {-1: None, 1: None}
        for s in (-1, 1):
            f = self.side(s)
            if f is None:
                continue
            if f.is_constant:
                raise NotInjective(self.base, self.base)
            t = image_side(f, self.base, s)
            c = s if self.base == f.center else (1 if self.base > f.center else -1)
            inv = inverse_form(f, c)
            sides[t] = side_normalize(inv, self.value, t)
        return Germ(self.value, sides[-1], self.base, sides[1])

    def text(self) -> str:
        def fmt(f):
            return "-" if f is None else f.text()
        from orbifoldkit.symfun.values import fmt_frac
        return f"germ@{fmt_frac(self.base)}[{fmt(self.left)} ; {fmt(self.right)}]"


def identity_germ(x: Fraction) -> Germ:
    return Germ(x, IDENTITY, x, IDENTITY)


@lru_cache(maxsize=65536)
def _canonical(pieces: tuple[Piece, ...]) -> tuple[Piece, ...]:
    return canonical_pieces(pieces)


@dataclass(frozen=True)
class PiecewiseFn:
    """A function given by finitely many pieces with disjoint supports.

    The constructor canonicalises, so two instances are equal exactly when
    they describe the same function on the same domain.
    """

    pieces: tuple[Piece, ...] = ()
    _domain: DomainSet = field(init=False, repr=False, compare=False, hash=False)
    _hash: int = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "pieces", _canonical(tuple(self.pieces)))
        object.__setattr__(self, "_domain", DomainSet.of(p.support for p in self.pieces))
        object.__setattr__(self, "_hash", hash(self.pieces))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def from_form(cls, form: Form, domain: Region) -> PiecewiseFn:
        ivs = (domain,) if isinstance(domain, Interval) else domain.intervals
        return cls(tuple(Piece(form, iv) for iv in ivs))

    @classmethod
    def identity(cls, domain: Region) -> PiecewiseFn:
        return cls.from_form(IDENTITY, domain)

    @classmethod
    def constant(cls, k, domain: Region) -> PiecewiseFn:
        return cls.from_form(constant(Fraction(k)), domain)

    @classmethod
    def affine(cls, a, b, domain: Region) -> PiecewiseFn:
        return cls.from_form(canonical(Form(Fraction(a), True, Fraction(0), Fraction(1), Fraction(b))),
                             domain)

    @classmethod
    def empty(cls) -> PiecewiseFn:
        return cls(())

    @property
    def domain(self) -> DomainSet:
        return self._domain

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def piece_at(self, x) -> Piece:
        for p in self.pieces:
            if p.support.contains(x):
                return p
        raise OutOfDomain(x, self.domain)

    def __call__(self, x) -> Exact:
        return evaluate(self, x)

    def parts(self) -> list[Part]:
        out = []
        for p in self.pieces:
            out.extend(_split(p.form, p.support))
        return out

    def restrict(self, region: Region) -> PiecewiseFn:
        regions = (region,) if isinstance(region, Interval) else region.intervals
        out = []
        for p in self.pieces:
            for r in regions:
                s = p.support.intersect(r)
                if s is not None:
                    out.append(Piece(p.form, s))
        return PiecewiseFn(tuple(out))

    def image(self) -> DomainSet:
        return DomainSet.of(part.image() for part in self.parts())

    def preimage(self, region: Region) -> DomainSet:
        regions = (region,) if isinstance(region, Interval) else region.intervals
        return DomainSet.of(part.preimage(r) for part in self.parts() for r in regions)

    def after(self, inner: PiecewiseFn) -> PiecewiseFn:
        return compose(self, inner)

    def inverse(self) -> PiecewiseFn:
        return invert(self)

    def germ(self, x) -> Germ:
        return germ_at(self, x)

    def breakpoints(self) -> list[Fraction]:
        pts = set()
        for p in self.pieces:
            for b in (p.support.lo, p.support.hi):
                if not isinstance(b, float):
                    pts.add(b)
        return sorted(pts)

    def centers(self) -> list[Fraction]:
        """Centers of non-affine pieces lying in the closure of their support."""
        out = set()
        for p in self.pieces:
            f, s = p.form, p.support
            if not f.is_affine and compare(s.lo, f.center) <= 0 and compare(f.center, s.hi) <= 0:
                out.add(f.center)
        return sorted(out)

    def text(self) -> str:
        if not self.pieces:
            return "empty"
        return " | ".join(p.text() for p in self.pieces)

    __str__ = text


def evaluate(f: PiecewiseFn, x) -> Exact:
    x = Fraction(x) if isinstance(x, int) else x
    return evaluate_form(f.piece_at(x).form, x)


@lru_cache(maxsize=65536)
def compose(outer: PiecewiseFn, inner: PiecewiseFn) -> PiecewiseFn:
    """``outer o inner`` on ``inner^-1(dom outer)``; raises NotInFragment when not expressible."""
    pieces = []
    for part in inner.parts():
        for op in outer.pieces:
            pre = part.preimage(op.support)
            if pre is None:
                continue
            pieces.append(Piece(compose_forms(op.form, part.form), pre))
    return PiecewiseFn(tuple(pieces))


def _rational_between(lo, hi) -> Fraction:
    """A simple rational strictly between two exact reals (or infinities)."""
    if isinstance(lo, Fraction) and isinstance(hi, Fraction):
        return (lo + hi) / 2
    if isinstance(lo, float) and isinstance(hi, float):
        return Fraction(0)

    def approx(v):
        if isinstance(v, PowerValue):
            return Fraction(str(sympy.N(v.sym(), 30)))
        return v

    if isinstance(lo, float):
        return Fraction(int(approx(hi)) - 1)
    if isinstance(hi, float):
        return Fraction(int(approx(lo)) + 1)
    mid = (approx(lo) + approx(hi)) / 2
    for d in (1, 2, 4, 8, 16, 64, 256, 10 ** 4, 10 ** 8, 10 ** 16):
        c = mid.limit_denominator(d)
        if compare(c, lo) > 0 and compare(c, hi) < 0:
            return c
    return mid


def _pick_in(iv: Interval):
    if iv.is_point:
        return iv.lo
    return _rational_between(iv.lo, iv.hi)


def find_non_injective_pair(f: PiecewiseFn) -> tuple | None:
    """Return ``(x, y)`` with ``x != y`` and ``f(x) = f(y)``, or ``None`` if ``f`` is injective."""
    for p in f.pieces:
        form = normalize(p.form, p.support)
        s = p.support
        if s.is_point:
            continue
        if form.is_constant:
            a = _pick_in(s.interior())
            b = _rational_between(a, s.hi)
            return (a, b)
        if not form.is_affine and not form.odd and s.interior_contains(form.center):
            h = form.center
            d = min(h - s.lo, s.hi - h)
            d = Fraction(1) if isinstance(d, float) else d / 2
            return (h - d, h + d)
    parts = f.parts()
    images = [part.image() for part in parts]
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            common = images[i].intersect(images[j])
            if common is None:
                continue
            y = _pick_in(common)
            a = parts[i].point_preimage(y, images[i])
            b = parts[j].point_preimage(y, images[j])
            return (a, b)
    return None


def invert(f: PiecewiseFn) -> PiecewiseFn:
    pair = find_non_injective_pair(f)
    if pair is not None:
        raise NotInjective(*pair)
    pieces = []
    for part in f.parts():
        image = part.image()
        for bound in (image.lo, image.hi):
            if isinstance(bound, PowerValue):
                raise NotInFragment(f"image endpoint {bound} is irrational")
        if part.direction == 0:
            pieces.append(Piece(constant(part.support.lo), image))
        else:
            pieces.append(Piece(inverse_form(part.form, part.side), image))
    return PiecewiseFn(tuple(pieces))


def _side_piece(f: PiecewiseFn, x, s: int) -> Piece | None:
    for p in f.pieces:
        iv = p.support
        if iv.is_point:
            continue
        if s < 0 and compare(iv.lo, x) < 0 and (compare(x, iv.hi) < 0 or (x == iv.hi and not iv.hi_open)):
            return p
        if s > 0 and compare(x, iv.hi) < 0 and (compare(iv.lo, x) < 0 or (x == iv.lo and not iv.lo_open)):
            return p
    return None


def germ_at(f: PiecewiseFn, x) -> Germ:
    x = Fraction(x) if isinstance(x, int) else x
    value = evaluate(f, x)
    sides = {}
    for s in (-1, 1):
        p = _side_piece(f, x, s)
        sides[s] = None if p is None else side_normalize(p.form, x, s)
    return Germ(x, sides[-1], value, sides[1])


def germ_equal(f: PiecewiseFn, g: PiecewiseFn, x) -> bool:
    """Whether ``f`` and ``g`` agree near ``x`` on every side where both are defined."""
    a, b = germ_at(f, x), germ_at(g, x)
    if not exact_eq(a.value, b.value):
        return False
    shared = 0
    for s in (-1, 1):
        fa, fb = a.side(s), b.side(s)
        if fa is None or fb is None:
            continue
        shared += 1
        if fa != fb:
            return False
    return shared > 0 or (a.left is None and a.right is None and b.left is None and b.right is None)


def compose_germs(outer: Germ, inner: Germ) -> Germ:
    return inner.then(outer)


def from_germ(g: Germ, radius: Fraction) -> PiecewiseFn:
    """A representative of ``g`` on a symmetric neighbourhood of its base."""
    x = g.base
    pieces = [Piece(constant(g.value) if isinstance(g.value, Fraction) else g.right or g.left,
                    Interval.point(x))]
    if g.left is not None:
        pieces.append(Piece(g.left, Interval(x - radius, x, True, True)))
    if g.right is not None:
        pieces.append(Piece(g.right, Interval(x, x + radius, True, True)))
    return PiecewiseFn(tuple(pieces))

