"""Reduced orbifold charts on subsets of the real line.

A chart is an open interval ``V`` with a finite group of diffeomorphisms
and a projection onto part of the carrier ``Q``.  In dimension one a finite
diffeomorphism group has at most two elements: the identity and possibly a
single orientation-reversing involution with one fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from itertools import product
from typing import Iterable, Union

from orbifoldkit.errors import NoMatch, NotInFragment, NotStableError
from orbifoldkit.report import ReportBuilder, ValidationReport
from orbifoldkit.symfun import (
    Diffeo,
    DomainSet,
    Fails,
    Germ,
    Interval,
    PiecewiseFn,
    compose,
    find_non_injective_pair,
    germ_at,
    is_diffeomorphism,
)
from orbifoldkit.symfun.forms import compose_forms, image_side, inverse_form, side_normalize
from orbifoldkit.symfun.piecewise import from_germ
from orbifoldkit.symfun.values import compare, fmt_frac


@dataclass(frozen=True)
class Space:
    carrier: DomainSet

    def __post_init__(self):
        if self.carrier.is_empty:
            raise ValueError("the underlying space must be nonempty")


@dataclass(frozen=True)
class Chart:
    id: str
    domain: Interval
    group: tuple[PiecewiseFn, ...]
    proj: PiecewiseFn
    fundamental: Interval

    @property
    def identity(self) -> PiecewiseFn:
        return PiecewiseFn.identity(self.domain)

    def image(self) -> DomainSet:
        return self.proj.image()


@dataclass(frozen=True)
class Embedding:
    """A change of charts from ``source`` to ``target``.

    When ``map`` is defined on the whole source domain this is an open
    embedding of charts; otherwise it is a partial transition.
    """

    source: str
    target: str
    map: PiecewiseFn


@dataclass(frozen=True)
class Atlas:
    charts: tuple[Chart, ...]
    witnesses: tuple[Embedding, ...]
    space: Space
    id: str = ""

    def chart(self, cid: str) -> Chart:
        for c in self.charts:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def ids(self) -> list[str]:
        return [c.id for c in self.charts]


# ---------------------------------------------------------------- group helpers


def is_identity_on(g: PiecewiseFn, domain: Interval) -> bool:
    return g == PiecewiseFn.identity(domain)


def fixed_points(g: PiecewiseFn) -> list[Fraction]:
    """Isolated fixed points of ``g`` (pieces equal to the identity are skipped)."""
    found = set()
    for p in g.pieces:
        f, s = p.form, p.support
        if f.is_affine:
            if f.scale == 1:
                continue
            x = f.offset / (1 - f.scale)
            if s.contains(x):
                found.add(x)
        else:
            for x in (f.center, s.lo, s.hi):
                if not isinstance(x, float) and s.contains(x) and compare(g(x), x) == 0:
                    found.add(x)
    return sorted(found)


def translate(g: PiecewiseFn, s: Interval) -> DomainSet:
    """The image ``g(S)``."""
    return g.restrict(s).image()


def fundamental_domain(domain: Interval, group: Iterable[PiecewiseFn]) -> Interval:
    """Deterministic transversal: all of ``V`` for the trivial group, else ``[p, hi)``."""
    others = [g for g in group if not is_identity_on(g, domain)]
    if not others:
        return domain
    pts = [p for g in others for p in fixed_points(g) if domain.interior_contains(p)]
    if not pts:
        raise ValueError("no fixed point for the nontrivial group element")
    return Interval(pts[0], domain.hi, False, domain.hi_open)


def probe_points(chart: Chart) -> list[Fraction]:
    """Endpoints, centers, breakpoints and fixed points, plus midpoints between them."""
    v = chart.domain
    base = set()
    for b in (v.lo, v.hi):
        if not isinstance(b, float):
            base.add(b)
    for fn in (chart.proj, *chart.group):
        base.update(x for x in fn.breakpoints() if not isinstance(x, float))
        base.update(fn.centers())
    for g in chart.group:
        base.update(fixed_points(g))
    pts = sorted(x for x in base if compare(v.lo, x) <= 0 and compare(x, v.hi) <= 0)
    if isinstance(v.lo, float):
        pts.insert(0, (pts[0] if pts else Fraction(0)) - 1)
    if isinstance(v.hi, float):
        pts.append((pts[-1] if pts else Fraction(0)) + 1)
    mids = [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    out = sorted(set(pts) | set(mids))
    return [x for x in out if v.contains(x)]


def fiber(chart: Chart, q) -> list[Fraction]:
    """Rational points of ``V`` over ``q``; irrational preimages are skipped."""
    out = set()
    for part in chart.proj.parts():
        image = part.image()
        if not image.contains(q):
            continue
        x = part.point_preimage(q, image)
        if isinstance(x, Fraction):
            out.add(x)
    return sorted(out)


# ---------------------------------------------------------------- validation


def validate_chart(c: Chart, space: Space | None = None) -> ValidationReport:
    rb = ReportBuilder()
    v = c.domain
    if not v.is_open:
        rb.fail("domain", f"{v} is not open")
    if not any(is_identity_on(g, v) for g in c.group):
        rb.fail("group.identity", "the identity is missing")
    for i, g in enumerate(c.group):
        if DomainSet.of([v]) != g.domain:
            rb.fail("group.domain", f"element {i} is defined on {g.domain}, not {v}")
            continue
        d = is_diffeomorphism(g)
        if not d:
            rb.fail("group.diffeo", f"element {i}: {d.text()}")
            continue
        if g.image() != DomainSet.of([v]):
            rb.fail("group.image", f"element {i} maps onto {g.image()}")
        try:
            if compose(c.proj, g) != c.proj:
                rb.fail("group.invariance", f"proj o g{i} != proj")
        except NotInFragment as e:
            rb.unknown("group.invariance", str(e))
    for i, g in enumerate(c.group):
        try:
            if g.domain == DomainSet.of([v]) and g.inverse() not in c.group:
                rb.fail("group.inverse", f"inverse of element {i} is missing")
            for j, h in enumerate(c.group):
                if compose(g, h) not in c.group:
                    rb.fail("group.closure", f"g{i} o g{j} is missing")
        except Exception as e:  # noqa: BLE001 - reported, not raised
            rb.fail("group.closure", str(e))
    if c.proj.domain != DomainSet.of([v]):
        rb.fail("proj.domain", f"projection defined on {c.proj.domain}")
    if not c.fundamental.subset_of(v):
        rb.fail("fundamental", f"{c.fundamental} is not inside {v}")
    else:
        pf = c.proj.restrict(c.fundamental)
        pair = find_non_injective_pair(pf)
        if pair is not None:
            rb.fail("fundamental.injective",
                    f"proj({fmt_frac(pair[0])}) = proj({fmt_frac(pair[1])})")
        if pf.image() != c.proj.image():
            rb.fail("fundamental.image", f"proj(F) = {pf.image()} but proj(V) = {c.proj.image()}")
    if space is not None:
        image = c.proj.image()
        if not image.subset_of(space.carrier):
            rb.fail("proj.image", f"{image} is not inside {space.carrier}")
        elif not _relatively_open(image, space.carrier):
            rb.fail("proj.open", f"{image} is not open in {space.carrier}")
    return rb.build()


def _relatively_open(a: DomainSet, carrier: DomainSet) -> bool:
    for iv in a:
        for end, closed in ((iv.lo, not iv.lo_open), (iv.hi, not iv.hi_open)):
            if not closed:
                continue
            if not any((c.lo == end and not c.lo_open and end == iv.lo)
                       or (c.hi == end and not c.hi_open and end == iv.hi) for c in carrier):
                return False
    return True


@dataclass(frozen=True)
class Stable:
    group: tuple[PiecewiseFn, ...]

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotStable:
    element: PiecewiseFn
    overlap: DomainSet

    def __bool__(self):
        return False


def stable_isotropy(s: Interval, c: Chart) -> Stable | NotStable:
    target = DomainSet.of([s])
    kept = []
    for g in c.group:
        gs = translate(g, s)
        if gs == target:
            kept.append(g)
            continue
        overlap = gs.intersect(target)
        if not overlap.is_empty:
            return NotStable(g, overlap)
    return Stable(tuple(kept))


def restrict_chart(c: Chart, s: Interval, new_id: str | None = None) -> Chart:
    st = stable_isotropy(s, c)
    if not st:
        raise NotStableError(f"{s} is not stable in chart {c.id}")
    group = tuple(g.restrict(s) for g in st.group)
    return Chart(new_id or f"{c.id}|{s}", s, group, c.proj.restrict(s),
                 fundamental_domain(s, group))


def stable_neighborhood(x: Fraction, c: Chart) -> Interval:
    """An open stable interval around ``x`` whose isotropy is exactly ``G_x``."""
    v = c.domain
    gx = [g for g in c.group if g(x) == x]
    dists = []
    for b in (v.lo, v.hi):
        if not isinstance(b, float):
            dists.append(abs(x - b))
    for g in c.group:
        if any(g is h for h in gx):
            continue
        dists.append(abs(g(x) - x) / 2)
        dists.extend(abs(p - x) / 2 for p in fixed_points(g) if p != x)
    r = (min(dists) if dists else Fraction(2)) / 2
    target = len(gx)
    for _ in range(64):
        s = DomainSet.of([Interval(x - r, x + r)])
        for g in gx:
            s = s.intersect(translate(g, Interval(x - r, x + r)))
        iv = next(iv for iv in s if iv.contains(x))
        st = stable_isotropy(iv, c)
        if st and len(st.group) == target:
            return iv
        r /= 2
    raise NotStableError(f"no stable neighbourhood found around {x}")


# ---------------------------------------------------------------- embeddings


def validate_embedding(e: Embedding, atlas: Atlas) -> ValidationReport:
    rb = ReportBuilder()
    try:
        src, dst = atlas.chart(e.source), atlas.chart(e.target)
    except KeyError as k:
        rb.fail("ids", f"unknown chart {k}")
        return rb.build()
    mu = e.map
    if mu.is_empty:
        rb.fail("domain", "empty map")
        return rb.build()
    if not mu.domain.subset_of(src.domain):
        rb.fail("domain", f"{mu.domain} is not inside {src.domain}")
        return rb.build()
    d = is_diffeomorphism(mu)
    if not d:
        rb.fail("diffeo", d.text())
        return rb.build()
    image = mu.image()
    if not image.subset_of(dst.domain):
        rb.fail("image", f"{image} is not inside {dst.domain}")
        return rb.build()
    try:
        if compose(dst.proj, mu) != src.proj.restrict(mu.domain):
            rb.fail("projection", "target proj o map differs from source proj")
    except NotInFragment as exc:
        rb.unknown("projection", str(exc))
    if mu.domain == DomainSet.of([src.domain]):
        st = stable_isotropy(image.hull(), dst)
        if not st:
            rb.fail("stable", f"image {image} is not stable in {dst.id}")
    return rb.build()


def induced_group_iso(e: Embedding, atlas: Atlas) -> list[tuple[PiecewiseFn, PiecewiseFn]]:
    src, dst = atlas.chart(e.source), atlas.chart(e.target)
    mu = e.map
    pairs = []
    for g in src.group:
        lhs = compose(mu, g)
        for h in dst.group:
            if compose(h, mu) == lhs:
                pairs.append((g, h))
                break
        else:
            raise NoMatch(f"no target element matches {g}")
    return pairs


# ---------------------------------------------------------------- compatibility


@dataclass(frozen=True)
class Candidate:
    germ: Germ
    fn: PiecewiseFn
    verdict: Union[Diffeo, Fails]


@dataclass(frozen=True)
class Certificate:
    x: Fraction
    y: Fraction
    candidates: tuple[Candidate, ...]
    reverse: tuple[Candidate, ...] = ()

    def text(self) -> str:
        items = ", ".join(c.verdict.text() for c in self.candidates)
        return f"at ({fmt_frac(self.x)},{fmt_frac(self.y)}): [{items}]"


@dataclass(frozen=True)
class Compatible:
    witnesses: tuple[tuple[Fraction, Fraction, PiecewiseFn], ...]

    def __bool__(self):
        return True

    def text(self) -> str:
        return f"Compatible({len(self.witnesses)} witnesses)"


@dataclass(frozen=True)
class Incompatible:
    certificate: Certificate

    def __bool__(self):
        return False

    def text(self) -> str:
        return f"Incompatible({self.certificate.text()})"


@dataclass(frozen=True)
class CompatUnknown:
    x: Fraction
    y: Fraction
    message: str

    def __bool__(self):
        return False

    def text(self) -> str:
        return f"Unknown(at ({fmt_frac(self.x)},{fmt_frac(self.y)}): {self.message})"


def branch_germs(pi_src: PiecewiseFn, x, pi_dst: PiecewiseFn, y) -> tuple[list[Germ], list[str]]:
    """Germs ``h`` at ``x`` with ``h(x) = y`` and ``pi_dst o h = pi_src``.

    Each side of ``x`` is sent to a side of ``y`` whose projection moves
    the same way; the formula there is the inverse branch of ``pi_dst``
    after ``pi_src``.  Combinations that leave the fragment are reported.
    """
    gs, gd = germ_at(pi_src, x), germ_at(pi_dst, y)
    escapes = []
    options = {}
    for s in (-1, 1):
        f = gs.side(s)
        if f is None:
            options[s] = [None]
            continue
        t = image_side(f, x, s)
        opts = []
        for sigma in (1, -1):
            d = gd.side(sigma)
            if d is None or t == 0 or image_side(d, y, sigma) != t:
                continue
            c = sigma if y == d.center else (1 if y > d.center else -1)
            try:
                form = compose_forms(inverse_form(d, c), f)
            except NotInFragment as exc:
                escapes.append(str(exc))
                continue
            opts.append(side_normalize(form, x, s))
        options[s] = opts
    germs = [Germ(x, left, y, right) for left, right in product(options[-1], options[1])]
    return germs, escapes


def _radius(germ: Germ, domain: Interval, pi_src: PiecewiseFn) -> Fraction:
    x = germ.base
    ds = [Fraction(1)]
    for b in (domain.lo, domain.hi):
        if not isinstance(b, float):
            ds.append(abs(x - b))
    for f in (germ.left, germ.right):
        if f is not None and not f.is_affine and f.center != x:
            ds.append(abs(f.center - x))
    for p in pi_src.breakpoints() + pi_src.centers():
        if not isinstance(p, float) and p != x:
            ds.append(abs(p - x))
    return min(ds) / 2


def _candidate(germ: Germ, domain: Interval, pi_src: PiecewiseFn, pi_dst: PiecewiseFn) -> Candidate:
    r = _radius(germ, domain, pi_src)
    fn = from_germ(germ, r).restrict(domain)
    for _ in range(16):
        try:
            if compose(pi_dst, fn) == pi_src.restrict(fn.domain):
                break
        except NotInFragment:
            pass
        r /= 2
        fn = from_germ(germ, r).restrict(domain)
    return Candidate(germ, fn, is_diffeomorphism(fn))


def candidates_at(src: Chart, x, dst: Chart, y) -> tuple[list[Candidate], list[str]]:
    germs, escapes = branch_germs(src.proj, x, dst.proj, y)
    return [_candidate(g, src.domain, src.proj, dst.proj) for g in germs], escapes


def fiber_pairs(a: Chart, b: Chart) -> list[tuple[Fraction, Fraction]]:
    """Probe pairs ``(x, y)`` in ``V_b x V_a`` with equal projections."""
    xs = set(probe_points(b))
    for y in probe_points(a):
        q = a.proj(y)
        if isinstance(q, Fraction):
            xs.update(fiber(b, q))
    pairs = set()
    for x in xs:
        q = b.proj(x)
        if not isinstance(q, Fraction):
            continue
        for y in fiber(a, q):
            pairs.add((x, y))
    return sorted(pairs)


@lru_cache(maxsize=4096)
def charts_compatible(a: Chart, b: Chart) -> Compatible | Incompatible | CompatUnknown:
    """Decide compatibility on the probe grid via changes of charts ``V_b -> V_a``."""
    witnesses = []
    unknown = None
    for x, y in fiber_pairs(a, b):
        cands, escapes = candidates_at(b, x, a, y)
        good = [c for c in cands if c.verdict]
        if good:
            witnesses.append((x, y, good[0].fn))
            continue
        if escapes:
            unknown = unknown or CompatUnknown(x, y, escapes[0])
            continue
        reverse, _ = candidates_at(a, y, b, x)
        return Incompatible(Certificate(x, y, tuple(cands), tuple(reverse)))
    if unknown is not None:
        return unknown
    return Compatible(tuple(witnesses))


# ---------------------------------------------------------------- atlases


def validate_atlas(a: Atlas, depth_cap: int = 8) -> ValidationReport:
    rb = ReportBuilder()
    ids = a.ids()
    if len(set(ids)) != len(ids):
        rb.fail("ids", "duplicate chart ids")
    for c in a.charts:
        rb.extend(validate_chart(c, a.space), prefix=f"chart {c.id}: ")
    cover = DomainSet.of(iv for c in a.charts for iv in c.image())
    if cover != a.space.carrier:
        rb.fail("cover", f"charts cover {cover}, not {a.space.carrier}")
    for e in a.witnesses:
        rb.extend(validate_embedding(e, a), prefix=f"witness {e.source}->{e.target}: ")
    for i, ci in enumerate(a.charts):
        for cj in a.charts[i:]:
            res = charts_compatible(ci, cj)
            if isinstance(res, Incompatible):
                rb.fail("compatible", f"{ci.id}, {cj.id}: {res.text()}")
            elif isinstance(res, CompatUnknown):
                rb.unknown("compatible", f"{ci.id}, {cj.id}: {res.text()}")
    if rb.build().failures:
        return rb.build()
    from orbifoldkit.groupoid import generation_check, validate_quasi_pseudogroup, atlas_generators

    qpg = atlas_generators(a)
    rb.extend(validate_quasi_pseudogroup(qpg), prefix="generators: ")
    rb.extend(generation_check(a, depth_cap=depth_cap), prefix="generation: ")
    return rb.build()
