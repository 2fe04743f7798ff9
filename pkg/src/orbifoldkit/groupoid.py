"""Atlas groupoids: generators of Psi(V), germ arrows, markings, homomorphisms.

Arrows are germs of words in a finite generator list.  They are enumerated
by breadth-first saturation over word length; a search that is still
growing at the length cap reports ``DepthCapped`` instead of pretending to
be complete.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from orbifoldkit.charts import (
    Atlas,
    Chart,
    Embedding,
    Space,
    candidates_at,
    fiber,
    fiber_pairs,
    fundamental_domain,
    probe_points,
)
from orbifoldkit.errors import DepthCapped, InvalidAtlas, MalformedInput, NotInFragment
from orbifoldkit.report import ReportBuilder, ValidationReport
from orbifoldkit.symfun import (
    DomainSet,
    Germ,
    Interval,
    PiecewiseFn,
    compose,
    germ_at,
    identity_germ,
    invert,
    is_smooth,
    parse_fn,
    parse_interval,
)
from orbifoldkit.symfun.values import compare, fmt_frac

DEFAULT_DEPTH_CAP = 8


@dataclass(frozen=True, order=True)
class ObjPoint:
    chart: str
    x: Fraction

    def text(self) -> str:
        return f"{self.chart}:{fmt_frac(self.x)}"


@dataclass(frozen=True)
class Transition:
    """A transition between chart domains of the disjoint union."""

    source: str
    target: str
    fn: PiecewiseFn
    name: str = field(default="", compare=False)

    def defined_at(self, p: ObjPoint) -> bool:
        return p.chart == self.source and self.fn.domain.contains(p.x)

    def germ(self, x) -> Germ:
        return _germ(self.fn, x)

    def inverse(self) -> Transition:
        name = f"inv({self.name})" if self.name else ""
        return Transition(self.target, self.source, invert(self.fn), name)

    def text(self) -> str:
        return f"{self.source}->{self.target}: {self.fn.text()}"


@lru_cache(maxsize=65536)
def _germ(fn: PiecewiseFn, x) -> Germ:
    return germ_at(fn, x)


@dataclass(frozen=True)
class GermArrow:
    source: ObjPoint
    target: ObjPoint
    germ: Germ

    def text(self) -> str:
        return f"{self.source.text()} -> {self.target.text()} {self.germ.text()}"


@dataclass(frozen=True)
class QuasiPseudogroup:
    elements: tuple[Transition, ...]

    def from_chart(self, chart: str) -> tuple[Transition, ...]:
        return tuple(t for t in self.elements if t.source == chart)


@dataclass(frozen=True)
class Saturation:
    arrows: tuple[GermArrow, ...]
    words: tuple[tuple[int, ...], ...]
    status: str  # "Saturated" or "DepthCapped"

    @property
    def saturated(self) -> bool:
        return self.status == "Saturated"


@dataclass(frozen=True)
class MarkedAtlasGroupoid:
    atlas: Atlas
    generators: QuasiPseudogroup

    @property
    def space(self) -> Space:
        return self.atlas.space

    def chart(self, cid: str) -> Chart:
        return self.atlas.chart(cid)

    def objects(self) -> list[ObjPoint]:
        return [ObjPoint(c.id, x) for c in self.atlas.charts for x in probe_points(c)]


# ---------------------------------------------------------------- arrows


def unit(p: ObjPoint) -> GermArrow:
    return GermArrow(p, p, identity_germ(p.x))


def multiply(g: GermArrow, f: GermArrow) -> GermArrow:
    """``g . f`` (first ``f``, then ``g``)."""
    if g.source != f.target:
        raise ValueError("arrows are not composable")
    return GermArrow(f.source, g.target, f.germ.then(g.germ))


def inverse(f: GermArrow) -> GermArrow:
    return GermArrow(f.target, f.source, f.germ.inverse())


def apply_word(generators: tuple[Transition, ...], start: ObjPoint,
               word: Iterable[int]) -> GermArrow:
    arrow = unit(start)
    for i in word:
        t = generators[i]
        if not t.defined_at(arrow.target):
            raise ValueError("word leaves the generator domains")
        g = t.germ(arrow.target.x)
        arrow = GermArrow(start, ObjPoint(t.target, g.value), arrow.germ.then(g))
    return arrow


@lru_cache(maxsize=4096)
def saturate(generators: tuple[Transition, ...], start: ObjPoint,
             depth_cap: int = DEFAULT_DEPTH_CAP) -> Saturation:
    """All germ arrows out of ``start`` reachable by generator words."""
    first = unit(start)
    seen = {(first.target, first.germ): ()}
    arrows = [first]
    frontier = deque([(first, ())])
    depth = 0
    while frontier and depth < depth_cap:
        depth += 1
        nxt = deque()
        for arrow, word in frontier:
            for new, w in _extend(generators, arrow, word):
                key = (new.target, new.germ)
                if key not in seen:
                    seen[key] = w
                    arrows.append(new)
                    nxt.append((new, w))
        frontier = nxt
    status = "Saturated"
    if frontier:
        for arrow, word in frontier:
            if any((n.target, n.germ) not in seen for n, _ in _extend(generators, arrow, word)):
                status = "DepthCapped"
                break
    words = tuple(seen[(a.target, a.germ)] for a in arrows)
    return Saturation(tuple(arrows), words, status)


def _extend(generators, arrow: GermArrow, word):
    for i, t in enumerate(generators):
        if not t.defined_at(arrow.target):
            continue
        g = t.germ(arrow.target.x)
        yield GermArrow(arrow.source, ObjPoint(t.target, g.value), arrow.germ.then(g)), word + (i,)


def arrows_between(G: MarkedAtlasGroupoid, x: ObjPoint, y: ObjPoint,
                   depth_cap: int = DEFAULT_DEPTH_CAP, strict: bool = True) -> tuple[frozenset, str]:
    """The arrows ``x -> y`` and the saturation status."""
    sat = saturate(G.generators.elements, x, depth_cap)
    if strict and not sat.saturated:
        raise DepthCapped(depth_cap)
    return frozenset(a for a in sat.arrows if a.target == y), sat.status


def orbit(G: MarkedAtlasGroupoid, x: ObjPoint, depth_cap: int = DEFAULT_DEPTH_CAP,
          strict: bool = True) -> frozenset:
    sat = saturate(G.generators.elements, x, depth_cap)
    if strict and not sat.saturated:
        raise DepthCapped(depth_cap)
    return frozenset(a.target for a in sat.arrows)


def marking_value(G: MarkedAtlasGroupoid, x: ObjPoint):
    return G.chart(x.chart).proj(x.x)


# ---------------------------------------------------------------- generators


def _domain_probes(fn: PiecewiseFn, extra: Iterable[Fraction] = ()) -> list[Fraction]:
    pts = set(x for x in extra if fn.domain.contains(x))
    for iv in fn.domain:
        pts.add(iv.midpoint())
    pts.update(x for x in fn.breakpoints() + fn.centers() if fn.domain.contains(x))
    return sorted(pts)


def atlas_generators(a: Atlas) -> QuasiPseudogroup:
    """Chart group elements, witness transitions and the witnesses' inverses."""
    out: list[Transition] = []
    for c in a.charts:
        for k, g in enumerate(c.group):
            out.append(Transition(c.id, c.id, g, _group_name(g, c, k)))
    for e in a.witnesses:
        t = Transition(e.source, e.target, e.map, f"w:{e.source}->{e.target}")
        out.append(t)
        out.append(t.inverse())
    return QuasiPseudogroup(_dedupe(out))


def _group_name(g: PiecewiseFn, c: Chart, k: int) -> str:
    if g == PiecewiseFn.identity(c.domain):
        return "id"
    if g == PiecewiseFn.affine(-1, 0, c.domain):
        return "-id"
    return f"g{k}"


def _dedupe(ts: Iterable[Transition]) -> tuple[Transition, ...]:
    seen = set()
    out = []
    for t in ts:
        key = (t.source, t.target, t.fn)
        if key not in seen and not t.fn.is_empty:
            seen.add(key)
            out.append(t)
    return tuple(out)


def _qpg_gaps(P: QuasiPseudogroup, probes: dict[str, list[Fraction]] | None = None):
    """Missing local inverses and composites, as transitions that would fill them."""
    missing = []
    els = P.elements
    for f in els:
        extra = probes.get(f.source, []) if probes else []
        for x in _domain_probes(f.fn, extra):
            gf = f.germ(x)
            y = gf.value
            if not isinstance(y, Fraction):
                continue
            try:
                inv = gf.inverse()
            except Exception:  # noqa: BLE001 - a non-invertible germ has no local inverse
                missing.append(("inverse", f, None, x))
                continue
            if not any(g.source == f.target and g.target == f.source
                       and g.fn.domain.contains(y) and g.germ(y) == inv for g in els):
                missing.append(("inverse", f, None, x))
            for g in els:
                if g.source != f.target or not g.fn.domain.contains(y):
                    continue
                comp = gf.then(g.germ(y))
                if not any(h.source == f.source and h.target == g.target
                           and h.fn.domain.contains(x) and h.germ(x) == comp for h in els):
                    missing.append(("composite", f, g, x))
    return missing


def validate_quasi_pseudogroup(P: QuasiPseudogroup,
                               probes: dict[str, list[Fraction]] | None = None) -> ValidationReport:
    rb = ReportBuilder()
    for kind, f, g, x in _qpg_gaps(P, probes):
        if kind == "inverse":
            rb.fail("inverse", f"no local inverse of {f.text()} at {fmt_frac(x)}")
        else:
            rb.fail("composite", f"no element with the germ of ({g.text()}) o ({f.text()}) "
                                 f"at {fmt_frac(x)}")
    return rb.build()


@lru_cache(maxsize=1024)
def psi_generators(a: Atlas, max_rounds: int = 6) -> QuasiPseudogroup:
    """Close the atlas generators under the local inverses and composites they need."""
    P = atlas_generators(a)
    probes = {c.id: probe_points(c) for c in a.charts}
    for _ in range(max_rounds):
        gaps = _qpg_gaps(P, probes)
        if not gaps:
            return P
        new = list(P.elements)
        for kind, f, g, _x in gaps:
            try:
                if kind == "inverse":
                    new.append(f.inverse())
                else:
                    new.append(Transition(f.source, g.target, compose(g.fn, f.fn)))
            except NotInFragment as exc:
                raise InvalidAtlas(f"generator closure left the fragment: {exc}") from exc
        P = QuasiPseudogroup(_dedupe(new))
    if _qpg_gaps(P, probes):
        raise InvalidAtlas("generator closure did not stabilise")
    return P


def build_groupoid(a: Atlas) -> MarkedAtlasGroupoid:
    return MarkedAtlasGroupoid(a, psi_generators(a))


def change_of_chart_germs(a: Atlas, x: ObjPoint, y: ObjPoint) -> tuple[list[Germ], list[str]]:
    """All diffeomorphic changes of charts at ``(x, y)``, enumerated by branch inversion."""
    cands, escapes = candidates_at(a.chart(x.chart), x.x, a.chart(y.chart), y.x)
    return [c.germ for c in cands if c.verdict], escapes


def generation_check(a: Atlas, depth_cap: int = DEFAULT_DEPTH_CAP,
                     generators: QuasiPseudogroup | None = None) -> ValidationReport:
    """Every change-of-charts germ at a probe fiber pair is a generated arrow."""
    rb = ReportBuilder()
    P = generators or psi_generators(a)
    for ca in a.charts:
        for cb in a.charts:
            for x, y in fiber_pairs(cb, ca):
                src, dst = ObjPoint(ca.id, x), ObjPoint(cb.id, y)
                germs, escapes = change_of_chart_germs(a, src, dst)
                if escapes:
                    rb.unknown("fragment", f"at {src.text()}, {dst.text()}: {escapes[0]}")
                sat = saturate(P.elements, src, depth_cap)
                have = {ar.germ for ar in sat.arrows if ar.target == dst}
                for g in germs:
                    if g not in have:
                        msg = f"change of charts {g.text()} from {src.text()} to {dst.text()}"
                        if not sat.saturated:
                            msg += " (search depth capped)"
                        rb.unknown("generated", msg)
    return rb.build()


# ---------------------------------------------------------------- homomorphisms


@dataclass(frozen=True)
class ObjComponent:
    source: str
    target: str
    fn: PiecewiseFn


@dataclass(frozen=True)
class GroupoidHom:
    """``phi_0`` per source chart plus ``nu`` on a generating set of source transitions."""

    obj_map: tuple[ObjComponent, ...]
    arrow_map: tuple[tuple[Transition, Transition], ...]

    def text(self) -> str:
        lines = ["hom"]
        lines += [f"obj {c.source} -> {c.target} = {c.fn.text()}" for c in self.obj_map]
        lines += [f"arrow {lam.text()} => {mu.text()}" for lam, mu in self.arrow_map]
        return "\n".join(lines) + "\n"

    def component(self, chart: str) -> ObjComponent:
        for c in self.obj_map:
            if c.source == chart:
                return c
        raise KeyError(chart)

    @property
    def generators(self) -> tuple[Transition, ...]:
        return tuple(lam for lam, _ in self.arrow_map)

    def nu(self, lam: Transition) -> Transition:
        for a, b in self.arrow_map:
            if a == lam:
                return b
        raise KeyError(lam.text())

    def on_object(self, p: ObjPoint) -> ObjPoint:
        c = self.component(p.chart)
        v = c.fn(p.x)
        if not isinstance(v, Fraction):
            raise NotInFragment(f"image of {p.text()} is irrational")
        return ObjPoint(c.target, v)

    def on_generator_germ(self, lam: Transition, x) -> GermArrow:
        p = ObjPoint(lam.source, x)
        q = self.on_object(p)
        mu = self.nu(lam)
        g = mu.germ(q.x)
        return GermArrow(q, ObjPoint(mu.target, g.value), g)

    def on_arrow(self, arrow: GermArrow, depth_cap: int = DEFAULT_DEPTH_CAP) -> GermArrow:
        """Image of an arrow, via any generator word with the same germ."""
        gens = self.generators
        sat = saturate(gens, arrow.source, depth_cap)
        for a, w in zip(sat.arrows, sat.words):
            if a.target == arrow.target and a.germ == arrow.germ:
                out = unit(self.on_object(arrow.source))
                x = arrow.source
                for i in w:
                    lam = gens[i]
                    step = self.on_generator_germ(lam, x.x)
                    out = multiply(step, out)
                    x = ObjPoint(lam.target, lam.germ(x.x).value)
                return out
        raise KeyError(f"{arrow.text()} is not generated by the homomorphism's generators")


def _probe_germs(h: GroupoidHom, src: MarkedAtlasGroupoid):
    probes = {c.id: probe_points(c) for c in src.atlas.charts}
    for lam in h.generators:
        for x in _domain_probes(lam.fn, probes.get(lam.source, [])):
            yield lam, x


def validate_hom(h: GroupoidHom, src: MarkedAtlasGroupoid, dst: MarkedAtlasGroupoid) -> ValidationReport:
    rb = ReportBuilder()
    for c in src.atlas.charts:
        try:
            comp = h.component(c.id)
        except KeyError:
            rb.fail("objects", f"no component for chart {c.id}")
            continue
        try:
            tgt = dst.chart(comp.target)
        except KeyError:
            rb.fail("objects", f"unknown target chart {comp.target}")
            continue
        if comp.fn.domain != DomainSet.of([c.domain]):
            rb.fail("objects", f"component on {comp.fn.domain}, chart domain {c.domain}")
        sm = is_smooth(comp.fn)
        if not sm:
            rb.fail("objects.smooth", f"{c.id}: {sm.text()}")
        if not comp.fn.image().subset_of(tgt.domain):
            rb.fail("objects.image", f"{c.id}: image {comp.fn.image()} not in {tgt.domain}")
    if rb.build().failures:
        return rb.build()
    for lam, mu in h.arrow_map:
        if (h.component(lam.source).target != mu.source
                or h.component(lam.target).target != mu.target):
            rb.fail("arrows.charts", f"nu({lam.text()}) connects the wrong charts")
            continue
        phi_s = h.component(lam.source).fn
        phi_t = h.component(lam.target).fn
        try:
            lhs = compose(phi_t, lam.fn)
            rhs = compose(mu.fn, phi_s.restrict(lam.fn.domain))
            if lhs != rhs:
                rb.fail("arrows.equivariance", f"phi o {lam.text()} != nu(lam) o phi")
        except NotInFragment as exc:
            rb.unknown("arrows.equivariance", str(exc))
    if rb.build().failures:
        return rb.build()
    rb.extend(_germ_laws(h, src))
    return rb.build()


def _germ_laws(h: GroupoidHom, src: MarkedAtlasGroupoid) -> ValidationReport:
    """Well-definedness, unit, multiplicativity and inverses on probe germs."""
    rb = ReportBuilder()
    gens = h.generators
    for lam, x in _probe_germs(h, src):
        p = ObjPoint(lam.source, x)
        gl = lam.germ(x)
        img = h.on_generator_germ(lam, x)
        if lam.source == lam.target and gl == identity_germ(x) and img.germ != identity_germ(img.source.x):
            rb.fail("unit", f"nu({lam.name or lam.text()}) at {fmt_frac(x)} is not a unit germ")
        y = gl.value
        if not isinstance(y, Fraction):
            continue
        q = ObjPoint(lam.target, y)
        for kap in gens:
            if kap.source == lam.source and kap.target == lam.target and kap.fn.domain.contains(x) \
                    and kap.germ(x) == gl and h.on_generator_germ(kap, x) != img:
                rb.fail("well-defined", f"{lam.name or 'lam'} and {kap.name or 'kap'} share a germ "
                                        f"at {fmt_frac(x)} but their images differ")
        for mu in gens:
            if not mu.defined_at(q):
                continue
            comp = gl.then(mu.germ(y))
            expected = multiply(h.on_generator_germ(mu, y), img)
            for kap in gens:
                if kap.source == lam.source and kap.target == mu.target and kap.fn.domain.contains(x) \
                        and kap.germ(x) == comp and h.on_generator_germ(kap, x) != expected:
                    rb.fail("multiplicative", f"at {fmt_frac(x)}: nu does not respect a composite")
        inv = gl.inverse()
        for kap in gens:
            if kap.source == lam.target and kap.target == lam.source and kap.fn.domain.contains(y) \
                    and kap.germ(y) == inv and h.on_generator_germ(kap, y) != inverse(img):
                rb.fail("inverse", f"at {fmt_frac(x)}: nu does not respect an inverse")
    return rb.build()


def germs_agree_on(kappa: Transition, xi: Transition, region: DomainSet) -> bool:
    """Whether ``xi`` has the germ of ``kappa`` at every point of ``region``."""
    if (kappa.source, kappa.target) != (xi.source, xi.target) or region.is_empty:
        return False
    if not region.subset_of(xi.fn.domain) or not region.subset_of(kappa.fn.domain):
        return False
    for iv in region:
        if iv.is_point:
            ends = [iv.lo]
        else:
            if kappa.fn.restrict(iv) != xi.fn.restrict(iv):
                return False
            ends = [b for b, is_open in ((iv.lo, iv.lo_open), (iv.hi, iv.hi_open)) if not is_open]
        if any(kappa.germ(p) != xi.germ(p) for p in ends):
            return False
    return True


def _probe_windows(lam: Transition, phi: PiecewiseFn) -> list[Interval]:
    """Open windows around probe points of ``dom lam``; neighbouring windows overlap."""
    extra = [x for x in phi.breakpoints() + phi.centers()]
    pts = _domain_probes(lam.fn, extra)
    out = []
    for iv in lam.fn.domain:
        inside = [x for x in pts if iv.contains(x)]
        seq = [iv.lo] + inside + [iv.hi]
        for i in range(len(inside)):
            out.append(Interval(seq[i], seq[i + 2], True, True).intersect(iv))
    return [w for w in out if w is not None]


def transport(phi_s: PiecewiseFn, lam: Transition, mu: Transition,
              outer: tuple[tuple[Transition, Transition], ...]) -> list[tuple[Transition, Transition]]:
    """Push ``(lam, mu)`` through an outer assignment by germ matching.

    ``mu`` is replaced by the first outer generator having its germs on
    ``phi_s(dom lam)``.  If no single generator does, ``lam`` is cut into
    overlapping windows around its probe points and each window is matched
    separately.
    """
    region = phi_s.restrict(lam.fn.domain).image()
    for xi, img in outer:
        if germs_agree_on(mu, xi, region):
            return [(lam, img)]
    out = []
    for w in _probe_windows(lam, phi_s):
        piece = Transition(lam.source, lam.target, lam.fn.restrict(w), lam.name)
        region = phi_s.restrict(w).image()
        for xi, img in outer:
            if germs_agree_on(mu, xi, region):
                out.append((piece, img))
                break
        else:
            raise NotInFragment(f"no generator has the germs of {mu.text()} on {region}")
    return out


def compose_homs(g: GroupoidHom, f: GroupoidHom) -> GroupoidHom:
    """``g o f``; images of ``f``'s generators are matched to ``g``'s generators germ-wise."""
    objs = tuple(ObjComponent(c.source, g.component(c.target).target,
                              compose(g.component(c.target).fn, c.fn)) for c in f.obj_map)
    arrows = []
    for lam, mu in f.arrow_map:
        arrows.extend(transport(f.component(lam.source).fn, lam, mu, g.arrow_map))
    return GroupoidHom(objs, tuple(arrows))


def close_assignment(pairs: Iterable[tuple[Transition, Transition]],
                     probes: dict[str, list[Fraction]] | None = None,
                     max_rounds: int = 6) -> tuple[tuple[Transition, Transition], ...]:
    """Add the local inverses and composites a quasi-pseudogroup needs.

    The assignment is extended along: inverses go to inverses and
    composites to composites.
    """
    table: dict[Transition, Transition] = {}
    for lam, mu in pairs:
        if not lam.fn.is_empty:
            table.setdefault(lam, mu)
    for _ in range(max_rounds):
        gaps = _qpg_gaps(QuasiPseudogroup(tuple(table)), probes)
        if not gaps:
            break
        for kind, f, g, _x in gaps:
            if kind == "inverse":
                table.setdefault(f.inverse(), table[f].inverse())
            else:
                lam = Transition(f.source, g.target, compose(g.fn, f.fn))
                mu = table[g]
                nu_f = table[f]
                table.setdefault(lam, Transition(nu_f.source, mu.target, compose(mu.fn, nu_f.fn)))
    return tuple(table.items())


def hom_germ_table(h: GroupoidHom, src: MarkedAtlasGroupoid) -> dict:
    """``(lam, x) -> image arrow`` on all probe germs of the generators."""
    return {(lam, x): h.on_generator_germ(lam, x) for lam, x in _probe_germs(h, src)}


def induced_orbit_map(h: GroupoidHom, src: MarkedAtlasGroupoid,
                      dst: MarkedAtlasGroupoid) -> tuple[PiecewiseFn, bool]:
    """The map ``Q -> Q'`` induced on orbit spaces, and whether the square commutes on probes."""
    covered = DomainSet.empty()
    pieces: list[PiecewiseFn] = []
    for c in src.atlas.charts:
        comp = h.component(c.id)
        tgt = dst.chart(comp.target)
        section = invert(c.proj.restrict(c.fundamental))
        f = compose(tgt.proj, compose(comp.fn, section))
        fresh = f.domain.difference(covered)
        if not fresh.is_empty:
            pieces.append(f.restrict(fresh))
            covered = covered.union(fresh)
    f = PiecewiseFn(tuple(p for fn in pieces for p in fn.pieces))
    ok = True
    for c in src.atlas.charts:
        comp = h.component(c.id)
        tgt = dst.chart(comp.target)
        for x in probe_points(c):
            if compare(f(c.proj(x)), tgt.proj(comp.fn(x))) != 0:
                ok = False
    return f, ok


# ---------------------------------------------------------------- serialization


def canonical_chart_order(a: Atlas) -> list[Chart]:
    return sorted(a.charts, key=lambda c: (c.domain.sort_key(), c.proj.text(),
                                           tuple(sorted(g.text() for g in c.group))))


def serialize(G: MarkedAtlasGroupoid, marked: bool = True) -> str:
    """Deterministic text of a (marked) atlas groupoid with charts renamed ``c0, c1, ...``."""
    order = canonical_chart_order(G.atlas)
    names = {c.id: f"c{i}" for i, c in enumerate(order)}
    lines = ["groupoid"]
    if marked:
        lines.append(f"space {G.space.carrier}")
    for c in order:
        lines.append(f"object {names[c.id]} = {c.domain}")
        if marked:
            lines.append(f"marking {names[c.id]} = {c.proj.text()}")
    arrows = sorted(f"arrow {names[t.source]} {names[t.target]} = {t.fn.text()}"
                    for t in G.generators.elements)
    lines.extend(arrows)
    return "\n".join(lines) + "\n"


def recover_atlas(text: str) -> Atlas:
    """Rebuild the atlas from a serialized marked groupoid."""
    from orbifoldkit.symfun import parse_domain

    space = None
    domains: dict[str, Interval] = {}
    marks: dict[str, PiecewiseFn] = {}
    arrows: list[Transition] = []
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "groupoid":
        raise MalformedInput("missing 'groupoid' header")
    try:
        for ln in lines[1:]:
            head, _, rest = ln.partition(" ")
            if head == "space":
                space = Space(parse_domain(rest))
            elif head == "object":
                cid, _, iv = rest.partition(" = ")
                domains[cid] = parse_interval(iv)
            elif head == "marking":
                cid, _, fn = rest.partition(" = ")
                marks[cid] = parse_fn(fn)
            elif head == "arrow":
                ids, _, fn = rest.partition(" = ")
                s, t = ids.split()
                arrows.append(Transition(s, t, parse_fn(fn)))
            else:
                raise MalformedInput(f"unexpected line {ln!r}")
    except (ValueError, KeyError) as exc:
        raise MalformedInput(str(exc)) from exc
    if space is None:
        raise MalformedInput("unmarked groupoid: no space/marking lines")
    if set(domains) != set(marks):
        raise MalformedInput("every object needs a marking")
    charts = []
    for cid, v in domains.items():
        whole = DomainSet.of([v])
        group = tuple(sorted({t.fn for t in arrows if t.source == cid and t.target == cid
                              and t.fn.domain == whole and t.fn.image() == whole},
                             key=lambda f: f.text()))
        charts.append(Chart(cid, v, group, marks[cid], fundamental_domain(v, group)))
    witnesses = tuple(Embedding(t.source, t.target, t.fn) for t in arrows if t.source != t.target)
    return Atlas(tuple(charts), witnesses, space)


def atlas_canonical_text(a: Atlas) -> str:
    """Charts only (domain, group, projection), ids renamed in canonical order."""
    order = canonical_chart_order(a)
    lines = [f"space {a.space.carrier}"]
    for i, c in enumerate(order):
        group = " ; ".join(sorted(g.text() for g in c.group))
        lines.append(f"chart c{i} domain={c.domain} proj={c.proj.text()} group=[{group}]")
    return "\n".join(lines) + "\n"


def atlases_equal(a: Atlas, b: Atlas) -> bool:
    return atlas_canonical_text(a) == atlas_canonical_text(b)


def fiber_points(G: MarkedAtlasGroupoid, q) -> list[ObjPoint]:
    return [ObjPoint(c.id, x) for c in G.atlas.charts for x in fiber(c, q)]


def isotropy(G: MarkedAtlasGroupoid, x: ObjPoint, depth_cap: int = DEFAULT_DEPTH_CAP) -> frozenset:
    return arrows_between(G, x, x, depth_cap)[0]
