"""Charted orbifold maps and their atlas-groupoid counterparts.

A representative ``(f, lifts, P, nu)`` carries a continuous map of the
underlying spaces, one local lift per domain chart, a generating set ``P``
of changes of charts of the domain atlas, and for each ``lam`` in ``P`` a
change of charts ``nu(lam)`` of the range atlas with
``lift_t o lam = nu(lam) o lift_s``.  ``to_hom`` and ``from_hom`` convert
between representatives and groupoid homomorphisms.

Equivalence of charted maps is only semi-decidable here: witnesses are
verified exactly, but the search for one can come back empty-handed, and
an empty search proves nothing.  ``refute_hom_equivalence`` is the
separate, sound route to a definite "not equivalent".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import islice, product
from typing import Mapping, Sequence, Union

from orbifoldkit.charts import (
    Atlas,
    Chart,
    Compatible,
    Embedding,
    charts_compatible,
    fiber,
    probe_points,
)
from orbifoldkit.errors import (
    AtlasChainMismatch,
    AtlasMismatch,
    ImageNotContained,
    NotInFragment,
    NotInjective,
    NotLocalDiffeo,
    RangeFamilyNotContained,
    RefinementFailed,
)
from orbifoldkit.groupoid import (
    DEFAULT_DEPTH_CAP,
    GroupoidHom,
    MarkedAtlasGroupoid,
    ObjComponent,
    ObjPoint,
    QuasiPseudogroup,
    Transition,
    _domain_probes,
    arrows_between,
    close_assignment,
    compose_homs,
    generation_check,
    induced_orbit_map,
    orbit,
    psi_generators,
    saturate,
    validate_hom,
    validate_quasi_pseudogroup,
)
from orbifoldkit.refinement import (
    chart_changes,
    common_refinement,
    pullback,
    pullback_atlas,
    select_cover,
    stable_pieces,
)
from orbifoldkit.report import ReportBuilder, ValidationReport
from orbifoldkit.symfun import (
    DomainSet,
    PiecewiseFn,
    compose,
    germ_at,
    invert,
    is_diffeomorphism,
    is_local_diffeomorphism,
    is_smooth,
)
from orbifoldkit.symfun.forms import derivative_at
from orbifoldkit.symfun.values import exact_eq, fmt_frac


@dataclass(frozen=True)
class LocalLift:
    fn: PiecewiseFn
    src_chart: str
    dst_chart: str

    def text(self) -> str:
        return f"lift {self.src_chart} -> {self.dst_chart} = {self.fn.text()}"


@dataclass(frozen=True)
class MapRep:
    f: PiecewiseFn
    lifts: tuple[LocalLift, ...]
    domain: Atlas
    range: Atlas
    P: QuasiPseudogroup
    nu: tuple[tuple[Transition, Transition], ...]

    def lift(self, chart: str) -> LocalLift:
        for lift in self.lifts:
            if lift.src_chart == chart:
                return lift
        raise KeyError(chart)

    def nu_of(self, lam: Transition) -> Transition:
        for a, b in self.nu:
            if a == lam:
                return b
        raise KeyError(lam.text())

    def text(self) -> str:
        lines = ["rep", f"f = {self.f.text()}"]
        lines += [lift.text() for lift in self.lifts]
        lines += [f"nu {lam.text()} => {mu.text()}" for lam, mu in self.nu]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ChartedMap:
    """A representative standing for its class of equivalent representatives."""

    rep: MapRep

    @property
    def domain_id(self) -> str:
        return self.rep.domain.id

    @property
    def range_id(self) -> str:
        return self.rep.range.id

    def text(self) -> str:
        return self.rep.text()


MapLike = Union[MapRep, ChartedMap]


def _rep(m: MapLike) -> MapRep:
    return m.rep if isinstance(m, ChartedMap) else m


@dataclass(frozen=True)
class EquivalenceWitness:
    """Identity lifts ``eps1, eps2`` out of ``W``, ``eps1p, eps2p`` out of ``W'``, and ``bridge: W -> W'``."""

    eps1: ChartedMap
    eps2: ChartedMap
    eps1p: ChartedMap
    eps2p: ChartedMap
    bridge: ChartedMap

    def mirrored(self) -> EquivalenceWitness:
        return EquivalenceWitness(self.eps2, self.eps1, self.eps2p, self.eps1p, self.bridge)


@dataclass(frozen=True)
class Unknown:
    reason: str

    def __bool__(self):
        return False

    def text(self) -> str:
        return f"Unknown({self.reason})"


# ---------------------------------------------------------------- checks


def _discontinuity(f: PiecewiseFn):
    for p in f.breakpoints():
        if not f.domain.contains(p):
            continue
        g = germ_at(f, p)
        for s in (-1, 1):
            form = g.side(s)
            if form is not None and not exact_eq(derivative_at(form, p, s, 0), g.value):
                return p
    return None


def verify_local_lift(lift: PiecewiseFn, f: PiecewiseFn, c: Chart, c_range: Chart) -> ValidationReport:
    """``pi' o lift = f o pi`` on the chart, and ``lift`` is smooth."""
    rb = ReportBuilder()
    if lift.domain != DomainSet.of([c.domain]):
        rb.fail("domain", f"lift is defined on {lift.domain}, chart on {c.domain}")
    if not lift.image().subset_of(c_range.domain):
        rb.fail("image", f"{lift.image()} is not inside {c_range.domain}")
    else:
        try:
            if compose(c_range.proj, lift) != compose(f, c.proj):
                rb.fail("commutes", f"proj' o lift differs from f o proj on {c.id}")
        except NotInFragment as exc:
            rb.unknown("commutes", str(exc))
    sm = is_smooth(lift)
    if not sm:
        rb.fail("smooth", sm.text())
    return rb.build()


def _check_change_of_charts(t: Transition, atlas: Atlas, rb: ReportBuilder, check: str) -> None:
    try:
        src, dst = atlas.chart(t.source), atlas.chart(t.target)
    except KeyError as k:
        rb.fail(check, f"unknown chart {k}")
        return
    label = t.name or t.text()
    if t.fn.is_empty or not t.fn.domain.subset_of(src.domain):
        rb.fail(check, f"{label}: domain {t.fn.domain} is not inside {src.domain}")
        return
    d = is_diffeomorphism(t.fn)
    if not d:
        rb.fail(check, f"{label}: {d.text()}")
        return
    if not t.fn.image().subset_of(dst.domain):
        rb.fail(check, f"{label}: image {t.fn.image()} is not inside {dst.domain}")
        return
    try:
        if compose(dst.proj, t.fn) != src.proj.restrict(t.fn.domain):
            rb.fail(check, f"{label} does not commute with the projections")
    except NotInFragment as exc:
        rb.unknown(check, str(exc))


def validate_representative(m: MapLike, depth_cap: int = DEFAULT_DEPTH_CAP) -> ValidationReport:
    r = _rep(m)
    rb = ReportBuilder()
    q, q2 = r.domain.space.carrier, r.range.space.carrier
    # R1
    if r.f.domain != q:
        rb.fail("R1", f"f is defined on {r.f.domain}, not on {q}")
    elif not r.f.image().subset_of(q2):
        rb.fail("R1", f"f(Q) = {r.f.image()} is not inside {q2}")
    p = _discontinuity(r.f)
    if p is not None:
        rb.fail("R1", f"f is not continuous at {fmt_frac(p)}")
    # R2
    srcs = [lift.src_chart for lift in r.lifts]
    if len(set(srcs)) != len(srcs):
        rb.fail("R2", "two lifts share a domain chart")
    if sorted(srcs) != sorted(r.domain.ids()):
        rb.fail("R2", f"lifts on {sorted(srcs)}, atlas charts {sorted(r.domain.ids())}")
    covered = DomainSet.of(iv for s in set(srcs) & set(r.domain.ids())
                           for iv in r.domain.chart(s).image())
    if covered != q:
        rb.fail("R2", f"lift charts cover {covered}, not {q}")
    for lift in r.lifts:
        try:
            c, c2 = r.domain.chart(lift.src_chart), r.range.chart(lift.dst_chart)
        except KeyError as k:
            rb.fail("lift", f"unknown chart {k}")
            continue
        rb.extend(verify_local_lift(lift.fn, r.f, c, c2), prefix=f"lift {lift.src_chart}: ")
    if rb.build().failures:
        return rb.build()
    # R3
    for lam in r.P.elements:
        _check_change_of_charts(lam, r.domain, rb, "R3.change")
    probes = {c.id: probe_points(c) for c in r.domain.charts}
    rb.extend(validate_quasi_pseudogroup(r.P, probes), prefix="R3.")
    if not rb.build().failures:
        rb.extend(generation_check(r.domain, depth_cap, r.P), prefix="R3.")
    # R4
    keys = {lam for lam, _ in r.nu}
    for lam in r.P.elements:
        if lam not in keys:
            rb.fail("R4", f"nu is not defined on {lam.name or lam.text()}")
    for _, mu in r.nu:
        _check_change_of_charts(mu, r.range, rb, "R4.target")
    if rb.build().failures:
        return rb.build()
    hom = to_hom(r)
    src = MarkedAtlasGroupoid(r.domain, r.P)
    dst = MarkedAtlasGroupoid(r.range, QuasiPseudogroup(()))
    rb.extend(validate_hom(hom, src, dst), prefix="R4.")
    return rb.build()


# ---------------------------------------------------------------- F1 and F2


def to_hom(m: MapLike, range_atlas: Atlas | None = None) -> GroupoidHom:
    """``phi_0`` is the disjoint union of the lifts and ``phi_1(germ lam) = germ nu(lam)``."""
    r = _rep(m)
    target = range_atlas or r.range
    ids = set(target.ids())
    for lift in r.lifts:
        if lift.dst_chart not in ids:
            raise RangeFamilyNotContained(f"lift on {lift.src_chart} lands in unknown chart "
                                          f"{lift.dst_chart}")
    objs = tuple(ObjComponent(lift.src_chart, lift.dst_chart, lift.fn) for lift in r.lifts)
    return GroupoidHom(objs, tuple((lam, r.nu_of(lam)) for lam in r.P.elements))


def from_hom(h: GroupoidHom, src: MarkedAtlasGroupoid, dst: MarkedAtlasGroupoid) -> MapRep:
    """The representative induced by a homomorphism; ``f`` is the map of orbit spaces."""
    f, _ = induced_orbit_map(h, src, dst)
    lifts = tuple(LocalLift(c.fn, c.source, c.target) for c in h.obj_map)
    return MapRep(f, lifts, src.atlas, dst.atlas, QuasiPseudogroup(h.generators), h.arrow_map)


# ---------------------------------------------------------------- equivalence of representatives


def _same_atlas(a: Atlas, b: Atlas) -> bool:
    return a.space == b.space and sorted(a.charts, key=lambda c: c.id) == sorted(b.charts, key=lambda c: c.id)


def representative_difference(m1: MapLike, m2: MapLike) -> str | None:
    """``None`` when the representatives are equivalent, else the first difference found."""
    r1, r2 = _rep(m1), _rep(m2)
    if not _same_atlas(r1.domain, r2.domain):
        raise AtlasMismatch("representatives have different domain atlases")
    if not _same_atlas(r1.range, r2.range):
        raise AtlasMismatch("representatives have different range atlases")
    if r1.f != r2.f:
        return "the maps of underlying spaces differ"
    for c in r1.domain.ids():
        a, b = r1.lift(c), r2.lift(c)
        if a.fn != b.fn or a.dst_chart != b.dst_chart:
            return f"the lifts on {c} differ"
    probes = {c.id: probe_points(c) for c in r1.domain.charts}
    for ra, rb_ in ((r1, r2), (r2, r1)):
        for lam in ra.P.elements:
            for x in _domain_probes(lam.fn, probes.get(lam.source, [])):
                diff = _nu_difference(ra, rb_, lam, x)
                if diff:
                    return diff
    return None


def _nu_difference(ra: MapRep, rb: MapRep, lam: Transition, x) -> str | None:
    g = lam.germ(x)
    fx = ra.lift(lam.source).fn(x)
    if not isinstance(fx, Fraction):
        return None
    mu = ra.nu_of(lam)
    for kap in rb.P.elements:
        if kap.source != lam.source or kap.target != lam.target or not kap.fn.domain.contains(x):
            continue
        if kap.germ(x) != g:
            continue
        nu2 = rb.nu_of(kap)
        if nu2.target != mu.target or not nu2.fn.domain.contains(fx) or not mu.fn.domain.contains(fx):
            return f"nu images of the germ of {lam.name or lam.text()} at {fmt_frac(x)} live in different places"
        if mu.germ(fx) != nu2.germ(fx):
            return (f"nu images of the germ of {lam.name or lam.text()} at {fmt_frac(x)} differ: "
                    f"{mu.germ(fx).text()} vs {nu2.germ(fx).text()}")
    return None


def representatives_equivalent(m1: MapLike, m2: MapLike) -> bool:
    return representative_difference(m1, m2) is None


# ---------------------------------------------------------------- induced lifts and identity lifts


def induce_local_lift(lift: LocalLift, lam: Embedding, mu: Embedding) -> LocalLift:
    """``mu^-1 o lift o lam``."""
    if lam.target != lift.src_chart or mu.target != lift.dst_chart:
        raise ValueError("embeddings do not match the lift's charts")
    inner = compose(lift.fn, lam.map)
    if not inner.image().subset_of(mu.map.image()):
        raise ImageNotContained(f"{inner.image()} is not inside {mu.map.image()}")
    return LocalLift(compose(invert(mu.map), inner), lam.source, mu.source)


def _reason_point(fails):
    reason = fails.reason
    return getattr(reason, "point", getattr(reason, "x", None))


def _conjugated_rep(f: PiecewiseFn, lifts: Sequence[LocalLift], domain: Atlas, range_: Atlas) -> MapRep:
    """Representative whose ``nu(lam)`` is ``lift_t o lam o lift_s^-1``; needs invertible lifts."""
    by = {lift.src_chart: lift for lift in lifts}
    P = psi_generators(domain)
    pairs = []
    for lam in P.elements:
        s, t = by[lam.source], by[lam.target]
        nu = compose(t.fn, compose(lam.fn, invert(s.fn)))
        pairs.append((lam, Transition(s.dst_chart, t.dst_chart, nu, lam.name)))
    return MapRep(f, tuple(lifts), domain, range_, P, tuple(pairs))


def complete_identity_lift(lifts: Sequence[LocalLift], domain: Atlas, range_: Atlas) -> ChartedMap:
    """Complete a family of local lifts of the identity to a representative."""
    for lift in lifts:
        d = is_local_diffeomorphism(lift.fn)
        if not d:
            raise NotLocalDiffeo(lift.src_chart, _reason_point(d))
    f = PiecewiseFn.identity(domain.space.carrier)
    return ChartedMap(_conjugated_rep(f, lifts, domain, range_))


def identity_rep(atlas: Atlas) -> ChartedMap:
    lifts = tuple(LocalLift(c.identity, c.id, c.id) for c in atlas.charts)
    return complete_identity_lift(lifts, atlas, atlas)


@lru_cache(maxsize=4096)
def _compatible(a: Chart, b: Chart) -> bool:
    return isinstance(charts_compatible(a, b), Compatible)


def identity_lift_failure(m: MapLike) -> str | None:
    r = _rep(m)
    if r.domain.space != r.range.space:
        return "domain and range spaces differ"
    if r.f != PiecewiseFn.identity(r.domain.space.carrier):
        return "the map of underlying spaces is not the identity"
    for lift in r.lifts:
        d = is_local_diffeomorphism(lift.fn)
        if not d:
            return f"lift on {lift.src_chart}: {d.text()}"
    for a in r.domain.charts:
        for b in r.range.charts:
            if not _compatible(a, b):
                return f"charts {a.id} and {b.id} are not compatible"
    return None


def is_identity_lift(m: MapLike) -> bool:
    return identity_lift_failure(m) is None


# ---------------------------------------------------------------- induced charted maps


def extend_range(charts: Sequence[Chart], mus: Mapping[str, Embedding], base: Atlas) -> Atlas:
    """The given charts, then base charts appended in order until the carrier is covered."""
    pairs: list[tuple[Chart, Embedding]] = []
    by_chart = {mu.source: mu for mu in mus.values()}
    for c in charts:
        if c.id not in {p.id for p, _ in pairs}:
            pairs.append((c, by_chart[c.id]))
    covered = DomainSet.of(iv for c, _ in pairs for iv in c.image())
    for c in base.charts:
        if covered == base.space.carrier:
            break
        if c.id in {p.id for p, _ in pairs}:
            continue
        pairs.append((c, Embedding(c.id, c.id, c.identity)))
        covered = covered.union(c.image())
    return pullback_atlas(pairs, base, f"{base.id}'")


def induce_charted_map(m: MapLike, domain: Atlas, lambdas: Mapping[str, Embedding],
                       range_charts: Sequence[Chart], mus: Mapping[str, Embedding],
                       range_atlas: Atlas | None = None) -> ChartedMap:
    """The map induced along ``lambda_j: W_j -> V`` and ``mu_j: W'_j -> V'``.

    Lifts are ``mu_j^-1 o lift o lambda_j``.  ``P`` consists of the
    pullbacks ``lambda_k^-1 o beta o lambda_j`` of the generators ``beta``,
    with ``nu = mu_k^-1 o nu(beta) o mu_j``, closed up to a quasi-pseudogroup.
    """
    r = _rep(m)
    lifts = []
    for w in domain.charts:
        lam, mu = lambdas[w.id], mus[w.id]
        try:
            lifts.append(induce_local_lift(r.lift(lam.target), lam, mu))
        except ImageNotContained as exc:
            raise ImageNotContained(f"chart {w.id}: {exc}") from exc
    if range_atlas is None:
        range_atlas = extend_range(range_charts, mus, r.range)
    pairs = []
    for beta, nu_beta in r.nu:
        for j in domain.ids():
            lj, mj = lambdas[j], mus[j]
            if lj.target != beta.source:
                continue
            for k in domain.ids():
                lk, mk = lambdas[k], mus[k]
                if lk.target != beta.target:
                    continue
                gam = pullback(beta.fn, lj.map, lk.map)
                if gam.is_empty:
                    continue
                nu = pullback(nu_beta.fn, mj.map, mk.map)
                pairs.append((Transition(j, k, gam, beta.name),
                              Transition(mj.source, mk.source, nu, nu_beta.name)))
    probes = {c.id: probe_points(c) for c in domain.charts}
    pairs = close_assignment(pairs, probes)
    P = QuasiPseudogroup(tuple(lam for lam, _ in pairs))
    return ChartedMap(MapRep(r.f, tuple(lifts), domain, range_atlas, P, pairs))


# ---------------------------------------------------------------- composition


def compose_reps(g: MapLike, f: MapLike) -> ChartedMap:
    """``g o f`` when the range atlas of ``f`` is the domain atlas of ``g``.

    ``nu`` of the composite sends ``lam`` to ``nu_g(xi)`` for the first
    ``xi`` in ``P_g`` having the germs of ``nu_f(lam)`` along the image of
    the lift; ``lam`` is cut into windows when no single ``xi`` fits.
    """
    rf, rg = _rep(f), _rep(g)
    if not _same_atlas(rf.range, rg.domain):
        raise AtlasChainMismatch("the range atlas of the inner map is not the domain atlas of the outer")
    h = compose_homs(to_hom(rg), to_hom(rf))
    lifts = tuple(LocalLift(c.fn, c.source, c.target) for c in h.obj_map)
    rep = MapRep(compose(rg.f, rf.f), lifts, rf.domain, rg.range,
                 QuasiPseudogroup(h.generators), h.arrow_map)
    return ChartedMap(rep)


def _chart_image(c: Chart) -> DomainSet:
    return c.proj.image()


def _middle(rf: MapRep, rg_domain: Atlas):
    """Refine ``rf``'s range against ``rg_domain`` and its domain to land chart-wise in the refinement."""
    items = common_refinement(rf.range, rg_domain, "k")
    cands = []
    for c in rf.domain.charts:
        lift = rf.lift(c.id)
        for it in items:
            if it.first.target != lift.dst_chart:
                continue
            dom = lift.fn.preimage(it.chart.domain).interior()
            for comp in dom:
                for s in stable_pieces(comp, c):
                    cands.append((c, s, it))
    return items, cands


def _assemble_domain(cands, base: Atlas, prefix: str = "w"):
    """Build the refined domain atlas from chosen ``(chart, interval, range item, ...)`` tuples."""
    from orbifoldkit.charts import restrict_chart

    pairs, lambdas, mus, extras = [], {}, {}, {}
    for i, (c, s, it, *rest) in enumerate(cands):
        wid = f"{prefix}{i}"
        w = restrict_chart(c, s, wid)
        lam = Embedding(wid, c.id, PiecewiseFn.identity(s))
        pairs.append((w, lam))
        lambdas[wid] = lam
        mus[wid] = it.first
        extras[wid] = rest
    return pullback_atlas(pairs, base, f"{base.id}*"), lambdas, mus, extras


def _range_atlas(items, used, base: Atlas) -> Atlas | None:
    chosen = select_cover(items, base.space.carrier, lambda it: _chart_image(it.chart), required=used)
    if not chosen:
        return None
    return pullback_atlas([(it.chart, it.first) for it in chosen], base, f"{base.id}*"), chosen


def _unique_items(cands):
    seen, out = set(), []
    for cand in cands:
        it = cand[2]
        if it.chart.id not in seen:
            seen.add(it.chart.id)
            out.append(it)
    return out


def compose_orbifold_maps(g: MapLike, f: MapLike) -> ChartedMap:
    """Compose maps whose middle atlases differ but define the same structure."""
    rf, rg = _rep(f), _rep(g)
    if _same_atlas(rf.range, rg.domain):
        return compose_reps(rg, rf)
    try:
        items, cands = _middle(rf, rg.domain)
        chosen = select_cover(cands, rf.domain.space.carrier,
                              lambda cand: cand[0].proj.restrict(cand[1]).image())
        if not chosen:
            raise RefinementFailed("refined charts do not cover the domain space")
        got = _range_atlas(items, _unique_items(chosen), rf.range)
        if got is None:
            raise RefinementFailed("refined charts do not cover the middle space")
        middle, used = got
        domain, lambdas, mus, _ = _assemble_domain(chosen, rf.domain)
        bridge = induce_charted_map(rf, domain, lambdas, [], mus, range_atlas=middle)
        eps = complete_identity_lift(tuple(LocalLift(it.second.map, it.chart.id, it.second.target)
                                           for it in used), middle, rg.domain)
        return compose_reps(compose_reps(rg, eps), bridge)
    except (NotInFragment, NotInjective, NotLocalDiffeo, ImageNotContained, KeyError) as exc:
        raise RefinementFailed(str(exc)) from exc


# ---------------------------------------------------------------- equivalence of charted maps


def witness_failure(m1: MapLike, m2: MapLike, w: EquivalenceWitness) -> str | None:
    for name in ("eps1", "eps2", "eps1p", "eps2p"):
        why = identity_lift_failure(getattr(w, name))
        if why:
            return f"{name} is not a lift of the identity: {why}"
    try:
        squares = ((compose_reps(w.eps1p, w.bridge), compose_reps(m1, w.eps1)),
                   (compose_reps(w.eps2p, w.bridge), compose_reps(m2, w.eps2)))
        for i, (left, right) in enumerate(squares, 1):
            diff = representative_difference(left, right)
            if diff:
                return f"square {i} does not commute: {diff}"
    except (AtlasChainMismatch, AtlasMismatch, NotInFragment) as exc:
        return str(exc)
    return None


def verify_equivalence_witness(m1: MapLike, m2: MapLike, w: EquivalenceWitness) -> bool:
    return witness_failure(m1, m2, w) is None


def _full_changes(a: Chart, targets: Atlas) -> list[tuple[str, PiecewiseFn]]:
    whole = DomainSet.of([a.domain])
    return [(b.id, fn) for b in targets.charts for fn in chart_changes(a, b) if fn.domain == whole]


def _direct_witness(m1: MapRep, m2: MapRep, limit: int = 64) -> EquivalenceWitness | None:
    """``m2`` itself as bridge, with its atlases embedded chart-wise into those of ``m1``."""
    mu_opts = [[(c.id, b, fn) for b, fn in _full_changes(c, m1.range)] for c in m2.range.charts]
    lam_opts = {c.id: _full_changes(c, m1.domain) for c in m2.domain.charts}
    if any(not o for o in mu_opts) or any(not o for o in lam_opts.values()):
        return None
    for choice in islice(product(*mu_opts), limit):
        mu = {cid: (b, fn) for cid, b, fn in choice}
        per_chart = []
        for lift in m2.lifts:
            b, mfn = mu[lift.dst_chart]
            want = compose(mfn, lift.fn)
            per_chart.append([LocalLift(lfn, lift.src_chart, c1) for c1, lfn in lam_opts[lift.src_chart]
                              if m1.lift(c1).dst_chart == b and compose(m1.lift(c1).fn, lfn) == want])
        if any(not o for o in per_chart):
            continue
        try:
            eps1p = complete_identity_lift([LocalLift(fn, cid, b) for cid, (b, fn) in mu.items()],
                                           m2.range, m1.range)
        except (NotLocalDiffeo, NotInFragment, NotInjective):
            continue
        for lams in islice(product(*per_chart), limit):
            try:
                eps1 = complete_identity_lift(lams, m2.domain, m1.domain)
            except (NotLocalDiffeo, NotInFragment, NotInjective):
                continue
            w = EquivalenceWitness(eps1, identity_rep(m2.domain), eps1p, identity_rep(m2.range),
                                   ChartedMap(m2))
            if verify_equivalence_witness(m1, m2, w):
                return w
    return None


def _refined_witness(m1: MapRep, m2: MapRep) -> EquivalenceWitness | None:
    """Refine both sides; needs the lifts of ``m2`` to be local diffeomorphisms."""
    if any(not is_local_diffeomorphism(lift.fn) for lift in m2.lifts):
        return None
    items = common_refinement(m1.range, m2.range, "k")
    cands = []
    for c1 in m1.domain.charts:
        l1 = m1.lift(c1.id)
        for it in items:
            if it.first.target != l1.dst_chart:
                continue
            kap = it.second.map
            for c2 in m2.domain.charts:
                l2 = m2.lift(c2.id)
                if l2.dst_chart != it.second.target:
                    continue
                reach = kap.preimage(l2.fn.image())
                inv2 = invert(l2.fn)
                for comp in l1.fn.preimage(reach).interior():
                    for s in stable_pieces(comp, c1):
                        lam2 = compose(inv2, compose(kap, l1.fn.restrict(s)))
                        cands.append((c1, s, it, c2.id, lam2))
    chosen = select_cover(cands, m1.domain.space.carrier,
                          lambda cand: cand[0].proj.restrict(cand[1]).image())
    if not chosen:
        return None
    got = _range_atlas(items, _unique_items(chosen), m1.range)
    if got is None:
        return None
    wrange, used = got
    wdom, lambdas, mus, extras = _assemble_domain(chosen, m1.domain)
    bridge = induce_charted_map(m1, wdom, lambdas, [], mus, range_atlas=wrange)
    eps1 = complete_identity_lift([LocalLift(l.map, wid, l.target) for wid, l in lambdas.items()],
                                  wdom, m1.domain)
    eps2 = complete_identity_lift([LocalLift(extras[wid][1], wid, extras[wid][0]) for wid in wdom.ids()],
                                  wdom, m2.domain)
    eps1p = complete_identity_lift([LocalLift(it.first.map, it.chart.id, it.first.target) for it in used],
                                   wrange, m1.range)
    eps2p = complete_identity_lift([LocalLift(it.second.map, it.chart.id, it.second.target) for it in used],
                                   wrange, m2.range)
    w = EquivalenceWitness(eps1, eps2, eps1p, eps2p, bridge)
    return w if verify_equivalence_witness(m1, m2, w) else None


def common_refinement_witness(m1: MapLike, m2: MapLike) -> EquivalenceWitness | Unknown:
    """Search for a witness by chart-wise embedding, then by refining both sides."""
    r1, r2 = _rep(m1), _rep(m2)
    attempts = ((_direct_witness, False), (_direct_witness, True),
                (_refined_witness, False), (_refined_witness, True))
    for search, swap in attempts:
        a, b = (r2, r1) if swap else (r1, r2)
        try:
            w = search(a, b)
        except (NotInFragment, NotInjective, NotLocalDiffeo, ImageNotContained, KeyError, ValueError):
            w = None
        if w is not None:
            return w.mirrored() if swap else w
    return Unknown("no witness found by chart embedding or by common refinement")


# ---------------------------------------------------------------- unit weak equivalences


@dataclass(frozen=True)
class UweVerdict:
    """The induced-lift verdict and the direct structural probe verdict."""

    via_f2: bool
    structural: bool
    reason: str = ""

    def __bool__(self):
        return self.via_f2

    @property
    def agree(self) -> bool:
        return self.via_f2 == self.structural


def structural_uwe_failure(h: GroupoidHom, src: MarkedAtlasGroupoid, dst: MarkedAtlasGroupoid,
                           depth_cap: int = DEFAULT_DEPTH_CAP) -> str | None:
    if src.space != dst.space:
        return "different carriers"
    f, ok = induced_orbit_map(h, src, dst)
    if not ok or f != PiecewiseFn.identity(src.space.carrier):
        return "the induced map of orbit spaces is not the identity"
    for c in h.obj_map:
        if not is_local_diffeomorphism(c.fn):
            return f"object map on {c.source} is not a local diffeomorphism"
    for d in dst.atlas.charts:
        for y in probe_points(d):
            q = d.proj(y)
            if not isinstance(q, Fraction):
                continue
            reach = orbit(dst, ObjPoint(d.id, y), depth_cap)
            hits = [ObjPoint(c.id, x) for c in src.atlas.charts for x in fiber(c, q)]
            if not any(h.on_object(p) in reach for p in hits):
                return f"{d.id}:{fmt_frac(y)} receives no arrow from the image"
    for c1 in src.atlas.charts:
        for c2 in src.atlas.charts:
            for x1 in probe_points(c1):
                q = c1.proj(x1)
                if not isinstance(q, Fraction):
                    continue
                for x2 in fiber(c2, q):
                    p1, p2 = ObjPoint(c1.id, x1), ObjPoint(c2.id, x2)
                    arrows, _ = arrows_between(src, p1, p2, depth_cap)
                    target, _ = arrows_between(dst, h.on_object(p1), h.on_object(p2), depth_cap)
                    try:
                        image = {h.on_arrow(a, depth_cap) for a in arrows}
                    except KeyError:
                        return f"arrows at {p1.text()} are not generated"
                    if len(image) != len(arrows) or image != set(target):
                        return (f"arrows {p1.text()} -> {p2.text()}: {len(arrows)} map to "
                                f"{len(image)} of {len(target)}")
    return None


def is_unit_weak_equivalence(h: GroupoidHom, src: MarkedAtlasGroupoid,
                             dst: MarkedAtlasGroupoid) -> UweVerdict:
    rep = from_hom(h, src, dst)
    why = None if src.space == dst.space else "different carriers"
    why = why or identity_lift_failure(rep)
    probe = structural_uwe_failure(h, src, dst)
    return UweVerdict(why is None, probe is None, why or probe or "")


# ---------------------------------------------------------------- refuting equivalence of homs


@dataclass(frozen=True)
class HomCertificate:
    """Points over ``q`` whose isotropy groups have images of different sizes."""

    q: Fraction
    first: ObjPoint
    second: ObjPoint
    first_size: int
    second_size: int

    def text(self) -> str:
        return (f"Certificate at {fmt_frac(self.q)}: isotropy-image sizes "
                f"{self.first_size} vs {self.second_size}")


@dataclass(frozen=True)
class NoRefutation:
    def __bool__(self):
        return False

    def text(self) -> str:
        return "NoRefutation"


def isotropy_image_size(h: GroupoidHom, p: ObjPoint, depth_cap: int = DEFAULT_DEPTH_CAP) -> int | None:
    """``|phi_1(G(p, p))|``, or ``None`` when the arrow search hit its depth cap."""
    sat = saturate(h.generators, p, depth_cap)
    if not sat.saturated:
        return None
    return len({h.on_arrow(a, depth_cap) for a in sat.arrows if a.target == p})


def refute_hom_equivalence(phi: GroupoidHom, psi: GroupoidHom, phi_src: Atlas, psi_src: Atlas,
                           depth_cap: int = DEFAULT_DEPTH_CAP) -> HomCertificate | NoRefutation:
    """Compare isotropy-image sizes over common points of the source spaces.

    The size at ``q`` is preserved by unit weak equivalences in both
    directions, so a mismatch shows the homomorphisms are not equivalent.
    """
    qs = set()
    for c in phi_src.charts + psi_src.charts:
        for x in probe_points(c):
            q = c.proj(x)
            if isinstance(q, Fraction):
                qs.add(q)
    for q in sorted(qs):
        a = [ObjPoint(c.id, x) for c in phi_src.charts for x in fiber(c, q)]
        b = [ObjPoint(c.id, x) for c in psi_src.charts for x in fiber(c, q)]
        if not a or not b:
            continue
        n1, n2 = isotropy_image_size(phi, a[0], depth_cap), isotropy_image_size(psi, b[0], depth_cap)
        if n1 is not None and n2 is not None and n1 != n2:
            return HomCertificate(q, a[0], b[0], n1, n2)
    return NoRefutation()
