"""Refining atlases: restrictions, pulled-back transitions, common refinements.

Every refinement chart is a restriction ``(S, G_S, pi|S)`` of some base
chart, so its inclusion is an open embedding and the transitions between
refinement charts are pullbacks of the base generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, Sequence

from orbifoldkit.charts import (
    Atlas,
    Chart,
    Embedding,
    Space,
    candidates_at,
    fiber_pairs,
    fixed_points,
    is_identity_on,
    restrict_chart,
    stable_isotropy,
    translate,
)
from orbifoldkit.errors import NotInFragment, NotStableError
from orbifoldkit.groupoid import psi_generators
from orbifoldkit.symfun import (
    DomainSet,
    Interval,
    Piece,
    PiecewiseFn,
    compose,
    invert,
    is_diffeomorphism,
)


@dataclass(frozen=True)
class RefinedChart:
    """A restriction chart with embeddings into one chart of each of two atlases."""

    chart: Chart
    first: Embedding
    second: Embedding


def pullback(beta: PiecewiseFn, lam_j: PiecewiseFn, lam_k: PiecewiseFn) -> PiecewiseFn:
    """``lam_k^-1 o beta o lam_j`` wherever it is defined."""
    inner = compose(beta, lam_j)
    if inner.is_empty:
        return inner
    return compose(invert(lam_k), inner)


def pullback_atlas(charts: Sequence[tuple[Chart, Embedding]], base: Atlas, atlas_id: str = "") -> Atlas:
    """Atlas of charts embedded in ``base``, with all pulled-back base generators as witnesses."""
    gens = psi_generators(base).elements
    witnesses = []
    seen = set()
    for cj, lj in charts:
        for ck, lk in charts:
            if cj.id == ck.id:
                continue
            for beta in gens:
                if beta.source != lj.target or beta.target != lk.target:
                    continue
                gam = pullback(beta.fn, lj.map, lk.map)
                if gam.is_empty or (cj.id, ck.id, gam) in seen:
                    continue
                seen.add((cj.id, ck.id, gam))
                witnesses.append(Embedding(cj.id, ck.id, gam))
    return Atlas(tuple(c for c, _ in charts), tuple(witnesses), base.space, atlas_id)


def restriction_atlas(base: Atlas, specs: Iterable[tuple[str, Interval, str]],
                      atlas_id: str = "") -> tuple[Atlas, dict[str, Embedding]]:
    """Restrict base charts to the given stable intervals; returns the atlas and inclusions."""
    pairs = []
    for base_id, s, new_id in specs:
        c = restrict_chart(base.chart(base_id), s, new_id)
        pairs.append((c, Embedding(new_id, base_id, PiecewiseFn.identity(s))))
    return pullback_atlas(pairs, base, atlas_id), {c.id: e for c, e in pairs}


def stable_pieces(u: Interval, c: Chart) -> list[Interval]:
    """Stable open intervals covering ``u``."""
    if stable_isotropy(u, c):
        return [u]
    whole = DomainSet.of([u])
    out = []
    for g in c.group:
        if is_identity_on(g, c.domain):
            continue
        for p in fixed_points(g):
            if not u.interior_contains(p):
                continue
            out.extend(iv for iv in whole.intersect(translate(g, u)) if iv.contains(p))
            out.extend(whole.difference(DomainSet.of([Interval.point(p)])))
    return [iv for iv in out if iv.is_open and stable_isotropy(iv, c)]


def _extend_candidate(germ, x, a: Chart, b: Chart) -> PiecewiseFn | None:
    """Extend a change-of-charts germ at ``x`` to the largest interval its side formulas allow."""
    v = a.domain
    pieces = [Piece(germ.left or germ.right, Interval.point(x))]
    if germ.left is not None and v.lo < x:
        pieces.append(Piece(germ.left, Interval(v.lo, x, v.lo_open, True)))
    if germ.right is not None and x < v.hi:
        pieces.append(Piece(germ.right, Interval(x, v.hi, True, v.hi_open)))
    try:
        full = PiecewiseFn(tuple(pieces))
        fn = full.restrict(full.preimage(b.domain))
        comp = next((iv for iv in fn.domain if iv.contains(x)), None)
        if comp is None:
            return None
        fn = fn.restrict(comp.interior())
        if compose(b.proj, fn) != a.proj.restrict(fn.domain) or not is_diffeomorphism(fn):
            return None
        return fn
    except (NotInFragment, ValueError, StopIteration):
        return None


@lru_cache(maxsize=4096)
def chart_changes(a: Chart, b: Chart) -> tuple[PiecewiseFn, ...]:
    """Changes of charts ``a -> b`` through the probe fibers, each on a maximal interval."""
    out: list[PiecewiseFn] = []
    for x, y in fiber_pairs(b, a):
        cands, _ = candidates_at(a, x, b, y)
        for cand in cands:
            if not cand.verdict:
                continue
            fn = _extend_candidate(cand.germ, x, a, b) or cand.fn
            if fn not in out and not any(fn.domain.subset_of(o.domain) and o.restrict(fn.domain) == fn
                                         for o in out):
                out.append(fn)
    return tuple(out)


def _length_key(iv: Interval):
    n = iv.hi - iv.lo
    return -n if isinstance(n, Fraction) else 0


def common_refinement(first: Atlas, second: Atlas, prefix: str = "k") -> list[RefinedChart]:
    """Candidate charts, each a restriction of a ``first`` chart that also embeds into ``second``.

    Candidates are not selected for coverage; see ``select_cover``.
    """
    out = []
    for a in first.charts:
        for b in second.charts:
            for kappa in chart_changes(a, b):
                for comp in kappa.domain:
                    for s in sorted(stable_pieces(comp, a), key=_length_key):
                        try:
                            c = restrict_chart(a, s, "")
                        except NotStableError:
                            continue
                        out.append(RefinedChart(c, Embedding("", a.id, PiecewiseFn.identity(s)),
                                                Embedding("", b.id, kappa.restrict(s))))
    return _renamed(out, prefix)


def _renamed(items: Sequence[RefinedChart], prefix: str) -> list[RefinedChart]:
    out = []
    for i, r in enumerate(items):
        cid = f"{prefix}{i}"
        c = Chart(cid, r.chart.domain, r.chart.group, r.chart.proj, r.chart.fundamental)
        out.append(RefinedChart(c, Embedding(cid, r.first.target, r.first.map),
                                Embedding(cid, r.second.target, r.second.map)))
    return out


def select_cover(items: Sequence, carrier: DomainSet, image_of, required: Iterable = ()) -> list:
    """Greedy: keep ``required`` items, then every item that enlarges the covered set."""
    chosen = list(required)
    covered = DomainSet.empty()
    for it in chosen:
        covered = covered.union(image_of(it))
    for it in items:
        if covered == carrier:
            break
        img = image_of(it)
        if not img.difference(covered).is_empty:
            chosen.append(it)
            covered = covered.union(img)
    return chosen if covered == carrier else []


def image_on_space(c: Chart) -> DomainSet:
    return c.proj.image()


def refine_to(space: Space, items: Sequence[RefinedChart]) -> list[RefinedChart]:
    return select_cover(sorted(items, key=lambda r: _length_key(r.chart.domain)), space.carrier,
                        lambda r: image_on_space(r.chart))
