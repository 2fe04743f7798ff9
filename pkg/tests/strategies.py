"""Random reflection atlases and witness-connected map pairs for property tests."""

from __future__ import annotations

import random
from fractions import Fraction as F

from hypothesis import strategies as st

from orbifoldkit.charts import Atlas, Chart, Embedding, fundamental_domain
from orbifoldkit.fixtures import ATLAS_ABS, ATLAS_SQUARE, constant_rep
from orbifoldkit.maps import LocalLift, complete_identity_lift, induce_charted_map
from orbifoldkit.refinement import pullback_atlas, restriction_atlas
from orbifoldkit.symfun import Interval, PiecewiseFn, parse_fn

RADII = [F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(3, 4), F(1)]


def restriction_spec(rng: random.Random) -> list[tuple[Interval, int]]:
    """At most three stable intervals of (-1,1) whose images under |x| cover [0,1), with lift signs."""
    r = rng.choice(RADII)
    out = [(Interval.open(-r, r), rng.choice((1, -1)))]
    if r < 1:
        a = r * rng.choice((F(1, 4), F(1, 2), F(3, 4)))
        iv = Interval.open(a, 1) if rng.random() < 0.5 else Interval.open(-1, -a)
        out.append((iv, rng.choice((1, -1))))
    if len(out) < 3 and rng.random() < 0.5:
        lo = rng.choice((F(1, 8), F(1, 5), F(2, 5)))
        hi = lo + rng.choice((F(1, 8), F(1, 4), F(1, 2)))
        iv = Interval.open(lo, hi) if rng.random() < 0.5 else Interval.open(-hi, -lo)
        out.append((iv, 1 if rng.random() < 0.5 else -1))
    return out


def restriction(rng: random.Random, tag: str):
    """A restriction atlas of the |x| atlas with its identity lift and inclusions."""
    spec = restriction_spec(rng)
    items = [("V1", iv, f"{tag}_{i}") for i, (iv, _) in enumerate(spec)]
    atlas, incl = restriction_atlas(ATLAS_ABS, items, tag)
    lifts = [LocalLift(PiecewiseFn.affine(sign, 0, iv), cid, "V1")
             for (_, iv, cid), (_, sign) in zip(items, spec)]
    return atlas, incl, complete_identity_lift(tuple(lifts), atlas, ATLAS_ABS)


def induced_constant(rng: random.Random, tag: str, flip: bool):
    """A constant representative and the map it induces on a random restriction atlas."""
    atlas, incl, _ = restriction(rng, tag)
    v1 = ATLAS_ABS.chart("V1")
    stay = Embedding("V1", "V1", v1.identity)
    m = constant_rep(flip)
    return m, induce_charted_map(m, atlas, incl, [v1], {w: stay for w in atlas.ids()}, ATLAS_ABS)


def shifted_reflection_atlas(rng: random.Random, square: bool = False) -> Atlas:
    """Up to three charts, each a translate of a stable piece of the base reflection chart.

    A chart on ``S + c`` has group ``{id, x -> 2c - x}`` when ``S`` is symmetric
    and projection ``pi(x - c)``.
    """
    base = ATLAS_SQUARE if square else ATLAS_ABS
    proj_text = "piece(1, 1, {c}, 2, 0)" if square else "piece(1, 1, {c}, 1, 0)"
    pairs = []
    for i, (iv, _) in enumerate(restriction_spec(rng)):
        c = rng.choice((F(0), F(1, 2), F(-3, 2), F(5)))
        dom = iv.shifted(c)
        group = [PiecewiseFn.identity(dom)]
        if iv.lo == -iv.hi:
            group.append(PiecewiseFn.affine(-1, 2 * c, dom))
        proj = parse_fn(proj_text.format(c=c) + f" on {dom}")
        chart = Chart(f"C{i}", dom, tuple(group), proj, fundamental_domain(dom, group))
        base_id = base.charts[0].id
        pairs.append((chart, Embedding(chart.id, base_id, PiecewiseFn.affine(1, -c, dom))))
    return pullback_atlas(pairs, base, "A")


@st.composite
def rngs(draw):
    return random.Random(draw(st.integers(0, 2**32 - 1)))


# ---------------------------------------------------------------- fragment maps

small = st.fractions(min_value=-3, max_value=3, max_denominator=6)
nonzero = small.filter(lambda q: q != 0)
exponents = st.sampled_from([F(1), F(2), F(3), F(1, 2), F(1, 3), F(2, 3), F(5, 3)])


@st.composite
def centered_powers(draw, domain=Interval.open(-1, 1)):
    """``x -> a sign(x)|x|^r`` or ``a|x|^r``; these compose without leaving the fragment."""
    a = draw(nonzero)
    eps = draw(st.sampled_from(["1", "sign"]))
    r = draw(exponents)
    return parse_fn(f"piece({a}, {eps}, 0, {r}, 0) on {domain}")


@st.composite
def odd_powers(draw, domain=Interval.open(-1, 1)):
    """Injective centered maps ``x -> a sign(x)|x|^r``."""
    a = draw(nonzero)
    r = draw(exponents)
    return parse_fn(f"piece({a}, sign, 0, {r}, 0) on {domain}")


@st.composite
def injective_maps(draw):
    """Monotone single-piece maps with arbitrary center and offset, away from the center."""
    h = draw(small)
    width = draw(st.sampled_from([F(1, 2), F(1), F(2)]))
    a = draw(nonzero)
    r = draw(exponents)
    k = draw(small)
    eps = draw(st.sampled_from(["1", "sign"]))
    lo = h if draw(st.booleans()) else h - width
    return parse_fn(f"piece({a}, {eps}, {h}, {r}, {k}) on ({lo},{lo + width})")


@st.composite
def fragment_maps(draw):
    """One or two pieces with independent forms on adjacent intervals."""
    if draw(st.booleans()):
        return draw(injective_maps())
    h = draw(small)
    a1, a2 = draw(nonzero), draw(nonzero)
    r1, r2 = draw(exponents), draw(exponents)
    k = draw(small)
    left = f"piece({a1}, sign, {h}, {r1}, {k}) on ({h - 1},{h}]"
    right = f"piece({a2}, sign, {h}, {r2}, {k}) on ({h},{h + 1})"
    return parse_fn(f"{left} | {right}")
