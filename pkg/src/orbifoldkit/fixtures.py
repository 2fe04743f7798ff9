"""Ready-made charts, atlases and maps for the reflection orbifold ``[0, 1)``.

The carrier ``[0, 1)`` is the quotient of ``(-1, 1)`` by ``x -> -x``.  It
carries two different orbifold structures: one projects by ``|x|`` and one
by ``x^2``.
"""

from __future__ import annotations

from fractions import Fraction as F

from orbifoldkit.charts import Atlas, Chart, Embedding, Space, fundamental_domain
from orbifoldkit.groupoid import QuasiPseudogroup, Transition
from orbifoldkit.refinement import restriction_atlas
from orbifoldkit.symfun import DomainSet, Interval, PiecewiseFn, parse_fn

HALF_LINE = Interval(F(0), F(1), False, True)
Q = Space(DomainSet.of([HALF_LINE]))
V = Interval.open(-1, 1)
ID = PiecewiseFn.identity(V)
NEG = PiecewiseFn.affine(-1, 0, V)
ABS = parse_fn("piece(1, 1, 0, 1, 0) on (-1,1)")
SQUARE = parse_fn("piece(1, 1, 0, 2, 0) on (-1,1)")


def reflection_chart(cid: str, proj: PiecewiseFn) -> Chart:
    group = (ID, NEG)
    return Chart(cid, V, group, proj, fundamental_domain(V, group))


V1 = reflection_chart("V1", ABS)
V2 = reflection_chart("V2", SQUARE)
ATLAS_ABS = Atlas((V1,), (), Q, "U1")
ATLAS_SQUARE = Atlas((V2,), (), Q, "U2")


def _pm(chart: str) -> tuple[Transition, Transition]:
    return (Transition(chart, chart, ID, "id"), Transition(chart, chart, NEG, "-id"))


def _rep(f, lift_fn, src, dst, nu_neg_is_neg: bool, domain, range_):
    from orbifoldkit.maps import LocalLift, MapRep

    pid, pneg = _pm(src)
    qid, qneg = _pm(dst)
    nu = ((pid, qid), (pneg, qneg if nu_neg_is_neg else qid))
    return MapRep(f, (LocalLift(lift_fn, src, dst),), domain, range_,
                  QuasiPseudogroup((pid, pneg)), nu)


def constant_rep(flip: bool):
    """``q -> 0`` lifted by the zero map; ``flip`` selects ``nu(-id) = -id``."""
    zero = PiecewiseFn.constant(0, HALF_LINE)
    return _rep(zero, PiecewiseFn.constant(0, V), "V1", "V1", flip, ATLAS_ABS, ATLAS_ABS)


def square_lift_rep():
    """The identity of ``[0, 1)`` lifted by ``x -> x^2`` from the square atlas to the abs atlas."""
    return _rep(PiecewiseFn.identity(HALF_LINE), SQUARE, "V2", "V1", False, ATLAS_SQUARE, ATLAS_ABS)


def sqrt_carrier_map() -> PiecewiseFn:
    return parse_fn("piece(1, 1, 0, 1/2, 0) on [0,1)")


def sqrt_lift_candidates() -> list[PiecewiseFn]:
    """The four maps whose absolute value is ``|x|^(1/2)``."""
    texts = ["piece(1, 1, 0, 1/2, 0)", "piece(-1, 1, 0, 1/2, 0)",
             "piece(1, sign, 0, 1/2, 0)", "piece(-1, sign, 0, 1/2, 0)"]
    return [parse_fn(t + " on (-1,1)") for t in texts]


def two_chart_atlas() -> Atlas:
    """A manifold atlas of ``(0, 2)`` with two overlapping trivial charts."""
    a, b = Interval.open(0, F(3, 2)), Interval.open(F(1, 2), 2)
    ca = Chart("A", a, (PiecewiseFn.identity(a),), PiecewiseFn.identity(a), a)
    cb = Chart("B", b, (PiecewiseFn.identity(b),), PiecewiseFn.identity(b), b)
    overlap = Interval.open(F(1, 2), F(3, 2))
    w = (Embedding("A", "B", PiecewiseFn.identity(overlap)),)
    return Atlas((ca, cb), w, Space(DomainSet.of([Interval.open(0, 2)])), "M")


# Restriction atlases of the abs atlas, each listed as (interval, lift sign) per chart.
RESTRICTION_SPECS = [
    [((-1, 1), 1)],
    [((F(-1, 2), F(1, 2)), 1), ((F(1, 4), 1), 1)],
    [((F(-3, 4), F(3, 4)), 1), ((-1, F(-1, 2)), 1)],
    [((F(-1, 2), F(1, 2)), -1), ((F(1, 4), 1), -1)],
    [((F(-1, 4), F(1, 4)), 1), ((0, 1), 1), ((-1, F(-1, 8)), -1)],
]


def restriction_identity_lift(k: int):
    """The ``k``-th identity lift from a restriction atlas of the abs atlas into it."""
    from orbifoldkit.maps import LocalLift, complete_identity_lift

    spec = RESTRICTION_SPECS[k]
    items = [("V1", Interval.open(*iv), f"R{k}_{i}") for i, (iv, _) in enumerate(spec)]
    atlas, incl = restriction_atlas(ATLAS_ABS, items, f"R{k}")
    lifts = []
    for (_, s, cid), (_, sign) in zip(items, spec):
        lifts.append(LocalLift(PiecewiseFn.affine(sign, 0, s), cid, "V1"))
    return complete_identity_lift(tuple(lifts), atlas, ATLAS_ABS)


def identity_lifts() -> list:
    return [restriction_identity_lift(k) for k in range(len(RESTRICTION_SPECS))]
