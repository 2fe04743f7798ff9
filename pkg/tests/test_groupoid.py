from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbifoldkit.errors import DepthCapped, MalformedInput
from orbifoldkit.fixtures import ATLAS_ABS, ATLAS_SQUARE, constant_rep, square_lift_rep, two_chart_atlas
from orbifoldkit.groupoid import (
    MarkedAtlasGroupoid,
    ObjPoint,
    QuasiPseudogroup,
    Transition,
    arrows_between,
    atlases_equal,
    build_groupoid,
    compose_homs,
    induced_orbit_map,
    inverse,
    marking_value,
    multiply,
    orbit,
    psi_generators,
    recover_atlas,
    saturate,
    serialize,
    unit,
    validate_hom,
    validate_quasi_pseudogroup,
)
from orbifoldkit.maps import to_hom
from orbifoldkit.symfun import PiecewiseFn, parse_fn
from strategies import shifted_reflection_atlas

G1 = build_groupoid(ATLAS_ABS)
G2 = build_groupoid(ATLAS_SQUARE)


def pt(x, chart="V1"):
    return ObjPoint(chart, F(x))


def test_quasi_pseudogroup_examples():
    pm = psi_generators(ATLAS_ABS)
    assert validate_quasi_pseudogroup(pm).ok
    shift = Transition("A", "A", parse_fn("piece(1, sign, 0, 1, 1) on (0,1)"))
    lines = validate_quasi_pseudogroup(QuasiPseudogroup((shift,))).lines()
    assert lines and lines[0].startswith("inverse failed")


def test_generators_of_the_reflection_atlases():
    texts = [t.fn.text() for t in psi_generators(ATLAS_ABS).elements]
    assert texts == ["piece(1, sign, 0, 1, 0) on (-1,1)", "piece(-1, sign, 0, 1, 0) on (-1,1)"]
    assert [t.fn for t in psi_generators(ATLAS_SQUARE).elements] == [t.fn for t in psi_generators(ATLAS_ABS).elements]


def test_generators_of_a_two_chart_manifold_atlas():
    got = [t.text() for t in psi_generators(two_chart_atlas()).elements]
    assert got == [
        "A->A: piece(1, sign, 0, 1, 0) on (0,3/2)",
        "B->B: piece(1, sign, 0, 1, 0) on (1/2,2)",
        "A->B: piece(1, sign, 0, 1, 0) on (1/2,3/2)",
        "B->A: piece(1, sign, 0, 1, 0) on (1/2,3/2)",
    ]


def test_arrow_table():
    assert len(arrows_between(G1, pt(0), pt(0))[0]) == 2
    for x in (F(1, 2), F(-1, 2), F(1, 4), F(-1, 4)):
        assert len(arrows_between(G1, pt(x), pt(x))[0]) == 1
        assert len(arrows_between(G1, pt(x), pt(-x))[0]) == 1
    arrows, status = arrows_between(G1, pt(F(1, 2)), pt(F(1, 4)))
    assert arrows == frozenset() and status == "Saturated"


def test_orbits():
    assert orbit(G1, pt(F(1, 2))) == {pt(F(1, 2)), pt(F(-1, 2))}
    assert orbit(G1, pt(0)) == {pt(0)}


def test_depth_cap_is_reported():
    chart = two_chart_atlas()
    step = Transition("A", "A", parse_fn("piece(1, sign, 0, 1, 1/8) on (0,5/4)"))
    G = MarkedAtlasGroupoid(chart, QuasiPseudogroup((step, step.inverse())))
    assert saturate(G.generators.elements, ObjPoint("A", F(1, 16)), 3).status == "DepthCapped"
    with pytest.raises(DepthCapped):
        orbit(G, ObjPoint("A", F(1, 16)), depth_cap=3)


def test_markings_and_serialization():
    assert marking_value(G1, pt(F(1, 2))) == F(1, 2)
    assert marking_value(G2, pt(F(1, 2), "V2")) == F(1, 4)
    assert serialize(G1) != serialize(G2)
    assert serialize(G1, marked=False) == serialize(G2, marked=False)


def test_recover_round_trip():
    for atlas in (ATLAS_ABS, ATLAS_SQUARE, two_chart_atlas()):
        assert atlases_equal(recover_atlas(serialize(build_groupoid(atlas))), atlas)


def test_recover_rejects_unmarked_or_malformed_text():
    with pytest.raises(MalformedInput):
        recover_atlas(serialize(G1, marked=False))
    with pytest.raises(MalformedInput):
        recover_atlas("not a groupoid")


def test_homs_of_fixture_reps_validate():
    for rep in (constant_rep(False), constant_rep(True), square_lift_rep()):
        src = MarkedAtlasGroupoid(rep.domain, rep.P)
        assert validate_hom(to_hom(rep), src, build_groupoid(rep.range)).ok


def test_induced_orbit_maps():
    rep = square_lift_rep()
    f, ok = induced_orbit_map(to_hom(rep), MarkedAtlasGroupoid(rep.domain, rep.P), G1)
    assert ok and f == rep.f
    zero = constant_rep(False)
    f, ok = induced_orbit_map(to_hom(zero), MarkedAtlasGroupoid(zero.domain, zero.P), G1)
    assert ok and f == zero.f


def test_composite_hom_sends_minus_id_through_both_assignments():
    a, b = to_hom(constant_rep(False)), to_hom(constant_rep(True))
    ab = compose_homs(a, b)
    neg = next(lam for lam in b.generators if lam.name == "-id")
    assert ab.nu(neg).fn == PiecewiseFn.identity(ATLAS_ABS.charts[0].domain)


# Axioms of a groupoid on arrows reachable from sampled objects.


def _arrows_from(G, p, cap=8):
    return saturate(G.generators.elements, p, cap).arrows


def _check_axioms(G, samples):
    for x in samples:
        ux = unit(x)
        assert ux.source == x == ux.target
        for f in _arrows_from(G, x):
            y = f.target
            assert multiply(unit(y), f) == f and multiply(f, ux) == f
            inv = inverse(f)
            assert inv.source == y and inv.target == x
            assert multiply(f, inv) == unit(y) and multiply(inv, f) == ux
            for g in _arrows_from(G, y):
                gf = multiply(g, f)
                assert gf.source == x and gf.target == g.target
                for h in _arrows_from(G, g.target):
                    assert multiply(h, gf) == multiply(multiply(h, g), f)


def _oracle_isotropy(chart, x) -> int:
    return sum(1 for g in chart.group if g(x) == x)


@given(st.integers(0, 10**6), st.booleans())
def test_groupoid_axioms_on_random_reflection_atlases(seed, square):
    rng = random.Random(seed)
    atlas = shifted_reflection_atlas(rng, square)
    G = build_groupoid(atlas)
    samples = []
    for c in atlas.charts:
        samples += [ObjPoint(c.id, c.domain.midpoint()), ObjPoint(c.id, c.fundamental.lo)]
    samples = [p for p in samples if atlas.chart(p.chart).domain.contains(p.x)]
    _check_axioms(G, samples)
    for p in samples:
        got, status = arrows_between(G, p, p)
        assert status == "Saturated"
        assert len(got) == _oracle_isotropy(atlas.chart(p.chart), p.x)
