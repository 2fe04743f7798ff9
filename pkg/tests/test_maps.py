from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbifoldkit.charts import Embedding, restrict_chart
from orbifoldkit.errors import AtlasChainMismatch, ImageNotContained, NotLocalDiffeo
from orbifoldkit.fixtures import (
    ATLAS_ABS,
    ATLAS_SQUARE,
    HALF_LINE,
    ID,
    NEG,
    SQUARE,
    V1,
    V2,
    constant_rep,
    identity_lifts,
    restriction_identity_lift,
    sqrt_carrier_map,
    sqrt_lift_candidates,
    square_lift_rep,
    two_chart_atlas,
)
from orbifoldkit.groupoid import (
    GermArrow,
    MarkedAtlasGroupoid,
    ObjPoint,
    QuasiPseudogroup,
    Transition,
    build_groupoid,
    compose_homs,
)
from orbifoldkit.maps import (
    ChartedMap,
    EquivalenceWitness,
    HomCertificate,
    LocalLift,
    MapRep,
    NoRefutation,
    Unknown,
    common_refinement_witness,
    complete_identity_lift,
    compose_orbifold_maps,
    compose_reps,
    from_hom,
    identity_rep,
    induce_charted_map,
    induce_local_lift,
    is_identity_lift,
    is_unit_weak_equivalence,
    refute_hom_equivalence,
    representatives_equivalent,
    to_hom,
    validate_representative,
    verify_equivalence_witness,
    verify_local_lift,
)
from orbifoldkit.refinement import restriction_atlas
from orbifoldkit.symfun import Interval, PiecewiseFn, germ_at, identity_germ, parse_fn
from strategies import induced_constant, restriction

N1, N2, SQ = constant_rep(False), constant_rep(True), square_lift_rep()
HALF = Interval.open(F(-1, 2), F(1, 2))
POS = Interval.open(0, 1)


def groupoids(rep: MapRep):
    return MarkedAtlasGroupoid(rep.domain, rep.P), build_groupoid(rep.range)


def test_local_lift_examples():
    zero = PiecewiseFn.constant(0, HALF_LINE)
    assert verify_local_lift(PiecewiseFn.constant(0, V1.domain), zero, V1, V1).ok
    assert verify_local_lift(SQUARE, PiecewiseFn.identity(HALF_LINE), V2, V1).ok
    for cand in sqrt_lift_candidates():
        lines = verify_local_lift(cand, sqrt_carrier_map(), V1, V1).lines()
        assert any("NotSmooth(0" in line for line in lines)


def test_representative_examples():
    assert validate_representative(N1).ok
    assert validate_representative(N2).ok
    shift = Transition("V1", "V1", parse_fn("piece(1, sign, 0, 1, 1/2) on (-1,1/2)"), "s")
    bad = MapRep(N1.f, N1.lifts, N1.domain, N1.range, N1.P,
                 (N1.nu[0], (N1.nu[1][0], shift)))
    assert validate_representative(bad).status == "fail"


def test_f1_examples():
    x = F(1, 2)
    neg = N1.P.elements[1]
    phi, psi = to_hom(N1), to_hom(N2)
    assert phi.on_generator_germ(neg, x).germ == identity_germ(F(0))
    assert psi.on_generator_germ(neg, x).germ == germ_at(NEG, 0)


def test_identity_rep_maps_to_identity_hom():
    atlas = two_chart_atlas()
    h = to_hom(identity_rep(atlas))
    assert all(c.source == c.target and c.fn == atlas.chart(c.source).identity for c in h.obj_map)
    assert all(lam.fn == mu.fn for lam, mu in h.arrow_map)
    back = from_hom(h, *groupoids(identity_rep(atlas).rep))
    assert representatives_equivalent(back, identity_rep(atlas))


def test_f2_inverts_f1_on_fixture_reps():
    for rep in (N1, N2, SQ):
        back = from_hom(to_hom(rep), *groupoids(rep))
        assert representatives_equivalent(back, rep)
        assert to_hom(back).arrow_map == to_hom(rep).arrow_map


def test_representative_equivalence_examples():
    assert not representatives_equivalent(N1, N2)
    assert representatives_equivalent(N1, N1)
    lam = Transition("V2", "V2", NEG.restrict(POS), "-id+")
    nu = Transition("V1", "V1", ID.restrict(POS), "id+")
    bigger = MapRep(SQ.f, SQ.lifts, SQ.domain, SQ.range,
                    QuasiPseudogroup(SQ.P.elements + (lam, lam.inverse())),
                    SQ.nu + ((lam, nu), (lam.inverse(), nu)))
    assert validate_representative(bigger).ok
    assert representatives_equivalent(bigger, SQ)


def test_induce_local_lift_examples():
    incl = Embedding("P", "V2", PiecewiseFn.identity(POS))
    into = Embedding("P1", "V1", PiecewiseFn.identity(POS))
    got = induce_local_lift(LocalLift(SQUARE, "V2", "V1"), incl, into)
    assert got.fn == SQUARE.restrict(POS)
    short = Embedding("P1", "V1", PiecewiseFn.identity(Interval.open(F(1, 2), 1)))
    with pytest.raises(ImageNotContained):
        induce_local_lift(LocalLift(SQUARE, "V2", "V1"), incl, short)


def test_complete_identity_lift_examples():
    assert is_identity_lift(complete_identity_lift([LocalLift(ID, "V1", "V1")], ATLAS_ABS, ATLAS_ABS))
    flipped = complete_identity_lift([LocalLift(NEG, "V1", "V1")], ATLAS_ABS, ATLAS_ABS)
    assert validate_representative(flipped).ok
    with pytest.raises(NotLocalDiffeo):
        complete_identity_lift([LocalLift(SQUARE, "V2", "V1")], ATLAS_SQUARE, ATLAS_ABS)


def test_identity_lift_examples():
    assert is_identity_lift(identity_rep(ATLAS_ABS))
    assert not is_identity_lift(SQ)
    assert not is_identity_lift(N1)


def test_induced_maps():
    atlas, incl = restriction_atlas(ATLAS_ABS, [("V1", HALF, "S"), ("V1", Interval.open(F(1, 4), 1), "T")], "R")
    s = atlas.chart("S")
    mu = Embedding("S", "V1", PiecewiseFn.identity(HALF))
    ind = induce_charted_map(N1, atlas, incl, [s], {"S": mu, "T": mu})
    assert validate_representative(ind).ok
    assert all(lift.fn == PiecewiseFn.constant(0, atlas.chart(lift.src_chart).domain) for lift in ind.rep.lifts)
    assert isinstance(common_refinement_witness(N1, ind), EquivalenceWitness)

    half, hincl = restriction_atlas(ATLAS_SQUARE, [("V2", HALF, "A"), ("V2", POS, "B"), ("V2", Interval.open(-1, 0), "C")], "H")
    stay = Embedding("V1", "V1", ID)
    sq = induce_charted_map(SQ, half, hincl, [V1], {w: stay for w in half.ids()}, ATLAS_ABS)
    assert sq.rep.lift("B").fn == SQUARE.restrict(POS)
    assert validate_representative(sq).ok


def test_composition_examples():
    c = compose_reps(N2, N2)
    assert validate_representative(c).ok
    assert representatives_equivalent(c, N2)
    assert representatives_equivalent(compose_reps(N1, N2), N1)
    ident = identity_rep(ATLAS_ABS)
    assert representatives_equivalent(compose_reps(ident, N1), N1)
    assert representatives_equivalent(compose_reps(N1, ident), N1)
    with pytest.raises(AtlasChainMismatch):
        compose_reps(SQ, N1)


def test_composition_is_associative():
    a = compose_reps(N1, compose_reps(N2, SQ))
    b = compose_reps(compose_reps(N1, N2), SQ)
    assert representatives_equivalent(a, b)


def test_composition_across_atlases():
    lift = identity_lifts()[1]
    comp = compose_orbifold_maps(lift, N1)
    assert validate_representative(comp).ok
    assert isinstance(common_refinement_witness(comp, N1), EquivalenceWitness)


def test_witness_examples():
    ident = identity_rep(ATLAS_ABS)
    trivial = EquivalenceWitness(ident, ident, ident, ident, ChartedMap(N1))
    assert verify_equivalence_witness(N1, N1, trivial)
    assert not verify_equivalence_witness(N1, N2, trivial)
    a, b = identity_lifts()[:2]
    w = common_refinement_witness(a, b)
    assert verify_equivalence_witness(a, b, w)
    assert verify_equivalence_witness(b, a, w.mirrored())
    mismatched = EquivalenceWitness(w.eps1, w.eps2, w.eps1p, w.eps2p, ChartedMap(N1))
    assert not verify_equivalence_witness(a, b, mismatched)
    assert isinstance(common_refinement_witness(N1, N2), Unknown)


def test_unit_weak_equivalence_examples():
    v = is_unit_weak_equivalence(to_hom(identity_rep(ATLAS_ABS)), *groupoids(identity_rep(ATLAS_ABS).rep))
    assert v.via_f2 and v.agree
    for rep in (SQ, N1):
        v = is_unit_weak_equivalence(to_hom(rep), *groupoids(rep))
        assert not v.via_f2 and v.agree


def test_refuter_examples():
    got = refute_hom_equivalence(to_hom(N1), to_hom(N2), N1.domain, N2.domain)
    assert isinstance(got, HomCertificate)
    assert got.text() == "Certificate at 0: isotropy-image sizes 1 vs 2"
    assert isinstance(refute_hom_equivalence(to_hom(N1), to_hom(N1), N1.domain, N1.domain), NoRefutation)
    a, b = identity_lifts()[:2]
    assert not refute_hom_equivalence(to_hom(a), to_hom(b), a.rep.domain, b.rep.domain)


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_random_identity_lifts_round_trip(seed):
    _, _, e = restriction(random.Random(seed), "R")
    assert is_identity_lift(e)
    back = from_hom(to_hom(e), *groupoids(e.rep))
    assert representatives_equivalent(back, e)


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.booleans())
def test_functoriality(seed, flip):
    _, ind = induced_constant(random.Random(seed), "R", flip)
    for g in (N1, N2, identity_rep(ATLAS_ABS)):
        assert to_hom(compose_reps(g, ind)) == compose_homs(to_hom(g), to_hom(ind))


@settings(max_examples=10)
@given(st.integers(0, 10**6), st.booleans())
def test_witness_symmetry_and_refuter_soundness(seed, flip):
    m, ind = induced_constant(random.Random(seed), "R", flip)
    w = common_refinement_witness(m, ind)
    assert isinstance(w, EquivalenceWitness)
    assert verify_equivalence_witness(m, ind, w)
    assert verify_equivalence_witness(ind, m, w.mirrored())
    assert not refute_hom_equivalence(to_hom(m), to_hom(ind), m.domain, ind.rep.domain)
