from __future__ import annotations

import random
from fractions import Fraction as F

from hypothesis import given
from hypothesis import strategies as st

from orbifoldkit.charts import (
    Atlas,
    Chart,
    Compatible,
    Embedding,
    Incompatible,
    NotStable,
    Stable,
    charts_compatible,
    fundamental_domain,
    induced_group_iso,
    restrict_chart,
    stable_isotropy,
    stable_neighborhood,
    validate_atlas,
    validate_chart,
    validate_embedding,
)
from orbifoldkit.fixtures import ATLAS_ABS, ATLAS_SQUARE, ID, NEG, Q, SQUARE, V, V1, V2
from orbifoldkit.symfun import Interval, PiecewiseFn
from strategies import restriction_spec

HALF = Interval.open(F(-1, 2), F(1, 2))


def test_reflection_charts_validate():
    assert validate_chart(V1).ok
    assert validate_chart(V2).ok
    assert str(V1.fundamental) == "[0,1)"


def test_odd_projection_is_not_invariant():
    bad = Chart("X", V, (ID, NEG), ID, fundamental_domain(V, (ID, NEG)))
    lines = validate_chart(bad).lines()
    assert any(line.startswith("group.invariance failed") for line in lines)


def test_stable_isotropy_examples():
    assert len(stable_isotropy(HALF, V1).group) == 2
    assert len(stable_isotropy(Interval.open(0, 1), V1).group) == 1
    got = stable_isotropy(Interval.open(F(-1, 4), F(1, 2)), V1)
    assert isinstance(got, NotStable)
    assert got.element == NEG
    assert str(got.overlap) == "(-1/4,1/4)"


def test_restrictions():
    c = restrict_chart(V2, HALF, "W")
    assert str(c.domain) == "(-1/2,1/2)"
    assert len(c.group) == 2
    assert c.proj == SQUARE.restrict(HALF)
    assert validate_chart(c).ok
    half = restrict_chart(V1, Interval.open(0, 1), "P")
    assert half.group == (PiecewiseFn.identity(Interval.open(0, 1)),)


def test_embeddings():
    p = restrict_chart(V1, Interval.open(0, 1), "P")
    n = restrict_chart(V1, Interval.open(-1, 0), "N")
    atlas = Atlas((V1, p, n), (), Q)
    flip = Embedding("P", "N", PiecewiseFn.affine(-1, 0, Interval.open(0, 1)))
    assert validate_embedding(flip, atlas).ok
    s = restrict_chart(V1, HALF, "S")
    atlas2 = Atlas((V1, s), (), Q)
    pairs = induced_group_iso(Embedding("S", "V1", NEG.restrict(HALF)), atlas2)
    assert [(g.text(), h.text()) for g, h in pairs] == [
        ("piece(1, sign, 0, 1, 0) on (-1/2,1/2)", "piece(1, sign, 0, 1, 0) on (-1,1)"),
        ("piece(-1, sign, 0, 1, 0) on (-1/2,1/2)", "piece(-1, sign, 0, 1, 0) on (-1,1)"),
    ]


def test_square_embedding_into_abs_chart_fails_on_full_domain():
    atlas = Atlas((V1, V2), (), Q)
    assert not validate_embedding(Embedding("V2", "V1", SQUARE), atlas).ok


def test_compatibility():
    res = charts_compatible(V1, V2)
    assert isinstance(res, Incompatible)
    assert [c.verdict.text() for c in res.certificate.candidates] == [
        "Fails(CriticalPoint(0))", "Fails(NotSmooth(0, order 2))",
        "Fails(NotSmooth(0, order 2))", "Fails(CriticalPoint(0))",
    ]
    assert isinstance(charts_compatible(V1, V1), Compatible)
    assert isinstance(charts_compatible(V1, restrict_chart(V1, HALF, "S")), Compatible)


def test_stable_neighborhood_examples():
    assert str(stable_neighborhood(F(1, 2), V1)) == "(3/8,5/8)"
    s = stable_neighborhood(F(0), V1)
    assert s.lo == -s.hi
    assert len(stable_isotropy(s, V1).group) == 2


def test_atlases():
    assert validate_atlas(ATLAS_ABS).ok
    assert validate_atlas(ATLAS_SQUARE).ok
    report = validate_atlas(Atlas((V1, V2), (), Q, "both"))
    assert report.status == "fail"
    assert any("compatible failed" in line for line in report.lines())


def _stabilizer(c: Chart, x) -> int:
    return sum(1 for g in c.group if g(x) == x)


@given(st.integers(0, 10**6), st.fractions(min_value=F(-15, 16), max_value=F(15, 16), max_denominator=32))
def test_stable_neighborhood_has_the_point_isotropy(seed, x):
    c = V1 if seed % 2 else V2
    s = stable_neighborhood(x, c)
    got = stable_isotropy(s, c)
    assert isinstance(got, Stable) and s.contains(x)
    assert len(got.group) == _stabilizer(c, x)


@given(st.integers(0, 10**6))
def test_restrictions_validate_and_stay_compatible(seed):
    rng = random.Random(seed)
    for i, (iv, _) in enumerate(restriction_spec(rng)):
        c = restrict_chart(rng.choice([V1, V2]), iv, f"R{i}")
        assert validate_chart(c).ok
        assert isinstance(charts_compatible(c, c), Compatible)


@given(st.integers(0, 10**6))
def test_compatibility_is_symmetric(seed):
    rng = random.Random(seed)
    spec = restriction_spec(rng)
    a = restrict_chart(rng.choice([V1, V2]), spec[0][0], "A")
    b = restrict_chart(rng.choice([V1, V2]), spec[-1][0], "B")
    assert isinstance(charts_compatible(a, b), Compatible) == isinstance(charts_compatible(b, a), Compatible)
