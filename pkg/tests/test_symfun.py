from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from orbifoldkit.errors import NotInFragment
from orbifoldkit.symfun import (
    CriticalPoint,
    Diffeo,
    DomainSet,
    Fails,
    Interval,
    PiecewiseFn,
    Smooth,
    compose,
    evaluate,
    exact_eq,
    germ_at,
    germ_equal,
    invert,
    is_diffeomorphism,
    is_smooth,
    parse_domain,
    parse_fn,
    parse_interval,
)
from strategies import centered_powers, fragment_maps, injective_maps, odd_powers

ABS = parse_fn("piece(1, 1, 0, 1, 0) on (-1,1)")
SQUARE = parse_fn("piece(1, 1, 0, 2, 0) on (-1,1)")


def test_interval_text_round_trip():
    for text in ["(-1,1)", "[0,1)", "(1/4,3/4]", "[2,2]"]:
        assert str(parse_interval(text)) == text
    assert str(parse_domain("(0,1) u (1,2)")) == "(0,1) u (1,2)"


def test_domain_set_algebra():
    a = parse_domain("(0,2)")
    b = parse_domain("(1,3)")
    assert str(a.intersect(b)) == "(1,2)"
    assert str(a.union(b)) == "(0,3)"
    assert str(a.difference(b)) == "(0,1]"
    assert DomainSet.empty().is_empty


# Values frozen from an independent mpmath evaluation at 30 digits.
@pytest.mark.parametrize("text, x, expected", [
    ("piece(2, 1, 1, 1/2, 3) on (0,5)", F(9, 4), "5.236067977499789696409174"),
    ("piece(-3, sign, 1, 2/3, 1) on (0,2)", F(7, 4), "-1.476445436670970012905957"),
])
def test_evaluate_irrational_matches_oracle(text, x, expected):
    value = evaluate(parse_fn(text), x)
    assert str(value.sym().evalf(25)) == expected


def test_evaluate_rational_stays_fraction():
    assert evaluate(parse_fn("piece(1, sign, 0, 3, 0) on (-1,1)"), F(-1, 2)) == F(-1, 8)
    assert evaluate(SQUARE, F(1, 2)) == F(1, 4)


def test_compose_examples():
    cube = parse_fn("piece(1, sign, 0, 3, 0) on (-2,2)")
    root = parse_fn("piece(1, sign, 0, 1/3, 0) on (-1,1)")
    assert compose(cube, root) == PiecewiseFn.identity(Interval.open(-1, 1))
    outer = parse_fn("piece(2, sign, 0, 1, 1) on (-5,5)")
    assert compose(outer, SQUARE).text() == "piece(2, 1, 0, 2, 1) on (-1,1)"


def test_misaligned_power_composition_is_refused():
    outer = parse_fn("piece(1, 1, 1, 2, 0) on (-5,5)")
    inner = parse_fn("piece(1, 1, 0, 1/2, 0) on (-1,1)")
    with pytest.raises(NotInFragment):
        compose(outer, inner)


def test_invert_example():
    f = parse_fn("piece(8, sign, 0, 3, 1) on (0,2)")
    assert invert(f).text() == "piece(1/2, sign, 1, 1/3, 0) on (1,65)"


def test_analysis_examples():
    assert is_diffeomorphism(SQUARE) == Fails(CriticalPoint(F(0)))
    assert isinstance(is_diffeomorphism(SQUARE.restrict(Interval.open(0, 1))), Diffeo)
    assert is_smooth(parse_fn("piece(1, 1, 0, 1/2, 0) on (-1,1)")).text() == "NotSmooth(0, order 1 Unbounded)"
    assert is_smooth(ABS).text() == "NotSmooth(0, order 1)"
    assert is_smooth(parse_fn("piece(1, 1, 0, 3, 0) on (-1,1)")).text() == "NotSmooth(0, order 3)"
    assert isinstance(is_smooth(parse_fn("piece(1, sign, 0, 3, 0) on (-1,1)")), Smooth)
    assert isinstance(is_smooth(SQUARE), Smooth)


def test_germ_of_abs_at_zero_has_two_sides():
    g = germ_at(ABS, 0)
    assert g.left != g.right
    assert germ_equal(ABS, ABS.restrict(Interval.open(F(-1, 8), F(1, 8))), 0)
    assert not germ_equal(ABS, PiecewiseFn.identity(Interval.open(-1, 1)), 0)
    assert germ_equal(ABS, PiecewiseFn.identity(Interval.open(-1, 1)), F(1, 2))


@given(fragment_maps())
def test_canonical_text_round_trip(f):
    assert parse_fn(f.text()) == f


@given(centered_powers(), centered_powers(), centered_powers())
def test_compose_is_associative(f, g, h):
    try:
        left = compose(compose(f, g), h)
        right = compose(f, compose(g, h))
    except NotInFragment:
        assume(False)
    assert left == right


@given(injective_maps())
def test_invert_is_an_involution(f):
    try:
        inv = invert(f)
    except NotInFragment:
        assume(False)
    assert invert(inv) == f


@given(odd_powers())
def test_inverse_of_a_diffeomorphism_is_one(f):
    assume(isinstance(is_smooth(f), Smooth) and isinstance(is_diffeomorphism(f), Diffeo))
    try:
        inv = invert(f)
    except NotInFragment:
        assume(False)
    assert isinstance(is_diffeomorphism(inv), Diffeo)


@given(fragment_maps(), fragment_maps(), fragment_maps(), st.data())
def test_germ_equal_is_an_equivalence(f, g, h, data):
    x = data.draw(st.sampled_from(f.breakpoints() + [iv.midpoint() for iv in f.domain]))
    assume(f.domain.contains(x))
    assert germ_equal(f, f, x)
    if g.domain.contains(x):
        assert germ_equal(f, g, x) == germ_equal(g, f, x)
        if h.domain.contains(x) and germ_equal(f, g, x) and germ_equal(g, h, x):
            assert germ_equal(f, h, x)


def _samples(x, radius=F(1, 64)) -> list:
    """Sixteen rationals in a punctured neighborhood of ``x``."""
    return [x + s * radius * j / 8 for s in (-1, 1) for j in range(1, 9)]


@given(fragment_maps(), st.data())
def test_germ_equality_implies_pointwise_equality_nearby(f, data):
    # g agrees with f near x but is altered away from it
    x = data.draw(st.sampled_from([iv.midpoint() for iv in f.domain] + f.breakpoints()))
    assume(f.domain.interior().contains(x))
    delta = F(1, 16)
    near = DomainSet.of([Interval.open(x - delta, x + delta)])
    other = parse_fn(f"piece(7, sign, 0, 1, 5) on {f.domain.hull()}")
    far = other.restrict(f.domain.difference(near))
    g = PiecewiseFn(f.restrict(near).pieces + far.pieces)
    assert germ_equal(f, g, x)
    for p in _samples(x):
        assert exact_eq(evaluate(f, p), evaluate(g, p))
