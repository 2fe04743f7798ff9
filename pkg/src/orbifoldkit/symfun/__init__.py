"""Exact piecewise signed-power maps on rational interval unions."""

from orbifoldkit.symfun.analysis import (
    CriticalPoint,
    Diffeo,
    Fails,
    NotInjectivePair,
    NotSmooth,
    Smooth,
    critical_point,
    is_diffeomorphism,
    is_local_diffeomorphism,
    is_smooth,
)
from orbifoldkit.symfun.forms import IDENTITY, Form, affine, constant
from orbifoldkit.symfun.intervals import INF, DomainSet, Interval, parse_domain, parse_interval
from orbifoldkit.symfun.piecewise import (
    Germ,
    Piece,
    PiecewiseFn,
    compose,
    evaluate,
    find_non_injective_pair,
    germ_at,
    germ_equal,
    identity_germ,
    invert,
)
from orbifoldkit.symfun.text import format_fn, parse_fn
from orbifoldkit.symfun.values import PowerValue, compare, exact_eq, fmt_frac, parse_frac

__all__ = [
    "CriticalPoint", "Diffeo", "DomainSet", "Fails", "Form", "Germ", "IDENTITY", "INF",
    "Interval", "NotInjectivePair", "NotSmooth", "Piece", "PiecewiseFn", "PowerValue", "Smooth",
    "affine", "compare", "compose", "constant", "critical_point", "evaluate", "exact_eq",
    "find_non_injective_pair", "fmt_frac", "format_fn", "germ_at", "germ_equal",
    "identity_germ", "invert", "is_diffeomorphism", "is_local_diffeomorphism", "is_smooth",
    "parse_domain", "parse_fn", "parse_frac", "parse_interval",
]
