"""Canonical text form: ``piece(a, eps, h, r, k) on (lo,hi) | ...``."""

from __future__ import annotations

import re

from orbifoldkit.symfun.forms import Form, canonical
from orbifoldkit.symfun.intervals import parse_interval
from orbifoldkit.symfun.piecewise import PiecewiseFn, Piece
from orbifoldkit.symfun.values import parse_frac

_PIECE_RE = re.compile(
    r"^\s*piece\(\s*([^,]+),\s*(1|sign)\s*,\s*([^,]+),\s*([^,]+),\s*([^)]+)\)\s+on\s+(.+?)\s*$"
)


def parse_form(a: str, eps: str, h: str, r: str, k: str) -> Form:
    return canonical(Form(parse_frac(a), eps == "sign", parse_frac(h), parse_frac(r), parse_frac(k)))


def parse_piece(text: str) -> Piece:
    m = _PIECE_RE.match(text)
    if not m:
        raise ValueError(f"bad piece {text!r}")
    form = parse_form(*m.group(1, 2, 3, 4, 5))
    return Piece(form, parse_interval(m.group(6)))


def parse_fn(text: str) -> PiecewiseFn:
    text = text.strip()
    if text == "empty":
        return PiecewiseFn.empty()
    return PiecewiseFn(tuple(parse_piece(part) for part in text.split("|")))


def format_fn(f: PiecewiseFn) -> str:
    return f.text()
