"""Scenario files: ``[kind id]`` blocks of ``key = value`` lines plus a ``[commands]`` block.

Example::

    [space Q]
    carrier = [0,1)

    [chart V1]
    domain = (-1,1)
    group = id ; neg
    proj = piece(1, 1, 0, 1, 0) on (-1,1)

    [commands]
    validate V1

Functions are written in the canonical piece syntax or named by a
``[fn id]`` block.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from orbifoldkit.charts import Atlas, Chart, Embedding, Space, fundamental_domain
from orbifoldkit.errors import OrbifoldKitError, ParseError, UnknownId
from orbifoldkit.groupoid import GroupoidHom, ObjComponent, QuasiPseudogroup, Transition
from orbifoldkit.maps import LocalLift, MapRep, complete_identity_lift
from orbifoldkit.refinement import restriction_atlas
from orbifoldkit.symfun import PiecewiseFn, parse_domain, parse_fn, parse_interval

KINDS = ("space", "fn", "chart", "atlas", "rep", "idlift", "hom", "witness")
_HEADER = re.compile(r"^\[\s*([a-z]+)(?:\s+([A-Za-z_][\w.'-]*))?\s*\]$")
_ID = re.compile(r"^[A-Za-z_][\w.'-]*$")


@dataclass
class Block:
    kind: str
    id: str
    line: int
    entries: list[tuple[str, str, int]] = field(default_factory=list)

    def get(self, key: str, required: bool = True) -> tuple[str, int] | None:
        for k, v, n in self.entries:
            if k == key:
                return v, n
        if required:
            raise ParseError(self.line, f"'{key} = ...' in [{self.kind} {self.id}]")
        return None

    def all(self, key: str) -> list[tuple[str, int]]:
        return [(v, n) for k, v, n in self.entries if k == key]


@dataclass
class Scenario:
    path: str
    blocks: list[Block]
    commands: list[tuple[str, int]]


def parse_scenario(text: str, path: str = "<string>") -> Scenario:
    blocks: list[Block] = []
    commands: list[tuple[str, int]] = []
    current: Block | None = None
    in_commands = False
    seen: set[str] = set()
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            m = _HEADER.match(line)
            if not m:
                raise ParseError(n, "a block header like [chart V1]", line)
            kind, bid = m.group(1), m.group(2)
            if kind == "commands":
                in_commands, current = True, None
                continue
            if kind not in KINDS or bid is None:
                raise ParseError(n, f"one of {', '.join(KINDS)} with an id", line)
            if bid in seen:
                raise ParseError(n, f"a fresh id ({bid} is already declared)", line)
            seen.add(bid)
            in_commands = False
            current = Block(kind, bid, n)
            blocks.append(current)
            continue
        if in_commands:
            commands.append((line, n))
            continue
        if current is None:
            raise ParseError(n, "a block header", line)
        key, eq, value = line.partition("=")
        if not eq or not key.strip():
            raise ParseError(n, "key = value", line)
        current.entries.append((key.strip(), value.strip(), n))
    return Scenario(path, blocks, commands)


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    return parse_scenario(p.read_text(), str(p))


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class HomEntry:
    hom: GroupoidHom
    source: Atlas
    target: Atlas


class Registry:
    """Declared objects by id, built in file order."""

    def __init__(self, base: Path | None = None):
        self.items: dict[str, object] = {}
        self.base = base or Path(".")

    def put(self, key: str, value: object) -> None:
        self.items[key] = value

    def get(self, key: str, kind: type | tuple[type, ...], line: int = 0):
        if key not in self.items:
            raise UnknownId(f"line {line}: unknown id {key!r}")
        value = self.items[key]
        if not isinstance(value, kind):
            raise UnknownId(f"line {line}: {key!r} is a {type(value).__name__}")
        return value

    def fn(self, text: str, line: int) -> PiecewiseFn:
        text = text.strip()
        if _ID.match(text) and text not in ("empty",):
            return self.get(text, PiecewiseFn, line)
        try:
            return parse_fn(text)
        except (ValueError, OrbifoldKitError) as exc:
            raise ParseError(line, "a function", text) from exc


def _transition(reg: Registry, text: str, line: int) -> Transition:
    """``SRC -> DST : FN``, optionally prefixed by ``NAME :``."""
    parts = [p.strip() for p in text.split(":")]
    name = ""
    if len(parts) == 3:
        name, head, fn = parts
    elif len(parts) == 2:
        head, fn = parts
    else:
        raise ParseError(line, "SRC -> DST : FN", text)
    src, arrow, dst = head.partition("->")
    if not arrow:
        raise ParseError(line, "SRC -> DST", head)
    return Transition(src.strip(), dst.strip(), reg.fn(fn, line), name)


def _pair(reg: Registry, text: str, line: int) -> tuple[Transition, Transition]:
    left, arrow, right = text.partition("=>")
    if not arrow:
        raise ParseError(line, "TRANSITION => TRANSITION", text)
    return _transition(reg, left, line), _transition(reg, right, line)


def _ids(text: str) -> list[str]:
    return [t.strip() for t in re.split(r"[,\s]+", text) if t.strip()]


def build(scenario: Scenario, base: Path | None = None) -> Registry:
    reg = Registry(base)
    for b in scenario.blocks:
        try:
            reg.put(b.id, _BUILDERS[b.kind](reg, b))
        except (ParseError, UnknownId):
            raise
        except (ValueError, KeyError, OrbifoldKitError) as exc:
            raise ParseError(b.line, f"a well-formed [{b.kind} {b.id}] block", str(exc)) from exc
    return reg


def _interval(text: str, line: int):
    try:
        return parse_interval(text)
    except ValueError as exc:
        raise ParseError(line, "an interval like (-1,1)", text) from exc


def _space(reg: Registry, b: Block):
    text, n = b.get("carrier")
    try:
        return Space(parse_domain(text))
    except ValueError as exc:
        raise ParseError(n, "an interval union", text) from exc


def _fn(reg: Registry, b: Block):
    text, n = b.get("value")
    return reg.fn(text, n)


def _chart(reg: Registry, b: Block):
    dom_text, n = b.get("domain")
    domain = _interval(dom_text, n)
    group = [PiecewiseFn.identity(domain)]
    got = b.get("group", required=False)
    if got:
        for item in got[0].split(";"):
            item = item.strip()
            if item == "id":
                continue
            if item == "neg":
                group.append(PiecewiseFn.affine(-1, 0, domain))
            else:
                group.append(reg.fn(item, got[1]))
    proj_text, pn = b.get("proj")
    proj = reg.fn(proj_text, pn)
    fd = b.get("fundamental", required=False)
    fundamental = _interval(*fd) if fd else fundamental_domain(domain, group)
    return Chart(b.id, domain, tuple(group), proj, fundamental)


def _atlas(reg: Registry, b: Block):
    base = b.get("base", required=False)
    if base:
        parent = reg.get(base[0], Atlas, base[1])
        specs = []
        for text, n in b.all("restrict"):
            m = re.match(r"^(\S+)\s+(\S+)\s+as\s+(\S+)$", text)
            if not m:
                raise ParseError(n, "CHART INTERVAL as NEWID", text)
            specs.append((m.group(1), _interval(m.group(2), n), m.group(3)))
        atlas, _ = restriction_atlas(parent, specs, b.id)
        return atlas
    space_id, n = b.get("space")
    space = reg.get(space_id, Space, n)
    text, n = b.get("charts")
    charts = tuple(reg.get(c, Chart, n) for c in _ids(text))
    witnesses = []
    for text, n in b.all("witness"):
        t = _transition(reg, text, n)
        witnesses.append(Embedding(t.source, t.target, t.fn))
    return Atlas(charts, tuple(witnesses), space, b.id)


def _lifts(reg: Registry, b: Block) -> list[LocalLift]:
    out = []
    for text, n in b.all("lift"):
        t = _transition(reg, text, n)
        out.append(LocalLift(t.fn, t.source, t.target))
    return out


def _rep_block(reg: Registry, b: Block):
    dom, n1 = b.get("domain")
    rng, n2 = b.get("range")
    f_text, n3 = b.get("f")
    pairs = tuple(_pair(reg, text, n) for text, n in b.all("gen"))
    return MapRep(reg.fn(f_text, n3), tuple(_lifts(reg, b)), reg.get(dom, Atlas, n1),
                  reg.get(rng, Atlas, n2), QuasiPseudogroup(tuple(p for p, _ in pairs)), pairs)


def _idlift(reg: Registry, b: Block):
    dom, n1 = b.get("domain")
    rng, n2 = b.get("range")
    return complete_identity_lift(_lifts(reg, b), reg.get(dom, Atlas, n1), reg.get(rng, Atlas, n2))


def _hom(reg: Registry, b: Block):
    src, n1 = b.get("source")
    dst, n2 = b.get("target")
    objs = []
    for text, n in b.all("obj"):
        t = _transition(reg, text, n)
        objs.append(ObjComponent(t.source, t.target, t.fn))
    arrows = tuple(_pair(reg, text, n) for text, n in b.all("arrow"))
    return HomEntry(GroupoidHom(tuple(objs), arrows), reg.get(src, Atlas, n1), reg.get(dst, Atlas, n2))


def _witness(reg: Registry, b: Block):
    from orbifoldkit.maps import ChartedMap, EquivalenceWitness

    def m(key):
        text, n = b.get(key)
        got = reg.get(text, (MapRep, ChartedMap), n)
        return got if isinstance(got, ChartedMap) else ChartedMap(got)

    return EquivalenceWitness(m("eps1"), m("eps2"), m("eps1p"), m("eps2p"), m("bridge"))


_BUILDERS = {
    "space": _space, "fn": _fn, "chart": _chart, "atlas": _atlas, "rep": _rep_block,
    "idlift": _idlift, "hom": _hom, "witness": _witness,
}
