"""``orbifoldkit run``: execute scenario files and report per-command outcomes."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from orbifoldkit.charts import Atlas, Chart, Compatible, Incompatible, charts_compatible, validate_atlas, validate_chart
from orbifoldkit.dsl import HomEntry, Registry, build, load_scenario, parse_scenario
from orbifoldkit.errors import CommandError, OrbifoldKitError, ParseError, UnknownId
from orbifoldkit.groupoid import (
    DEFAULT_DEPTH_CAP,
    MarkedAtlasGroupoid,
    ObjPoint,
    QuasiPseudogroup,
    arrows_between,
    atlases_equal,
    build_groupoid,
    marking_value,
    recover_atlas,
    serialize,
    validate_hom,
)
from orbifoldkit.maps import (
    ChartedMap,
    EquivalenceWitness,
    MapRep,
    common_refinement_witness,
    compose_orbifold_maps,
    from_hom,
    identity_lift_failure,
    is_unit_weak_equivalence,
    refute_hom_equivalence,
    representative_difference,
    to_hom,
    validate_representative,
    verify_equivalence_witness,
    witness_failure,
)
from orbifoldkit.symfun import parse_frac
from orbifoldkit.symfun.values import fmt_frac

PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"


@dataclass
class CommandResult:
    command: str
    outcome: str
    details: dict = field(default_factory=dict)

    def as_json(self) -> dict:
        return {"command": self.command, "outcome": self.outcome, "details": self.details}


@dataclass
class ScenarioReport:
    path: str
    results: list[CommandResult]
    error: str | None = None

    def exit_code(self, allow_unknown: bool = False) -> int:
        if self.error:
            return 2
        bad = {FAIL} if allow_unknown else {FAIL, UNKNOWN}
        return int(any(r.outcome in bad for r in self.results))

    def as_json(self) -> dict:
        out = {"path": self.path, "commands": [r.as_json() for r in self.results]}
        if self.error:
            out["error"] = self.error
        return out


@dataclass
class Context:
    reg: Registry
    depth_cap: int
    files: dict[str, str] = field(default_factory=dict)


def _split(text: str) -> tuple[str, list[str], dict[str, str]]:
    words = text.split()
    args = [w for w in words[1:] if "=" not in w]
    opts = dict(w.split("=", 1) for w in words[1:] if "=" in w)
    return words[0], args, opts


def _bool(text: str, line: int) -> bool:
    if text.lower() in ("true", "yes"):
        return True
    if text.lower() in ("false", "no"):
        return False
    raise ParseError(line, "expect=true|false", text)


def _judge(actual: str, expect: str | None) -> str:
    """Outcome of an assertion; an undecided result stays unknown."""
    if actual == UNKNOWN:
        return UNKNOWN
    if expect is None:
        return PASS if actual in (PASS, "true") else FAIL
    return PASS if actual == expect else FAIL


def _need(args: list[str], n: int, usage: str, line: int) -> list[str]:
    if len(args) != n:
        raise ParseError(line, usage, " ".join(args))
    return args


def _as_map(ctx: Context, key: str, line: int) -> MapRep | ChartedMap:
    return ctx.reg.get(key, (MapRep, ChartedMap), line)


def _hom_groupoids(e: HomEntry) -> tuple[MarkedAtlasGroupoid, MarkedAtlasGroupoid]:
    return MarkedAtlasGroupoid(e.source, QuasiPseudogroup(e.hom.generators)), build_groupoid(e.target)


def _obj(text: str, line: int) -> ObjPoint:
    cid, sep, x = text.rpartition(":")
    if not sep:
        raise ParseError(line, "CHART:x", text)
    return ObjPoint(cid, parse_frac(x))


# ---------------------------------------------------------------- commands


def cmd_validate(ctx, args, opts, line):
    (key,) = _need(args, 1, "validate ID", line)
    obj = ctx.reg.get(key, (Chart, Atlas, MapRep, ChartedMap, HomEntry), line)
    if isinstance(obj, Chart):
        report = validate_chart(obj)
    elif isinstance(obj, Atlas):
        report = validate_atlas(obj, depth_cap=ctx.depth_cap)
    elif isinstance(obj, HomEntry):
        report = validate_hom(obj.hom, *_hom_groupoids(obj))
    else:
        report = validate_representative(obj, depth_cap=ctx.depth_cap)
    return _judge(report.status, opts.get("expect")), {"status": report.status, "findings": report.lines()}


def cmd_check_compat(ctx, args, opts, line):
    a, b = (ctx.reg.get(k, Chart, line) for k in _need(args, 2, "check-compat A B", line))
    res = charts_compatible(a, b)
    if isinstance(res, Compatible):
        actual = "compatible"
    elif isinstance(res, Incompatible):
        actual = "incompatible"
    else:
        actual = UNKNOWN
    details = {"result": res.text()}
    if isinstance(res, Incompatible):
        cert = res.certificate
        details["point"] = [fmt_frac(cert.x), fmt_frac(cert.y)]
        details["candidates"] = [c.verdict.text() for c in cert.candidates]
        details["reverse"] = [c.verdict.text() for c in cert.reverse]
    expect = opts.get("expect")
    if expect is None:
        return {"compatible": PASS, "incompatible": FAIL}.get(actual, UNKNOWN), details
    return _judge(actual, expect), details


def cmd_build_groupoid(ctx, args, opts, line):
    (key,) = _need(args, 1, "build-groupoid A out=FILE", line)
    atlas = ctx.reg.get(key, Atlas, line)
    marked = opts.get("marked", "true") != "false"
    text = serialize(build_groupoid(atlas), marked=marked)
    if "out" in opts:
        ctx.files[opts["out"]] = text
    return PASS, {"groupoid": text}


def cmd_recover(ctx, args, opts, line):
    (name,) = _need(args, 1, "recover FILE expect=A", line)
    atlas = recover_atlas(_file(ctx, name, line))
    details = {"charts": len(atlas.charts)}
    if "expect" not in opts:
        return PASS, details
    same = atlases_equal(atlas, ctx.reg.get(opts["expect"], Atlas, line))
    return (PASS if same else FAIL), {**details, "equal": same}


def _file(ctx: Context, name: str, line: int) -> str:
    if name in ctx.files:
        return ctx.files[name]
    path = ctx.reg.base / name
    if not path.is_file():
        raise UnknownId(f"line {line}: no groupoid file {name!r}")
    return path.read_text()


def cmd_same_groupoid(ctx, args, opts, line):
    a, b = (_file(ctx, k, line) for k in _need(args, 2, "same-groupoid FILE FILE", line))
    same = "true" if a == b else "false"
    return _judge(same, str(_bool(opts.get("expect", "true"), line)).lower()), {"identical": a == b}


def cmd_f1(ctx, args, opts, line):
    (key,) = _need(args, 1, "f1 REP out=HOM", line)
    m = _as_map(ctx, key, line)
    rep = m.rep if isinstance(m, ChartedMap) else m
    h = to_hom(rep)
    if "out" in opts:
        ctx.reg.put(opts["out"], HomEntry(h, rep.domain, rep.range))
    return PASS, {"hom": h.text()}


def cmd_f2(ctx, args, opts, line):
    (key,) = _need(args, 1, "f2 HOM out=REP", line)
    e = ctx.reg.get(key, HomEntry, line)
    rep = from_hom(e.hom, *_hom_groupoids(e))
    if "out" in opts:
        ctx.reg.put(opts["out"], rep)
    return PASS, {"rep": rep.text()}


def cmd_reps_equal(ctx, args, opts, line):
    a, b = (_as_map(ctx, k, line) for k in _need(args, 2, "reps-equal R1 R2", line))
    diff = representative_difference(a, b)
    actual = "true" if diff is None else "false"
    expect = opts.get("expect")
    details = {"equal": diff is None, "difference": diff or ""}
    if expect is None:
        return (PASS if diff is None else FAIL), details
    return _judge(actual, str(_bool(expect, line)).lower()), details


def cmd_compose(ctx, args, opts, line):
    g, f = (_as_map(ctx, k, line) for k in _need(args, 2, "compose G F out=H", line))
    h = compose_orbifold_maps(g, f)
    if "out" in opts:
        ctx.reg.put(opts["out"], h)
    return PASS, {"domain": h.domain_id, "range": h.range_id, "rep": h.text()}


def cmd_check_idlift(ctx, args, opts, line):
    (key,) = _need(args, 1, "check-idlift M", line)
    why = identity_lift_failure(_as_map(ctx, key, line))
    actual = "true" if why is None else "false"
    expect = str(_bool(opts.get("expect", "true"), line)).lower()
    return _judge(actual, expect), {"identity_lift": why is None, "reason": why or ""}


def cmd_check_uwe(ctx, args, opts, line):
    (key,) = _need(args, 1, "check-uwe HOM", line)
    e = ctx.reg.get(key, HomEntry, line)
    v = is_unit_weak_equivalence(e.hom, *_hom_groupoids(e))
    details = {"via_f2": v.via_f2, "structural": v.structural, "reason": v.reason}
    if not v.agree:
        return FAIL, {**details, "error": "the two checks disagree"}
    expect = str(_bool(opts.get("expect", "true"), line)).lower()
    return _judge("true" if v.via_f2 else "false", expect), details


def _witness_details(w: EquivalenceWitness) -> dict:
    return {"W": w.eps1.domain_id, "W'": w.eps1p.domain_id, "bridge": w.bridge.text()}


def cmd_equiv(ctx, args, opts, line):
    a, b = (_as_map(ctx, k, line) for k in _need(args, 2, "equiv F1 F2 witness=W|auto", line))
    which = opts.get("witness", "auto")
    if which == "auto":
        w = common_refinement_witness(a, b)
        if not isinstance(w, EquivalenceWitness):
            return UNKNOWN, {"result": w.text()}
        return PASS, {"result": "witness found", **_witness_details(w)}
    w = ctx.reg.get(which, EquivalenceWitness, line)
    why = witness_failure(a, b, w)
    ok = why is None and verify_equivalence_witness(a, b, w)
    return (PASS if ok else FAIL), {"result": "witness verified" if ok else "witness rejected",
                                    "reason": why or ""}


def cmd_refute_equiv(ctx, args, opts, line):
    a, b = (ctx.reg.get(k, HomEntry, line) for k in _need(args, 2, "refute-equiv H1 H2", line))
    res = refute_hom_equivalence(a.hom, b.hom, a.source, b.source, ctx.depth_cap)
    actual = "certificate" if res else "none"
    expect = opts.get("expect")
    if expect not in (None, "certificate", "none"):
        raise ParseError(line, "expect=certificate|none", expect)
    details = {"result": res.text()}
    if res:
        details.update(q=fmt_frac(res.q), sizes=[res.first_size, res.second_size])
    if expect is None:
        return PASS, details
    return (PASS if actual == expect else FAIL), details


def cmd_arrows(ctx, args, opts, line):
    key, x, y = _need(args, 3, "arrows A CHART:x CHART:y", line)
    G = build_groupoid(ctx.reg.get(key, Atlas, line))
    arrows, status = arrows_between(G, _obj(x, line), _obj(y, line), ctx.depth_cap, strict=False)
    details = {"count": len(arrows), "status": status,
               "germs": sorted(a.text() for a in arrows)}
    if status != "Saturated":
        return UNKNOWN, details
    if "expect" not in opts:
        return PASS, details
    return (PASS if len(arrows) == int(opts["expect"]) else FAIL), details


def cmd_marking(ctx, args, opts, line):
    key, x = _need(args, 2, "marking A CHART:x", line)
    value = marking_value(build_groupoid(ctx.reg.get(key, Atlas, line)), _obj(x, line))
    text = fmt_frac(value) if not hasattr(value, "text") else value.text()
    details = {"value": text}
    if "expect" not in opts:
        return PASS, details
    return (PASS if value == parse_frac(opts["expect"]) else FAIL), details


COMMANDS = {
    "validate": cmd_validate,
    "check-compat": cmd_check_compat,
    "build-groupoid": cmd_build_groupoid,
    "recover": cmd_recover,
    "same-groupoid": cmd_same_groupoid,
    "f1": cmd_f1,
    "f2": cmd_f2,
    "reps-equal": cmd_reps_equal,
    "compose": cmd_compose,
    "check-idlift": cmd_check_idlift,
    "check-uwe": cmd_check_uwe,
    "equiv": cmd_equiv,
    "refute-equiv": cmd_refute_equiv,
    "arrows": cmd_arrows,
    "marking": cmd_marking,
}


# ---------------------------------------------------------------- running


def run_text(text: str, path: str = "<string>", depth_cap: int = DEFAULT_DEPTH_CAP,
             base: Path | None = None) -> ScenarioReport:
    try:
        scenario = parse_scenario(text, path)
        ctx = Context(build(scenario, base), depth_cap)
    except (ParseError, UnknownId) as exc:
        return ScenarioReport(path, [], str(exc))
    results = []
    for cmd, line in scenario.commands:
        name, args, opts = _split(cmd)
        handler = COMMANDS.get(name)
        try:
            if handler is None:
                raise ParseError(line, f"one of {', '.join(COMMANDS)}", name)
            outcome, details = handler(ctx, args, opts, line)
        except (ParseError, UnknownId) as exc:
            return ScenarioReport(path, results, str(exc))
        except (OrbifoldKitError, KeyError, ValueError) as exc:
            err = CommandError(f"line {line}: {name}: {type(exc).__name__}: {exc}")
            outcome, details = FAIL, {"error": str(err)}
        results.append(CommandResult(cmd, outcome, details))
    return ScenarioReport(path, results)


def run_scenario(path: str | Path, depth_cap: int = DEFAULT_DEPTH_CAP) -> ScenarioReport:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        return ScenarioReport(str(path), [], f"cannot read {path}: {exc.strerror}")
    return run_text(text, str(path), depth_cap, p.parent)


def bundled_fixtures() -> list[Path]:
    root = resources.files("orbifoldkit") / "scenarios"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".orb"))


def _summary(r: CommandResult) -> str:
    d = r.details
    for key in ("error", "result", "reason", "status", "value", "count"):
        if d.get(key) not in (None, ""):
            return str(d[key])
    return ""


def human_report(report: ScenarioReport) -> str:
    lines = [f"== {report.path}"]
    for r in report.results:
        extra = _summary(r)
        lines.append(f"{r.outcome.upper():7} {r.command}" + (f"  -> {extra}" if extra else ""))
    if report.error:
        lines.append(f"ERROR   {report.error}")
    elif not report.results:
        lines.append("(no commands)")
    return "\n".join(lines)


def json_report(reports: list[ScenarioReport], allow_unknown: bool) -> str:
    doc = {"scenarios": [r.as_json() for r in reports],
           "exit_code": _exit_code(reports, allow_unknown)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _exit_code(reports: list[ScenarioReport], allow_unknown: bool) -> int:
    return max((r.exit_code(allow_unknown) for r in reports), default=0)


def _run_one(args: tuple[str, int]) -> ScenarioReport:
    return run_scenario(*args)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="orbifoldkit")
    sub = parser.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="execute scenario files")
    run.add_argument("scenarios", nargs="*", help="scenario files (.orb)")
    run.add_argument("--bundled", action="store_true", help="also run the bundled fixtures")
    run.add_argument("--json-out", metavar="FILE")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--depth-cap", type=int, default=DEFAULT_DEPTH_CAP)
    run.add_argument("--allow-unknown", action="store_true")
    sub.add_parser("fixtures", help="list the bundled fixture files")
    ns = parser.parse_args(argv)

    if ns.cmd == "fixtures":
        for p in bundled_fixtures():
            print(p)
        return 0

    paths = list(ns.scenarios) + ([str(p) for p in bundled_fixtures()] if ns.bundled else [])
    jobs = [(p, ns.depth_cap) for p in paths]
    if ns.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    for r in reports:
        print(human_report(r))
    code = _exit_code(reports, ns.allow_unknown)
    if ns.json_out:
        Path(ns.json_out).write_text(json_report(reports, ns.allow_unknown))
    return code


if __name__ == "__main__":
    sys.exit(main())
