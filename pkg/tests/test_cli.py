from __future__ import annotations

import json
import re

import pytest

from orbifoldkit.cli import bundled_fixtures, json_report, main, run_scenario, run_text
from orbifoldkit.dsl import parse_scenario
from orbifoldkit.errors import ParseError

FIXTURES = bundled_fixtures()


def by_name(name: str):
    return next(p for p in FIXTURES if p.name == name)


def test_fixtures_are_bundled():
    names = {p.name for p in FIXTURES}
    assert {"incompatible_charts.orb", "distinct_homs.orb", "arrow_table.orb", "no_sqrt_lift.orb"} <= names


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.name)
def test_bundled_fixture_passes_its_assertions(path):
    report = run_scenario(path)
    assert report.error is None
    assert [r.outcome for r in report.results] == ["pass"] * len(report.results)
    assert report.exit_code() == 0


def test_incompatible_charts_reports_incompatible():
    report = run_scenario(by_name("incompatible_charts.orb"))
    res = next(r for r in report.results if r.command.startswith("check-compat V1 V2"))
    assert res.details["result"].startswith("Incompatible(at (0,0)")
    assert res.outcome == "pass"


def test_distinct_homs_reports_certificate():
    report = run_scenario(by_name("distinct_homs.orb"))
    res = next(r for r in report.results if r.command.startswith("refute-equiv PHI PSI"))
    assert res.details["result"] == "Certificate at 0: isotropy-image sizes 1 vs 2"


def test_empty_scenario():
    report = run_text("", "empty.orb")
    assert report.results == [] and report.exit_code() == 0


def test_replay_is_byte_identical():
    path = by_name("identity_lifts.orb")
    assert json_report([run_scenario(path)], False) == json_report([run_scenario(path)], False)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as exc:
        parse_scenario("[chart V1]\ndomain (-1,1)\n")
    assert exc.value.line == 2
    report = run_text("[space Q]\ncarrier = [0,1)\n[space Q]\ncarrier = [0,1)\n")
    assert report.error.startswith("line 3") and report.exit_code() == 2


def test_unknown_ids_are_fatal():
    report = run_text("[commands]\nvalidate NOPE\n")
    assert "unknown id 'NOPE'" in report.error


def test_failed_assertion_and_unknown_outcomes():
    head = by_name("distinct_homs.orb").read_text().split("[commands]")[0]
    report = run_text(head + "[commands]\nreps-equal N1 N2 expect=true\nequiv N1 N2 witness=auto\n")
    assert [r.outcome for r in report.results] == ["fail", "unknown"]
    assert report.exit_code() == 1
    only_unknown = run_text(head + "[commands]\nequiv N1 N2 witness=auto\n")
    assert only_unknown.exit_code() == 1
    assert only_unknown.exit_code(allow_unknown=True) == 0


def test_module_errors_become_failed_commands():
    head = by_name("round_trip.orb").read_text().split("[commands]")[0]
    report = run_text(head + "[commands]\ncompose SQ N1 out=X\n")
    assert report.results[0].outcome == "fail"
    assert re.match(r"line \d+: compose: RefinementFailed", report.results[0].details["error"])


def test_main_writes_json_and_sets_exit_code(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["run", str(by_name("incompatible_charts.orb")), "--json-out", str(out), "--jobs", "2"])
    assert code == 0
    doc = json.loads(out.read_text())
    cmds = doc["scenarios"][0]["commands"]
    assert set(cmds[0]) == {"command", "outcome", "details"}
    assert "PASS" in capsys.readouterr().out


def test_parallel_and_serial_runs_agree(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    paths = [str(p) for p in FIXTURES[:3]]
    assert main(["run", *paths, "--json-out", str(a)]) == 0
    assert main(["run", *paths, "--jobs", "3", "--json-out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
