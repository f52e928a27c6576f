import csv
import io
import json

import pytest

from reference_tables import REFLECTIONS
from srgroups.cli import EXIT_CAP, EXIT_OK, EXIT_OUTPUT, EXIT_SPEC, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_reflections_csv(capsys):
    code, out = run(capsys, "tables", "reflections", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["group", "N", "minimal_d"]
    got = {r[0]: (int(r[1]), int(r[2])) for r in rows[1:]}
    assert got == {g.label(): v for g, v in REFLECTIONS.items()}


def test_open_json_is_deterministic(capsys):
    _, a = run(capsys, "tables", "open", "--stage", "refined", "--format", "json")
    _, b = run(capsys, "tables", "open", "--stage", "refined", "--format", "json", "--threads", "3")
    assert a == b
    rep = json.loads(a)
    assert list(rep) == sorted(rep)
    assert rep["open_cases"] == len(rep["items"]) == 40
    for item in rep["items"]:
        assert {"g0", "kind", "d", "status", "certificates"} <= set(item)


def test_verify_lemmas(capsys):
    code, out = run(capsys, "verify", "lemmas", "--spec", "muT:18")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["summary"]["fail"] == 0 and rep["items"]
    assert rep["command"] == ["verify", "lemmas", "--spec", "muT:18"]


def test_verify_subgroups_text(capsys):
    code, out = run(capsys, "verify", "subgroups", "--format", "text")
    assert code == EXIT_OK
    assert out.strip().endswith("pass=272 fail=0 undetermined=0")


def test_inventory(capsys):
    code, out = run(capsys, "inventory", "--spec", "OT:6")
    assert code == EXIT_OK
    item = json.loads(out)["items"][0]
    assert item["inventory"]["symplectic_reflections"] == 28 + 6


@pytest.mark.parametrize("spec", ["muT:7", "foo", "OT:8", "muI:480"])
def test_invalid_spec_exit(spec, capsys):
    assert main(["verify", "lemmas", "--spec", spec]) == EXIT_SPEC


def test_unwritable_output(tmp_path):
    assert main(["tables", "reflections", "--out", str(tmp_path / "missing" / "x.json")]) == EXIT_OUTPUT
    assert main(["tables", "reflections", "--out", str(tmp_path)]) == EXIT_OUTPUT


def test_cap_overflow():
    assert main(["inventory", "--spec", "muI:60", "--cap", "100"]) == EXIT_CAP
    assert main(["ws2", "--cap", "1000"]) == EXIT_CAP


def test_out_file(tmp_path):
    path = tmp_path / "t.csv"
    assert main(["tables", "open", "--format", "csv", "--out", str(path)]) == EXIT_OK
    rows = list(csv.reader(path.open(encoding="utf-8")))
    assert rows[0] == ["G_0", "open_d"] and len(rows) == 18


def test_env_cache(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SRG_CACHE", str(tmp_path))
    code, out = run(capsys, "ws2", "--cache", "/nonexistent-ignored")
    assert code == EXIT_OK
    assert any(p.suffix == ".npz" for p in tmp_path.iterdir())
    assert json.loads(out)["ws2"]["identified"] is True
