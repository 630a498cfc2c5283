import csv
import io
import json

import pytest

from twrouter.cli import CSV_FIELDS, main, parse_range
from twrouter.formats import read_instance, write_instance
from twrouter.generators import gen_grid_gap

from conftest import path_instance


def test_parse_range():
    assert parse_range("1..4") == [1, 2, 3, 4]
    assert parse_range("1,3,5..6") == [1, 3, 5, 6]


def test_solve_edp_csv(tmp_path, capsys):
    write_instance(gen_grid_gap(2), tmp_path / "g.json")
    assert main(["solve-edp", "--graph", str(tmp_path / "g.json"), "--routing-out", str(tmp_path / "r.json")]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert list(rows[0]) == CSV_FIELDS
    assert int(rows[0]["routed"]) == 1
    assert json.loads((tmp_path / "r.json").read_text())


def test_solve_ndp_json_with_td(tmp_path, capsys):
    assert main(["gen", "--family", "caterpillar", "--k", "3", "--n", "10", "--width", "2", "--out", str(tmp_path / "c")]) == 0
    capsys.readouterr()
    code = main(["solve-ndp", "--graph", str(tmp_path / "c.json"), "--td", str(tmp_path / "c.td"), "--json"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)[0]
    assert doc["routed"] >= doc["bound"]
    assert "constants" in doc


def test_mode_mismatch_is_input_error(tmp_path):
    write_instance(path_instance(3), tmp_path / "p.gr")
    assert main(["solve-ndp", "--graph", str(tmp_path / "p.gr")]) == 1


def test_missing_file():
    assert main(["solve-edp", "--graph", "/nonexistent/file.json"]) == 1


def test_wl_and_oracle(tmp_path, capsys):
    write_instance(path_instance(4), tmp_path / "p.json")
    assert main(["wl-decompose", "--graph", str(tmp_path / "p.json"), "--out", str(tmp_path / "w.json")]) == 0
    assert "components=1" in capsys.readouterr().out
    assert len(json.loads((tmp_path / "w.json").read_text())["components"]) == 1
    assert main(["oracle", "--graph", str(tmp_path / "p.json")]) == 0
    assert capsys.readouterr().out.strip() == "opt=1"
    write_instance(gen_grid_gap(4), tmp_path / "big.json")
    assert main(["oracle", "--graph", str(tmp_path / "big.json")]) == 1


def test_gen_hardness(tmp_path, capsys):
    mcc = tmp_path / "m.json"
    mcc.write_text(json.dumps({"k": 3, "classes": [[0, 1], [2, 3], [4, 5]], "edges": [[1, 3], [3, 5], [1, 5]]}))
    assert main(["gen-hardness", "--mcc", str(mcc), "--verify", "--out", str(tmp_path / "h")]) == 0
    out = capsys.readouterr().out
    assert "vertices=21" in out and "ell=6" in out and "equivalence=ok" in out
    roles = json.loads((tmp_path / "h.roles.json").read_text())
    assert len(roles) == 21
    assert read_instance(tmp_path / "h.json").graph.n == 21


def test_bench_grid(tmp_path, capsys):
    assert main(["bench", "--family", "grid", "--k", "1..3", "--out", str(tmp_path / "b.csv")]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [int(r["routed"]) for r in rows] == [1, 1, 1]
    assert (tmp_path / "b.csv").read_text().startswith(",".join(CSV_FIELDS))


def test_bench_ktree_json(capsys):
    assert main(["bench", "--family", "ktree", "--k", "2", "--n", "12", "--width", "2", "--seeds", "0..1", "--json"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 2


def test_bad_subcommand():
    with pytest.raises(SystemExit):
        main(["nope"])
