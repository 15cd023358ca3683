import json
import random
import shutil
from pathlib import Path

import pytest

from gerbes import groups as grp
from gerbes.cli import main, run
from gerbes.errors import ParseError
from gerbes.extensions import random_cocycle, validate_cocycle
from gerbes.groupoids import NERVE, circle_cover
from gerbes.io import Workspace, cocycle_to_json, cover_to_json, dumps, group_to_json, infer_kind, parse_cover, parse_group, parse_groupoid

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def ws(tmp_path, monkeypatch):
    for f in FIXTURES.glob("*.json"):
        shutil.copy(f, tmp_path / f.name)
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write(path: Path, obj) -> str:
    path.write_text(json.dumps(obj))
    return path.name


def test_exit_codes(ws):
    assert run(["validate", "circle_z3_outer.json"])[0] == 0
    assert run(["validate", "z2_star_mutated_g.json"])[0] == 1
    assert run(["classify", "Q8", "tetrahedron.json", "--limit-enum", "10", "--strict"])[0] == 2
    assert run(["classify", "S3", "tetrahedron.json", "--limit-order", "4"])[0] == 2
    assert run(["validate", "malformed.json"])[0] == 3
    assert run(["validate", "missing.json"])[0] == 3
    assert run(["frobnicate"])[0] == 3
    assert run(["cohomology", "tetrahedron.json", "--degree", "2", "--coeff", "1"])[0] == 3
    assert run(["cohomology", "tetrahedron.json", "--degree", "7", "--coeff", "2"])[0] == 3


def test_classify_without_strict_falls_back(ws):
    code, text = run(["classify", "Q8", "tetrahedron.json", "--limit-enum", "10"])
    assert code == 0 and "Z2" in text


def test_sorted_form_rejects_unsorted_keys(ws):
    name = write(ws / "bad_key.json", {"group": "Z3", "cover": "circle.json", "lambda": {"2,1": 1}, "g": {}})
    code, text = run(["validate", name])
    assert code == 3 and "parse error" in text


def test_full_form_requires_every_key(ws):
    name = write(ws / "partial.json", {"group": "Z2", "cover": "star.json", "form": "full", "lambda": {"0,1,0": 0}, "g": {}})
    assert run(["validate", name])[0] == 3


def test_out_flag_and_main(ws, capsys):
    assert main(["band", "circle_z3_outer.json", "--out", "band.txt"]) == 0
    assert capsys.readouterr().out == ""
    assert (ws / "band.txt").read_text().startswith("group: Z3")
    assert main(["validate", "malformed.json"]) == 3


def test_refine_emit_roundtrip(ws):
    code, text = run(["refine", "circle_z3_outer.json", "circle_refinement.json", "--emit", "fine.json"])
    assert code == 0 and "wrote fine.json" in text
    emitted = json.loads((ws / "fine.json").read_text())
    assert emitted["form"] == "full"
    emitted["cover"] = "circle_bary.json"
    write(ws / "fine.json", emitted)
    assert run(["validate", "fine.json"])[0] == 0
    assert run(["band", "fine.json"])[0] == 0


def test_bad_refinement_reports_witness(ws):
    code, text = run(["validate", "bad_refinement.json"])
    assert code == 1 and "point 0 of fine set 0" in text


def test_commands_are_deterministic(ws):
    for argv in (["pullback", "circle_z3_outer.json", "--double", "0"], ["check-morita", "circle_z3_outer.json", "circle_refinement.json"]):
        assert run(argv) == run(argv)


def test_cocycle_json_roundtrip(ws):
    d = random_cocycle(grp.quaternion(), circle_cover(NERVE), random.Random(0))
    obj = cocycle_to_json(d, "Q8", "circle.json")
    write(ws / "rt.json", obj)
    back = Workspace().cocycle("rt.json")
    assert back == d and validate_cocycle(back).ok
    assert dumps(obj) == dumps(json.loads(dumps(obj)))


def test_parsers():
    G = parse_group(group_to_json(grp.symmetric(3)))
    assert G.order == 6 and G.table.tolist() == grp.symmetric(3).table.tolist()
    assert parse_group({"builtin": "Q8"}).order == 8
    C = circle_cover(NERVE)
    assert parse_cover(cover_to_json(C)) == C
    with pytest.raises(ParseError):
        parse_group({"table": [[0, 1], [1]]})
    with pytest.raises(ParseError):
        parse_cover({"points": 2, "sets": [[0, "a"]]})
    assert infer_kind({"simplices": [[0, 1]]}) == "nerve"
    assert infer_kind({"points": 1, "sets": [[0]]}) == "cover"
    P = parse_groupoid({"objects": 1, "arrows": [[0, 0], [0, 0]], "comp": [[0, 1], [1, 0]]})
    assert P.n_arrows == 2
