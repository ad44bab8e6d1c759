import json
from io import StringIO
from pathlib import Path

import pytest

from gerbes.cli import run
from gerbes.connection import DeligneData
from gerbes.io import deligne_to_json, scenario_from_doc

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def _call(command, name, *extra):
    out = StringIO()
    path = name if isinstance(name, Path) else SCENARIOS / name
    status = run([command, str(path), "--json", *extra], out)
    payload = json.loads(out.getvalue())
    assert payload["status"] == status
    assert payload["command"] == command
    return status, payload


def test_class_one_on_the_sphere():
    status, payload = _call("dd-class", "class1_s3.json")
    assert status == 0
    assert payload["class_vector"] == [1]
    assert payload["trivial"] is False
    status, payload = _call("trivialize", "class1_s3.json")
    assert status == 3
    assert payload["error"] == "ClassNonTrivial"
    status, payload = _call("check", "class1_s3.json")
    assert status == 0 and payload["passed"]
    assert payload["deligne"]["passed"]


def test_coboundary_trivializes():
    status, payload = _call("trivialize", "coboundary_s3.json")
    assert status == 0
    assert payload["residual"] < 1e-9
    assert payload["rho"]["level"] == 1


def test_circle_check_and_class():
    assert _call("check", "trivial_circle.json")[0] == 0
    status, payload = _call("dd-class", "trivial_circle.json")
    assert status == 0 and payload["trivial"]


def test_holonomy_and_wzw_agree():
    status, payload = _call("holonomy", "holonomy_s3.json")
    assert status == 0
    assert payload["ball_passed"] and payload["ball_error"] < 1e-8
    hol = payload["holonomy"]
    volume = payload["exp_integral"]
    assert abs(hol["log_modulus"] - volume["log_modulus"]) < 1e-8
    assert abs(hol["turns"] - volume["turns"]) < 1e-8
    status, payload = _call("wzw", "holonomy_s3.json")
    assert status == 0
    assert abs(payload["wzw"]["turns"] - hol["turns"]) < 1e-8


def test_lift_scenarios():
    status, payload = _call("lift", "lift_heisenberg.json")
    assert status == 0
    assert payload["exists"] is False and payload["oracle_exists"] is False
    assert payload["class_vector"] == []
    status, payload = _call("lift", "lift_split_circle.json")
    assert status == 0
    assert payload["exists"] is True and payload["oracle_exists"] is True


def test_delta_primitive():
    status, payload = _call("delta-primitive", "fibered_circle.json")
    assert status == 0
    assert payload["arity"] == 2 and payload["residual"] < 1e-9
    assert payload["closedness"] < 1e-12
    status, flat = _call("delta-primitive", "fibered_circle.json", "--partition", "flat")
    assert status == 0 and flat["residual"] < 1e-9


def test_groupoid():
    status, payload = _call("groupoid", "groupoid_tetrahedron.json")
    assert status == 0
    assert payload["equal"] is True
    assert payload["trivialization"]["round_trip"] is True
    assert payload["trivialization"]["source"] == 0 and payload["trivialization"]["target"] == 2


def test_missing_payloads_are_invalid():
    status, payload = _call("groupoid", "trivial_circle.json")
    assert status == 2 and "groupoid" in payload["message"]
    assert _call("delta-primitive", "trivial_circle.json")[0] == 2
    assert _call("lift", "trivial_circle.json")[0] == 2


def test_missing_file(tmp_path):
    status, payload = _call("check", tmp_path / "nowhere.json")
    assert status == 4


def test_malformed_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1}')
    status, payload = _call("check", bad)
    assert status == 2 and payload["error"] == "InconsistentInput"


def test_failed_check_reports(tmp_path):
    doc = {"version": 1, "complex": {"generator": "s2", "level": 3}}
    cover = scenario_from_doc(doc).cover
    d = DeligneData.trivial(cover)
    A = {(0, 1): 0.5 * d.edge_mask((0, 1))}
    doc["deligne"] = deligne_to_json(DeligneData(cover, d.g, A, d.f))
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    status, payload = _call("check", path)
    assert status == 2
    assert payload["passed"] is False
    assert payload["error"] == "CheckFailed"


def test_text_output():
    out = StringIO()
    assert run(["dd-class", str(SCENARIOS / "class1_s3.json")], out) == 0
    assert "class_vector: [1]" in out.getvalue()


def test_unknown_command():
    with pytest.raises(SystemExit):
        run(["explode", str(SCENARIOS / "class1_s3.json")], StringIO())
