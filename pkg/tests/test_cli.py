import io
import json
import random

import pytest

from parafree import cli
from parafree.errors import InvariantViolation, JsonError, ValidationError, WordSyntaxError
from parafree.io import dumps, instance_to_json, parse_instance

from instances import random_graph

TREFOIL = {"vertices": [{"id": "U", "generators": ["a"]}, {"id": "V", "generators": ["b"]}],
           "edges": [{"id": "e", "from": "U", "to": "V", "edge_group": "Z", "u": "a^2", "v": "b^3"}]}
FREE_HNN = {"vertices": [{"id": "H", "generators": ["a", "b"]}],
            "edges": [{"id": "t", "from": "H", "to": "H", "edge_group": "Z", "u": "a", "v": "b"}]}


def write(tmp_path, doc, name="g.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def invoke(argv, capsys):
    out = io.StringIO()
    code = cli.run(argv, stdout=out)
    return code, out.getvalue(), capsys.readouterr().err


def test_parse_missing_u():
    doc = json.loads(json.dumps(TREFOIL))
    del doc["edges"][0]["u"]
    with pytest.raises(ValidationError) as exc:
        parse_instance(json.dumps(doc))
    assert exc.value.path == "edges[0].u"


def test_parse_zero_exponent():
    doc = json.loads(json.dumps(TREFOIL))
    doc["edges"][0]["u"] = "a^0"
    with pytest.raises(WordSyntaxError) as exc:
        parse_instance(json.dumps(doc))
    assert exc.value.path == "edges[0].u"


def test_parse_bad_json_reports_byte_offset():
    with pytest.raises(JsonError) as exc:
        parse_instance(b'{"vertices": [}')
    assert exc.value.offset == 14
    with pytest.raises(JsonError) as exc:
        data = '{"vertices": ["é", }'.encode()
        parse_instance(data)
    assert exc.value.offset == data.index(b"}")
    with pytest.raises(JsonError):
        parse_instance(b"\xff")


@pytest.mark.parametrize("doc,path", [
    ([], "$"),
    ({"vertices": [], "extra": 1}, "$"),
    ({"vertices": [{"id": "A", "generators": "a"}]}, "vertices[0].generators"),
    ({"vertices": [{"id": "A", "generators": ["a"]}],
      "edges": [{"id": "e", "from": "A", "to": "A", "edge_group": "trivial", "u": "a"}]}, "edges[0].u"),
    ({"vertices": [{"id": "A", "generators": ["a"]}],
      "edges": [{"id": "e", "from": "A", "to": "A", "edge_group": "Q"}]}, "edges[0].edge_group"),
])
def test_schema_errors(doc, path):
    with pytest.raises(ValidationError) as exc:
        parse_instance(json.dumps(doc))
    assert exc.value.path == path


def test_round_trip():
    rng = random.Random(51)
    for _ in range(100):
        g = random_graph(rng, cyclic_prob=0.5)
        doc = instance_to_json(g)
        again = parse_instance(json.dumps(doc))
        assert instance_to_json(again) == doc
        assert again.edges == g.edges and again.vertices == g.vertices


def test_big_ints_become_strings():
    out = json.loads(dumps({"small": 2 ** 53 - 1, "big": 2 ** 53, "neg": [-(2 ** 60)], "flag": True}))
    assert out == {"small": 2 ** 53 - 1, "big": str(2 ** 53), "neg": [str(-(2 ** 60))], "flag": True}


def test_check_command(tmp_path, capsys):
    code, out, _ = invoke(["check", write(tmp_path, TREFOIL)], capsys)
    report = json.loads(out)
    assert code == 0
    assert report["verdict"] == "not_parafree" and "bounds_used" in report and "tool_version" in report


def test_check_is_byte_stable(tmp_path, capsys):
    path = write(tmp_path, FREE_HNN)
    runs = [invoke(["check", path, "--workers", str(w)], capsys)[1] for w in (1, 1, 2)]
    assert runs[0] == runs[1] == runs[2]


def test_abelianization_command(tmp_path, capsys):
    code, out, _ = invoke(["abelianization", write(tmp_path, TREFOIL)], capsys)
    report = json.loads(out)
    assert code == 0 and report["free_rank"] == 1 and report["torsion"] == []


def test_witness_command(tmp_path, capsys):
    path = write(tmp_path, FREE_HNN)
    code, out, _ = invoke(["witness", path, "--edge", "t", "--dims", "3", "--primes", "2,3"], capsys)
    report = json.loads(out)
    assert code == 0 and report["result"] == "witness" and report["verified"]
    bs12 = {"vertices": [{"id": "H", "generators": ["a"]}],
            "edges": [{"id": "t", "from": "H", "to": "H", "edge_group": "Z", "u": "a", "v": "a^2"}]}
    code, out, _ = invoke(["witness", write(tmp_path, bs12, "bs.json"), "--edge", "t",
                           "--dims", "3", "--primes", "2,3"], capsys)
    assert code == 0 and json.loads(out)["result"] == "no_witness_up_to_bound"


def test_normal_form_command(tmp_path, capsys):
    code, out, _ = invoke(["normal-form", write(tmp_path, FREE_HNN), "--word", "t a t^-1"], capsys)
    report = json.loads(out)
    assert code == 0 and report["normal_form"] == "b" and report["nontrivial"] == "yes"


@pytest.mark.parametrize("argv", [[], ["check"], ["frobnicate", "x"], ["check", "x", "--dims", "3,a"]])
def test_usage_errors_exit_1(argv, capsys):
    code, out, err = invoke(argv, capsys)
    assert code == 1 and out == "" and json.loads(err)["error"] == "UsageError"


def test_input_errors_exit_1(tmp_path, capsys):
    code, _, err = invoke(["check", write(tmp_path, '{"vertices": [}')], capsys)
    diag = json.loads(err)
    assert code == 1 and diag["error"] == "JsonError" and diag["offset"] == 14
    code, _, err = invoke(["check", str(tmp_path / "missing.json")], capsys)
    assert code == 1 and json.loads(err)["error"] == "FileNotFoundError"
    code, _, err = invoke(["normal-form", write(tmp_path, FREE_HNN), "--word", "a z"], capsys)
    diag = json.loads(err)
    assert code == 1 and diag["error"] == "WordSyntaxError" and diag["position"] == 2


def test_invariant_violation_exits_2(tmp_path, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise InvariantViolation("broken")

    monkeypatch.setattr(cli, "check_gog", boom)
    code, out, err = invoke(["check", write(tmp_path, TREFOIL)], capsys)
    assert code == 2 and out == "" and json.loads(err)["error"] == "InvariantViolation"


def test_crash_exits_2(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "check_gog", lambda *a, **k: 1 / 0)
    code, _, err = invoke(["check", write(tmp_path, TREFOIL)], capsys)
    assert code == 2 and json.loads(err)["type"] == "ZeroDivisionError"
