import json
import math
import xml.etree.ElementTree as ET

import pytest

from petty.cli import main


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else None)


@pytest.fixture
def files(tmp_path):
    def write(name, data):
        p = tmp_path / name
        p.write_text(json.dumps(data))
        return str(p)

    return write


PETTY4 = [["1", "0", "0", "0"], ["-1", "0", "0", "0"], ["0", "1/3", "1/3", "1/3"], ["0", "-1/8", "-3/8", "-1/2"]]


def test_verify_petty_scenario(capsys, files):
    sc = files("sc.json", {"norm": {"type": "lp", "p": 1, "dim": 4}, "points": PETTY4})
    code, doc = _run(capsys, ["verify", "--scenario", sc])
    assert code == 0
    assert doc["result"]["p"] == "2" and doc["result"]["max_deviation"] == "0"
    assert doc["config"]["tol"] == 1e-9 and "version" in doc


def test_generate_cube(capsys):
    code, doc = _run(capsys, ["generate", "--kind", "linf-cube", "--n", "3"])
    assert code == 0 and len(doc["result"]["points"]) == 8 and doc["result"]["p"] == "1"


def test_extend_numeric_exit_codes(capsys, files):
    pts = files("p.json", PETTY4)
    code, doc = _run(capsys, ["extend-numeric", "--norm", "l1:4", "--points", pts])
    assert code == 2 and doc["result"]["status"] == "not_found"
    pts3 = files("p3.json", PETTY4[:3])
    code, doc = _run(capsys, ["extend-numeric", "--norm", "l1:4", "--points", pts3])
    assert code == 0 and doc["result"]["residual"] <= 1e-8


def test_extend3_euclidean_apex_and_svg(capsys, files, tmp_path):
    s = math.sqrt(3) / 2
    pts = files("t.json", [[0, 0, 0], [1, 0, 0], [0.5, s, 0]])
    svg = tmp_path / "profile.svg"
    code, doc = _run(capsys, ["extend3", "--norm", "l2:3", "--points", pts, "--svg", str(svg)])
    assert code == 0
    d = doc["result"]["d"]
    assert abs(abs(d[2]) - math.sqrt(2 / 3)) < 1e-8
    ET.parse(svg)


def test_circumcircle_svg_is_stable(capsys, files, tmp_path):
    pts = files("t.json", [[0, 0], [1, 0], [1, 1]])
    outs = []
    for name in ("a.svg", "b.svg"):
        code, doc = _run(capsys, ["circumcircle", "--norm", "linf:2", "--points", pts, "--svg", str(tmp_path / name)])
        assert code == 0 and abs(doc["result"]["radius"] - 0.5) < 1e-9
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    root = ET.fromstring(outs[0])
    assert root.tag.endswith("svg") and len(root.findall("{http://www.w3.org/2000/svg}text")) >= 3


def test_inscribe(capsys, files):
    s = math.sqrt(3) / 2
    pts = files("t.json", [[0, 0], [1, 0], [0.5, s]])
    code, doc = _run(capsys, ["inscribe", "--norm", "l2:2", "--points", pts])
    assert code == 0 and abs(doc["result"]["r"] - math.sqrt(3)) < 1e-8


def test_vertex_check_command(capsys, files):
    code, doc = _run(capsys, ["lemma7", "--points", files("p.json", PETTY4)])
    assert code == 0 and doc["result"]["all_vertices"] and len(doc["result"]["reports"]) == 12
    code, _ = _run(capsys, ["lemma7", "--points", files("c.json", [[0, 0], [1, 1], [2, 2]])])
    assert code == 1


def test_certify_and_audit(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    code, doc = _run(capsys, ["certify-l1", "--n", "4", "--cert-out", str(cert)])
    assert code == 2 and doc["result"]["verdict"] == "maximal"
    code, doc = _run(capsys, ["audit-cert", "--cert", str(cert)])
    assert code == 0 and doc["result"]["ok"]
    data = json.loads(cert.read_text())
    data["verdict"] = "extendable"
    cert.write_text(json.dumps(data))
    code, doc = _run(capsys, ["audit-cert", "--cert", str(cert)])
    assert code == 2 and not doc["result"]["ok"]


def test_certify_general_points(capsys, files):
    pts = files("two.json", {"points": [[0, 0], [2, 0]], "p": "2"})
    code, doc = _run(capsys, ["certify-l1", "--points", pts])
    assert code == 0 and doc["result"]["verdict"] == "extendable"


def test_smooth(capsys, files):
    anchors = files("a.json", [[1, 0], [0, 1]])
    code, doc = _run(capsys, ["smooth", "--norm", "l1:2", "--points", anchors, "--epsilon", "0.25", "--samples", "2000"])
    assert code == 0 and doc["result"]["validation"]["max_anchor_deviation"] <= 1e-9


def test_input_errors(capsys, tmp_path):
    assert main(["verify", "--norm", "l1:2"]) == 1
    assert main(["verify", "--norm", "banana", "--points", "nope.json"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--norm", "l1:2", "--points", str(bad)]) == 1
    assert main(["no-such-command"]) == 1
    capsys.readouterr()


def test_result_json_round_trip(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert main(["generate", "--kind", "petty-l1", "--n", "5", "--json", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert json.loads(json.dumps(doc)) == doc
    assert doc["result"]["points"][3] == ["0", "-1/12", "-1/4", "-1/3", "-1/3"]


def test_reproduce_all_subset(capsys, tmp_path):
    code, doc = _run(capsys, ["reproduce-all", "--out", str(tmp_path / "new" / "dir"), "--only", "9", "6"])
    assert code == 0 and doc["result"]["passed"]
    assert (tmp_path / "new" / "dir" / "summary.txt").read_text().count("PASS") == 2
