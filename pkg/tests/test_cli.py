import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from linf_trees.cli import main

SIX = "35 22 32 49 42 26 34 23 32 39 41 34 46 49 32"


def run(capsys, *argv, stdin=None, monkeypatch=None):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def write(tmp_path):
    def _write(text, name="in.txt"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return _write


def test_ultra_example(capsys, write):
    code, out, _ = run(capsys, "ultra", "--input", write("2 4 6 8 10 12"))
    rep = json.loads(out)
    assert code == 0
    assert rep["subdominant"] == ["2", "4", "6", "4", "6", "6"]
    assert rep["distance"] == "3"
    assert rep["canonical"] == ["5", "7", "9", "7", "9", "9"]


def test_ultra_dimension_example(capsys, write):
    path = write('{"labels": ["A","B","C","D"], "values": ["5","8","9","6","9","9"]}')
    rep = json.loads(run(capsys, "ultra", "--input", path)[1])
    assert rep["dimension"] == 2
    assert rep["top"] == ["(D(C(AB)))"]


def test_ultra_on_ultrametric(capsys, write):
    rep = json.loads(run(capsys, "ultra", "--input", write("5 7 9 7 9 9"))[1])
    assert rep["distance"] == "0" and rep["top"] == ["(4(3(12)))"] and rep["dimension"] == 0


def test_canonical_round_trip(capsys, write):
    rep = json.loads(run(capsys, "ultra", "--input", write("1 5 2 7 3 3"))[1])
    again = json.loads(run(capsys, "ultra", "--input", write(json.dumps(rep["canonical"]), "c.json"))[1])
    assert again["distance"] == "0"


def test_tree_not_connected(capsys, write):
    for mode in ("tree", "grassmannian"):
        rep = json.loads(run(capsys, "tree", "--input", write(SIX), "--mode", mode)[1])
        assert rep["distance"] == "5"
        assert rep["component_count"] == 2
        assert sorted(a["dimension"] for a in rep["attaining"]) == [4, 6]
        assert len(rep["table"]) == 105


def test_tree_metric_input(capsys, write):
    rep = json.loads(run(capsys, "tree", "--input", write("3 9 10 10 11 7"))[1])
    assert rep["distance"] == "0" and rep["component_count"] == 1


def test_tree_four_leaf_table(capsys, write):
    rep = json.loads(run(capsys, "tree", "--input", write("2 4 6 8 10 12"))[1])
    assert len(rep["table"]) == 3
    # the three pairing sums tie at 14, so every topology is minimal
    assert [r["distance"] for r in rep["table"] if r["minimal"]] == ["2/3"] * 3
    rep = json.loads(run(capsys, "tree", "--input", write("1 5 2 7 3 3"))[1])
    minimal = [r for r in rep["table"] if r["minimal"]]
    assert len(minimal) == len(rep["attaining"]) >= 1
    assert all(r["distance"] == rep["distance"] for r in minimal)


@pytest.mark.parametrize("values", ["1 2 3", " ".join(["1"] * 21)])
def test_tree_guard(capsys, write, values):
    code, _, err = run(capsys, "tree", "--input", write(values))
    assert code == 3 and "guard" in err


@pytest.mark.parametrize("payload, sigma, dim, uniform", [
    ({"basis": [[1, 1, 0]], "point": [0, 0, -1]}, "00+", 1, False),
    ({"basis": [[1, 1]], "point": [-3, -1]}, "+-", 0, True),
    ({"basis": [[1, 1, 0]], "point": [2, 2, 0]}, "000", 0, False),
])
def test_type(capsys, write, payload, sigma, dim, uniform):
    rep = json.loads(run(capsys, "type", "--input", write(json.dumps(payload)))[1])
    assert (rep["type"], rep["dimension"], rep["uniform"]) == (sigma, dim, uniform)


def test_type_dependent_rows(capsys, write):
    code, _, err = run(capsys, "type", "--input", write('{"basis": [[1,1],[2,2]], "point": [0,1]}'))
    assert code == 2 and "dependent" in err


def _svg(text):
    return ET.fromstring(text.split("\n", 1)[1])


def test_fan3_default(capsys):
    code, out, _ = run(capsys, "fan3")
    root = _svg(out)
    ns = "{http://www.w3.org/2000/svg}"
    labels = [t.text for t in root.iter(ns + "text")]
    assert code == 0 and len(labels) == 7 and len(set(labels)) == 7
    assert "{(123)}" in labels and "{(123),(2(13)),(3(12))}" in labels


def test_fan3_json(capsys):
    rep = json.loads(run(capsys, "fan3", "--format", "json")[1])
    assert rep["cone_count"] == 7
    assert sorted(c["dimension"] for c in rep["cones"]) == [0, 1, 1, 1, 2, 2, 2]


def test_fan3_overlay_zonotope(capsys, write, tmp_path):
    out_path = tmp_path / "fig.svg"
    code, out, _ = run(capsys, "fan3", "--input", write("1 1 3"), "--output", str(out_path))
    assert code == 0 and out == ""
    root = _svg(out_path.read_text())
    ns = "{http://www.w3.org/2000/svg}"
    hexagon = [p for p in root.iter(ns + "polygon") if p.get("fill") == "none"]
    assert len(hexagon) == 1 and len(hexagon[0].get("points").split()) == 6
    circles = list(root.iter(ns + "circle"))
    filled = [c for c in circles if c.get("fill") == "#b03030"]
    assert len(filled) == 2
    assert any(c.get("cx") == "240.00" and c.get("cy") == "240.00" for c in circles)


def test_fan3_overlay_ultrametric_inside_region(capsys, write):
    from linf_trees.fan3 import project
    x, y = project((1, 5, 5))
    # region {(3(12))} is spanned by the images of e13 and e23
    ax, ay = project((0, 1, 0))
    bx, by = project((0, 0, 1))
    det = ax * by - ay * bx
    alpha, beta = (x * by - y * bx) / det, (ax * y - ay * x) / det
    assert alpha > 0 and beta > 0
    assert run(capsys, "fan3", "--input", write("1 5 5"))[0] == 0


def test_fan3_needs_three_leaves(capsys, write):
    assert run(capsys, "fan3", "--input", write("1 2 3 4 5 6"))[0] == 3


def test_census_small(capsys):
    rep = json.loads(run(capsys, "census", "--samples", "1")[1])
    assert rep["distinct_count"] == 1 and sum(rep["districts"].values()) == 1


def test_census_box(capsys):
    rep = json.loads(run(capsys, "census", "--samples", "5", "--box", "7", "7")[1])
    assert rep["districts"] == {"{(1234)}": 5}


@pytest.mark.parametrize("argv", [["census", "--samples", "0"], ["census", "--box", "5", "1"]])
def test_census_bad_flags(capsys, argv):
    assert run(capsys, *argv)[0] == 2


@pytest.mark.parametrize("text, fragment", [
    ("1 2 x 4 5 6", "'x'"),
    ("[[0,1,2],[1,0,3],[2,4,0]]", "pair index 2"),
    ("1 2 3 4", "choose 2"),
])
def test_parse_errors_exit_2(capsys, write, text, fragment):
    code, _, err = run(capsys, "ultra", "--input", write(text))
    assert code == 2 and fragment in err


def test_missing_file(capsys, tmp_path):
    assert run(capsys, "ultra", "--input", str(tmp_path / "nope"))[0] == 2


def test_svg_only_for_fan3(capsys, write):
    assert run(capsys, "ultra", "--input", write("1 2 3"), "--format", "svg")[0] == 2


def test_text_format(capsys, write):
    code, out, _ = run(capsys, "ultra", "--input", write("1 1 3"), "--format", "text")
    assert code == 0 and "district: {(123),(2(13)),(3(12))}" in out


def test_stdin(monkeypatch, capsys):
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO("1 1 3"))
    assert json.loads(run(capsys, "ultra")[1])["distance"] == "1"


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "linf_trees.cli", "fan3", "--format", "json"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["cone_count"] == 7


@pytest.mark.parametrize("argv, text", [
    (["ultra"], "2 4 6 8 10 12"),
    (["tree"], "2 4 6 8 10 12"),
    (["type"], '{"basis": [[1, 1, 0]], "point": [0, 0, -1]}'),
    (["fan3"], "1 1 3"),
    (["census", "--samples", "50", "--seed", "3"], None),
])
def test_byte_determinism(capsys, write, argv, text):
    args = argv + (["--input", write(text)] if text else [])
    first = run(capsys, *args)[1]
    second = run(capsys, *args)[1]
    assert first == second and first
