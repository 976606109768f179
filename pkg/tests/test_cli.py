import json

import numpy as np
import pytest

from ttdyn import enumerate_loops, seed_track
from ttdyn.cli import main
from ttdyn.typegraph import largest_component


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def graph_file(graph05, tmp_path_factory):
    path = tmp_path_factory.mktemp("graph") / "graph.json"
    path.write_text(graph05.to_json())
    return path


# -- validate --------------------------------------------------------------

@pytest.mark.parametrize("name", ["builtin:0,5", "builtin:2,0"])
def test_validate_builtin(capsys, name):
    code, out, _ = run(capsys, "validate", name)
    assert code == 0
    assert out.rstrip().endswith("PASS")
    assert "recurrent: True" in out


def test_validate_file(capsys, tmp_path):
    p = tmp_path / "t.json"
    p.write_text(seed_track((0, 5)).to_json())
    assert run(capsys, "validate", p)[0] == 0


def test_validate_corrupt_json(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"surface": {"g": 0, ')
    code, _, err = run(capsys, "validate", p)
    assert code == 2 and "parse error" in err


def test_validate_missing_file(capsys, tmp_path):
    assert run(capsys, "validate", tmp_path / "nope.json")[0] == 2


def test_validate_region_failure(capsys, tmp_path):
    d = seed_track((0, 5)).to_dict()
    sw = d["switches"][0]
    sw["small_left"], sw["small_right"] = sw["small_right"], sw["small_left"]
    p = tmp_path / "swapped.json"
    p.write_text(json.dumps(d))
    code, out, _ = run(capsys, "validate", p)
    assert code == 1
    assert "FAIL" in out and "punctured_monogons" in out.splitlines()[-1]


def test_unsupported_surface(capsys):
    assert run(capsys, "validate", "builtin:0,3")[0] == 2


# -- graph -----------------------------------------------------------------

def test_graph_budget_one(capsys, tmp_path):
    code, out, _ = run(capsys, "graph", "--budget", 1, "--out", tmp_path)
    assert code == 0
    data = json.loads((tmp_path / "graph.json").read_text())
    assert len(data["nodes"]) == 1
    assert data["run"]["version"] == "0.1.0" and data["run"]["config"]["budget"] == 1
    assert (tmp_path / "graph.dot").read_text().startswith("//")
    assert json.loads((tmp_path / "graph_summary.json").read_text())["nodes"] == 1


def test_graph_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "graph", "--budget", 30, "--out", a)
    run(capsys, "graph", "--budget", 30, "--out", b, "--threads", 3)
    ja = json.loads((a / "graph.json").read_text())
    jb = json.loads((b / "graph.json").read_text())
    ja.pop("run"), jb.pop("run")
    assert ja == jb


def test_graph_bad_budget(capsys, tmp_path):
    assert run(capsys, "graph", "--budget", 0, "--out", tmp_path)[0] == 2


def test_graph_with_orbits(capsys, tmp_path):
    code, out, _ = run(capsys, "graph", "--orbits", 2, "--budget", 10, "--out", tmp_path)
    assert code == 0 and "nodes 10" in out


# -- census ----------------------------------------------------------------

def test_census_reference_lines(capsys, tmp_path, graph05, graph_file):
    code, out, _ = run(capsys, "census", "--graph", graph_file, "--max-len", 60, "--out", tmp_path)
    assert code == 0
    assert "reference lines: target 4, bound 20" in out
    counts = (tmp_path / "counts.csv").read_text().splitlines()
    assert counts[0].startswith("# {") and counts[1] == "# reference lines: target 4, bound 20"
    census = (tmp_path / "census.csv").read_text().splitlines()
    assert census[1] == "# symbolic loop counts on the materialized subgraph"
    assert len(census) - 3 == len(enumerate_loops(graph05, 60).loops)


def test_census_empty(capsys, tmp_path, graph_file):
    code, out, _ = run(capsys, "census", "--graph", graph_file, "--max-len", 3, "--out", tmp_path)
    assert code == 0 and out.startswith("wrote") and "loops 0 " in out
    rows = (tmp_path / "counts.csv").read_text().splitlines()[3:]
    assert rows and all(r.split(",")[1] == "0" for r in rows)


def test_census_deterministic(capsys, tmp_path, graph_file):
    for d in ("a", "b"):
        run(capsys, "census", "--graph", graph_file, "--max-len", 52, "--out", tmp_path / d)
    for name in ("census.csv", "counts.csv"):
        assert (tmp_path / "a" / name).read_bytes().split(b"\n", 1)[1] == \
            (tmp_path / "b" / name).read_bytes().split(b"\n", 1)[1]


def test_census_missing_graph(capsys, tmp_path):
    code, _, err = run(capsys, "census", "--out", tmp_path)
    assert code == 2 and "cannot read graph" in err


# -- measure ---------------------------------------------------------------

def test_measure_uniform(capsys, tmp_path, graph_file):
    code, out, _ = run(capsys, "measure", "--graph", graph_file, "--out", tmp_path)
    assert code == 0
    rep = json.loads((tmp_path / "measure.json").read_text())
    assert rep["residual"] <= 1e-12
    assert rep["avoidance"]["rate"] < 1
    assert abs(sum(float(x) for x in rep["stationary"]) - 1) < 1e-12


def test_measure_support_mismatch(capsys, tmp_path, graph05, graph_file):
    n = largest_component(graph05).size
    p = tmp_path / "P.json"
    p.write_text(json.dumps({"P": np.full((n, n), 1 / n).tolist()}))
    code, _, err = run(capsys, "measure", "--graph", graph_file, "--matrix", p, "--out", tmp_path)
    assert code == 1 and "support mismatch" in err


def test_measure_matrices_differ(capsys, tmp_path, graph_file):
    run(capsys, "measure", "--graph", graph_file, "--out", tmp_path / "u")
    run(capsys, "measure", "--graph", graph_file, "--kind", "random", "--rng-seed", 3,
        "--out", tmp_path / "r")
    u = json.loads((tmp_path / "u" / "measure.json").read_text())["cylinders2"]
    r = json.loads((tmp_path / "r" / "measure.json").read_text())["cylinders2"]
    assert max(abs(u[k] - r[k]) for k in u) > 1e-6


# -- roof ------------------------------------------------------------------

def test_roof(capsys, tmp_path, graph05, graph_file):
    code, out, _ = run(capsys, "roof", "--graph", graph_file, "--max-len", 52, "--depth", 60,
                       "--out", tmp_path)
    assert code == 0
    rows = (tmp_path / "roof.csv").read_text().splitlines()[2:]
    assert len(rows) == len(enumerate_loops(graph05, 52).loops)
    finite = 0
    for r in rows:
        _, _, total, radius, period, low = (float(x) for x in r.split(","))
        assert low >= 0 and abs(total - period) <= radius + 1e-9
        finite += radius < 1e-6
    assert finite >= 1


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "0.1.0" in capsys.readouterr().out
