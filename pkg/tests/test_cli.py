import csv
import io
import json
import math

import pytest

from dompath import generate_maze, generate_office
from dompath.cli import EXIT_INVALID, EXIT_OK, EXIT_USAGE, main
from dompath.experiments import measurement_grid


@pytest.fixture
def maze(tmp_path):
    path = tmp_path / "maze.json"
    assert main(["generate", "maze", "--cells", "4", "--seed", "2", "--out", str(path)]) == 0
    return path


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_generate_writes_loadable_plan(maze, capsys):
    doc = json.loads(maze.read_text())
    assert len(doc["walls"]) > 8
    assert main(["generate", "office", "--rows", "2", "--cols", "3"]) == 0
    out, err = capsys.readouterr()
    assert json.loads(out)["walls"] and "walls" in err


def test_generate_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        main(["generate", "maze", "--cells", "5", "--seed", "9", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()


def test_full_size_grids():
    assert len(measurement_grid(generate_maze(0), 1.0)[0]) == 3600
    assert len(measurement_grid(generate_office(), 1.0)[0]) == 3720


@pytest.mark.parametrize("algo", ["gp", "exact", "pareto"])
def test_heatmap(maze, tmp_path, capsys, algo):
    out = tmp_path / algo
    code = main(["heatmap", "--plan", str(maze), "--source", "1.5,1.5", "--algo", algo,
                 "--out", str(out)])
    assert code == EXIT_OK
    rows = _rows((tmp_path / f"{algo}.csv").read_text())
    assert len(rows) == 144
    src = [r for r in rows if (float(r["x"]), float(r["y"])) == (1.5, 1.5)]
    assert float(src[0]["pl_db"]) == 40.0
    assert all(float(r["pl_db"]) >= 40.0 for r in rows)
    pgm = (tmp_path / f"{algo}.pgm").read_bytes()
    assert pgm.startswith(b"P5\n12 12\n255\n") and len(pgm) == len(b"P5\n12 12\n255\n") + 144
    assert json.loads(capsys.readouterr().err)["points"] == 144


def test_heatmap_bytes_repeat(maze, tmp_path):
    for name in ("a", "b"):
        main(["heatmap", "--plan", str(maze), "--source", "4.5,7.5", "--seed", "3",
              "--out", str(tmp_path / name)])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.pgm").read_bytes() == (tmp_path / "b.pgm").read_bytes()


def test_empty_plan_heatmap_is_radial(tmp_path):
    plan = tmp_path / "empty.json"
    plan.write_text(json.dumps({"name": "empty", "walls": []}))
    code = main(["heatmap", "--plan", str(plan), "--source", "0,0", "--extent=-4,-4,4,4",
                 "--tx-dbm", "20", "--out", str(tmp_path / "h")])
    assert code == EXIT_OK
    rows = _rows((tmp_path / "h.csv").read_text())
    assert len(rows) == 64
    for r in rows:
        d = math.hypot(float(r["x"]), float(r["y"]))
        assert float(r["pl_db"]) == pytest.approx(20 - (40 + 20 * math.log10(d)), abs=1e-5)


def test_empty_plan_needs_extent(tmp_path):
    plan = tmp_path / "empty.json"
    plan.write_text(json.dumps({"walls": []}))
    assert main(["heatmap", "--plan", str(plan), "--source", "0,0",
                 "--out", str(tmp_path / "h")]) == EXIT_INVALID


def test_hull_csv(maze, capsys):
    assert main(["hull", "--plan", str(maze), "--source", "1.5,1.5",
                 "--dest", "10.5,10.5", "--dest", "7.5,1.5"]) == 0
    rows = _rows(capsys.readouterr().out)
    for dest in ("10.5,10.5", "7.5,1.5"):
        mine = [r for r in rows if r["dest"] == dest]
        b = int(mine[0]["B"])
        assert len(mine) == b
        assert int(mine[0]["sp_calls"]) == (2 if b == 1 else 2 * b - 1)
        assert [r["breakpoint_db_per_m"] == "" for r in mine] == [False] * (b - 1) + [True]
        d = [float(r["dist_m"]) for r in mine]
        assert d == sorted(d, reverse=True)


def test_pareto_and_hull_agree(maze, capsys):
    main(["hull", "--plan", str(maze), "--source", "1.5,1.5", "--dest", "10.5,4.5"])
    best = min(float(r["obj_db"]) for r in _rows(capsys.readouterr().out))
    assert main(["pareto", "--plan", str(maze), "--source", "1.5,1.5", "--dest", "10.5,4.5",
                 "--epsilon", "0.5"]) == 0
    out, err = capsys.readouterr()
    row = _rows(out)[0]
    assert best - 1e-6 <= float(row["obj_db"]) <= best + 0.5 + 1e-6
    stats = json.loads(err)
    assert stats["width_bound_ok"] and stats["delta"] == pytest.approx(0.5 / (stats["g2_nodes"] - 1))


def test_eval_error(maze, tmp_path, capsys):
    out = tmp_path / "err.csv"
    assert main(["eval-error", "--plan", str(maze), "--pairs", "10", "--per-source", "5",
                 "--seeds", "2", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert len(rows) == 20
    summary = json.loads(capsys.readouterr().err)
    assert summary["pairs"] == 10
    assert 0 <= summary["max_error_db"] <= summary["worst_bound_db"] + 1e-9
    assert all(float(r["error_db"]) >= -1e-9 for r in rows)


def test_smoothed(maze, capsys):
    assert main(["smoothed", "--plan", str(maze), "--source", "1.5,1.5", "--dest", "10.5,10.5",
                 "--trials", "5", "--seed", "1"]) == 0
    out, err = capsys.readouterr()
    assert len(_rows(out)) == 5
    rep = json.loads(err)
    assert rep["bound"] == pytest.approx(8 * math.pi * rep["m"])


def test_smoothed_abort_is_invalid_input(maze, capsys):
    code = main(["smoothed", "--plan", str(maze), "--source", "1.5,1.5", "--dest", "10.5,10.5",
                 "--trials", "5", "--policy", "entries", "--rho", "0.5"])
    assert code == EXIT_INVALID
    assert "rejected" in capsys.readouterr().err


def test_stats(maze, capsys):
    assert main(["stats", "--plan", str(maze), "--sources", "2", "--u", "0.3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["sources"]) == 2 and doc["mean_expected_unpruned"] >= 1
    assert doc["worst_error_bound_db"] == pytest.approx(0.5182, abs=1e-4)


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["generate"],
    ["hull", "--plan", "x.json"],
    ["heatmap", "--plan", "x.json", "--source", "1;2"],
    ["heatmap", "--plan", "x.json", "--source", "1,2", "--extent", "4,4,0,0"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == EXIT_OK


@pytest.mark.parametrize("content", [None, "{broken", json.dumps({"walls": [
    {"a": [0, 0], "b": [0, 0], "penetration_db": 1, "diffraction_db_per_90deg": 0}]})])
def test_invalid_plans(tmp_path, capsys, content):
    path = tmp_path / "plan.json"
    if content is not None:
        path.write_text(content)
    assert main(["hull", "--plan", str(path), "--source", "1,1", "--dest", "2,2"]) == EXIT_INVALID
    assert capsys.readouterr().err.startswith("dompath:")


def test_point_outside_plan(maze):
    assert main(["hull", "--plan", str(maze), "--source", "100,100",
                 "--dest", "1.5,1.5"]) == EXIT_INVALID


def test_bad_gp_ratio(maze, tmp_path):
    assert main(["heatmap", "--plan", str(maze), "--source", "1.5,1.5", "--r", "1",
                 "--out", str(tmp_path / "h")]) == EXIT_INVALID
