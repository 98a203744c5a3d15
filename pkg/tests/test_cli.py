import json
import subprocess
import sys

import pytest

from mlio.cli import main


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    d = tmp_path_factory.mktemp("demo")
    assert main(["gen2d", "--out", str(d)]) == 0
    return d


@pytest.fixture(scope="module")
def diet_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("diet")
    assert main(["gen-diet", "--out", str(d)]) == 0
    return d


def _io(d):
    return ["--constraints", str(d / "constraints.json"), "--observations", str(d / "observations.csv")]


def test_gen2d_files(demo):
    lines = (demo / "observations.csv").read_text().splitlines()
    assert lines[0] == "id,x1,x2"
    assert len(lines) == 81
    data = json.loads((demo / "constraints.json").read_text())
    assert [r["name"] for r in data["rows"]] == ["x1>=1", "x1<=5", "x2>=1", "x2<=10", "x1+x2<=15"]


def test_gen2d_deterministic_and_count_one(tmp_path, demo):
    assert main(["gen2d", "--out", str(tmp_path / "a")]) == 0
    assert (tmp_path / "a" / "observations.csv").read_bytes() == (demo / "observations.csv").read_bytes()
    assert main(["gen2d", "--count", "1", "--out", str(tmp_path / "b")]) == 0
    assert len((tmp_path / "b" / "observations.csv").read_text().splitlines()) == 2


def test_gen2d_has_infeasible_points(demo):
    from mlio.clustering import load_observations_csv
    from mlio.polytope import contains, load_constraints
    obs = load_observations_csv(demo / "observations.csv")
    fs = load_constraints(demo / "constraints.json")
    inside = [contains(fs, x) for x in obs.X]
    assert any(inside) and not all(inside)


def test_fit_emb_and_validate(tmp_path, demo, capsys):
    out = tmp_path / "emb.json"
    assert main(["fit", *_io(demo), "--method", "emb", "--clusters", "3", "--seed", "42",
                 "--out", str(out)]) == 0
    sol = json.loads(out.read_text())
    assert sol["L"] == 3 and len(sol["clusters"]) == 3
    assert all(c["gap"] <= 1e-8 for c in sol["clusters"])
    assert main(["validate", *_io(demo), "--solution", str(out)]) == 0
    assert capsys.readouterr().out.strip().endswith("PASS")


def test_fit_is_byte_identical(tmp_path, demo):
    for name in ("a.json", "b.json"):
        assert main(["fit", *_io(demo), "--method", "seq", "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_kmeans_fails_validation_with_gaps(tmp_path, demo, capsys):
    out = tmp_path / "km.json"
    assert main(["fit", *_io(demo), "--method", "kmeans", "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["validate", *_io(demo), "--solution", str(out)]) == 1
    text = capsys.readouterr().out
    assert "FAIL cluster 0 gap" in text


def test_exact_too_large_is_input_error(demo, capsys):
    assert main(["fit", *_io(demo), "--method", "exact", "--clusters", "3"]) == 2
    assert "exceeds" in capsys.readouterr().err


def test_tampered_representative_fails(tmp_path, demo, capsys):
    out = tmp_path / "emb.json"
    main(["fit", *_io(demo), "--out", str(out)])
    data = json.loads(out.read_text())
    data["clusters"][1]["representative"][1] += 0.05
    out.write_text(json.dumps(data))
    capsys.readouterr()
    assert main(["validate", *_io(demo), "--solution", str(out)]) == 1
    assert "strong_duality" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["fit", "--observations", "missing.csv", "--constraints", "missing.json"],
    ["fit", "--method", "nope"],
    ["fit", "--clusters", "0"],
    ["sweep", "--cluster-range", "3..1"],
    ["validate"],
    ["bogus"],
])
def test_input_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_malformed_constraint_file(tmp_path, demo, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"vars": ["x1", "x2"], "rows": [{"name": "r", "coeffs": {"q": 1},
                                                                  "sense": ">=", "rhs": 0}]}))
    assert main(["fit", "--constraints", str(bad), "--observations",
                 str(demo / "observations.csv")]) == 2
    assert "unknown variable" in capsys.readouterr().err


def test_malformed_observations_report_line(tmp_path, demo, capsys):
    bad = tmp_path / "obs.csv"
    bad.write_text("id,x1,x2\na,1,2\nb,1,oops\n")
    assert main(["fit", "--constraints", str(demo / "constraints.json"), "--observations", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_dimension_mismatch_between_files(tmp_path, demo, capsys):
    obs = tmp_path / "obs.csv"
    obs.write_text("id,a,b,c\nk,1,2,3\n")
    assert main(["fit", "--constraints", str(demo / "constraints.json"), "--observations", str(obs)]) == 2


def test_sweep_csv(tmp_path, demo):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", *_io(demo), "--cluster-range", "1..4", "--method", "kmeans,seq,emb",
                 "--split", "0.8", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "L,method,train_total,train_avg,test_avg,gap_sum"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 12
    by = {(r[0], r[1]): float(r[2]) for r in rows}
    for L in "1234":
        assert by[L, "emb"] <= by[L, "seq"] + 1e-9
    assert all(r[4] for r in rows)


def test_sweep_tiny_includes_exact(tmp_path):
    assert main(["gen2d", "--count", "8", "--out", str(tmp_path)]) == 0
    out = tmp_path / "s.csv"
    assert main(["sweep", *_io(tmp_path), "--cluster-range", "1..4", "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    assert sorted(int(r[0]) for r in rows if r[1] == "exact") == [1, 2, 3, 4]


def test_unconstrained_fit_needs_no_constraints(tmp_path, demo):
    out = tmp_path / "u.json"
    assert main(["fit", "--observations", str(demo / "observations.csv"), "--unconstrained",
                 "--method", "emb", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["unconstrained"] is True
    assert all(c["cost_vector"] == [0.0, 0.0] for c in data["clusters"])
    assert main(["validate", "--observations", str(demo / "observations.csv"),
                 "--solution", str(out)]) == 0


def test_l1_fit(tmp_path, demo):
    out = tmp_path / "l1.json"
    assert main(["fit", *_io(demo), "--metric", "l1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["metric"] == "l1"
    assert main(["validate", *_io(demo), "--solution", str(out)]) == 0


def test_diet_report(tmp_path, diet_dir):
    spec = diet_dir / "nutrient_spec.json"
    obs = diet_dir / "observations.csv"
    sol = tmp_path / "sol.json"
    assert main(["fit", "--constraints", str(spec), "--observations", str(obs), "--out", str(sol)]) == 0
    assert main(["validate", "--constraints", str(spec), "--observations", str(obs),
                 "--solution", str(sol)]) == 0
    rep = tmp_path / "rep"
    assert main(["report", "--constraints", str(spec), "--observations", str(obs),
                 "--solution", str(sol), "--out", str(rep)]) == 0
    lines = (rep / "nutrient_report.csv").read_text().splitlines()
    assert lines[0] == "cluster,entity,value,lb,ub,in_bounds"
    emb = [line for line in lines[1:] if line.startswith("emb:")]
    assert emb and all(line.endswith(",true") for line in emb)
    assert any(line.startswith("kmeans:") and ",sodium," in line and line.endswith(",false")
               for line in lines)
    assert (rep / "food_group_report.csv").read_text().startswith("cluster,group,mlio_total,kmeans_total\n")


def test_report_rejects_plain_constraints(tmp_path, demo):
    sol = tmp_path / "s.json"
    main(["fit", *_io(demo), "--out", str(sol)])
    assert main(["report", *_io(demo), "--solution", str(sol), "--out", str(tmp_path / "r")]) == 2


def test_module_entry_point(demo):
    res = subprocess.run([sys.executable, "-m", "mlio", "validate"], capture_output=True, text=True)
    assert res.returncode == 2
    res = subprocess.run([sys.executable, "-m", "mlio", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "fit" in res.stdout
