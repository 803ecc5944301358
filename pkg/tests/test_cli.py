import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from tornado_retrofit import model
from tornado_retrofit.cli import main

from instances import random_instance

TRIANGLE = "0,0;4,0;2,1.1"


@pytest.fixture
def inst_path(tmp_path):
    inst = random_instance(np.random.default_rng(0), n_locations=5)
    path = tmp_path / "inst.json"
    model.save(inst, path)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_geomcheck_triangle(capsys):
    code, out = run(capsys, "geomcheck", "--points", TRIANGLE, "--delta", 1, "--length", 2)
    assert code == 0
    lines = out.out.splitlines()
    assert lines[0] == "infeasible"
    doc = json.loads(lines[1])
    assert doc["infeasible_pairs"] == [] and doc["infeasible_triples"] == [] and doc["stabbing_count"] == 3
    code, out = run(capsys, "geomcheck", "--points", TRIANGLE, "--delta", 1, "--length", "inf")
    assert out.out.splitlines()[0] == "feasible"


def test_geomcheck_points_file(capsys, tmp_path):
    (tmp_path / "p.csv").write_text("x,y\n0,0\n4,0\n")
    code, out = run(capsys, "geomcheck", "--points", tmp_path / "p.csv", "--delta", 1, "--length", 2)
    assert out.out.splitlines()[0] == "feasible"


def test_solve_zero_budget(capsys, inst_path, tmp_path):
    out = tmp_path / "out"
    code, _ = run(capsys, "solve", "--instance", inst_path, "--budget", 0, "--out", out)
    assert code == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["strategies"] == [0] * 5
    for name in ("trace.csv", "plan.geojson", "timings.json"):
        assert (out / name).exists()


def test_solve_is_byte_identical(capsys, inst_path, tmp_path):
    run(capsys, "solve", "--instance", inst_path, "--out", tmp_path / "a")
    run(capsys, "solve", "--instance", inst_path, "--out", tmp_path / "b")
    for name in ("report.json", "plan.geojson"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep_nonincreasing(capsys, inst_path, tmp_path):
    budgets = []
    for b in (0, 10, 20, 40, 80):
        budgets += ["--budget", b]
    code, _ = run(capsys, "sweep", "--instance", inst_path, *budgets, "--out", tmp_path)
    assert code == 0
    vals = [float(r["v"]) for r in csv.DictReader(open(tmp_path / "sweep.csv"))]
    assert len(vals) == 5
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_subproblem_and_simulate(capsys, inst_path, tmp_path):
    code, _ = run(capsys, "subproblem", "--instance", inst_path, "--mode", "AVC", "--out", tmp_path,
                  "--trace", tmp_path / "t.jsonl")
    assert code == 0
    doc = json.loads((tmp_path / "subproblem.json").read_text())
    assert doc["mode"] == "AVC" and len(doc["z"]) == 5
    code, _ = run(capsys, "simulate", "--instance", inst_path, "-n", 20, "--random-fractions", "0.5",
                  "--policy-replications", 2, "--out", tmp_path)
    assert code == 0
    sim = list(csv.DictReader(open(tmp_path / "simulation.csv")))
    pol = list(csv.DictReader(open(tmp_path / "policies.csv")))
    assert sim[0]["policy"] == "robust" and sim[0]["replications"] == "20"
    assert [r["policy"] for r in pol] == ["robust", "random-0.5"]
    assert float(pol[0]["maximum"]) <= float(pol[1]["maximum"])


def test_gen(capsys, tmp_path):
    rows = ["id,x,y,population,area"] + [f"b{i},{i % 3},{i // 3},{10 + i},{200 + i}" for i in range(9)]
    (tmp_path / "blocks.csv").write_text("\n".join(rows) + "\n")
    code, _ = run(capsys, "gen", "--blocks", tmp_path / "blocks.csv", "-k", 3, "--budget", 1000, "--out", tmp_path)
    assert code == 0
    inst = model.load(tmp_path / "instance.json")
    assert inst.n_locations == 3 and inst.budget == 100_000 and inst.delta == 0.375


def test_exit_codes(capsys, inst_path, tmp_path):
    assert run(capsys, "solve", "--instance", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "subproblem", "--instance", inst_path, "--strategies", "x")[0] == 2
    assert run(capsys, "subproblem", "--instance", inst_path, "--budget", 0, "--strategies", "1,1,1,1,1")[0] == 3
    doc = json.loads(inst_path.read_text())
    doc["budget_cents"] = -5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert run(capsys, "solve", "--instance", bad)[0] == 3
    fail = f"{sys.executable} -c 'import sys; sys.exit(1)' {{in}} {{out}}"
    code, out = run(capsys, "solve", "--instance", inst_path, "--solver-cmd", fail, "--out", tmp_path)
    assert code == 4 and "solver" in out.err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tornado_retrofit.cli", "geomcheck", "--points", TRIANGLE,
                           "--delta", "1", "--length", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "infeasible"
