import csv
import json
import os
import subprocess

import pytest

CLI = os.environ.get("QPSKBF_CLI", "qpskbf")


def run(*args, cwd=None):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, cwd=cwd)


def test_no_subcommand_is_usage_error():
    assert run().returncode == 2
    assert run("frobnicate").returncode == 2
    assert run("--help").returncode == 0


def test_dataset_is_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run("dataset", "--n", 4, "--count", 12, "--seed", 7, "--out", a).returncode == 0
    assert run("dataset", "--n", 4, "--count", 12, "--seed", 7, "--out", b, "--threads", 2).returncode == 0
    assert a.read_bytes() == b.read_bytes()
    rows = [json.loads(line) for line in a.read_text().splitlines()]
    assert len(rows) == 12
    assert all(r["labels"][0] == 0 for r in rows)
    meta = json.loads((tmp_path / "a.jsonl.meta.json").read_text())
    assert meta["rows"] == 12


def test_dataset_rejects_oversized_arrays(tmp_path):
    r = run("dataset", "--n", 20, "--count", 1, "--out", tmp_path / "x.jsonl")
    assert r.returncode == 2
    assert "4^(N-1)" in r.stderr or "4^" in r.stderr


def test_train_is_byte_identical(tmp_path):
    data = tmp_path / "d.jsonl"
    assert run("dataset", "--n", 3, "--count", 200, "--seed", 1, "--out", data).returncode == 0
    outs = []
    for threads in (1, 2):
        model = tmp_path / f"m{threads}.json"
        r = run("train", "--dataset", data, "--out", model, "--rounds", 15, "--seed", 4, "--threads", threads)
        assert r.returncode == 0, r.stderr
        assert "100.0%" in r.stdout
        outs.append(model.read_bytes())
    assert outs[0] == outs[1]


def test_train_bad_inputs(tmp_path):
    assert run("train", "--dataset", tmp_path / "missing.jsonl", "--out", tmp_path / "m.json").returncode != 0
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    assert run("train", "--dataset", bad, "--out", tmp_path / "m.json").returncode in (1, 2)
    assert run("train", "--dataset", bad, "--out", tmp_path / "m.json", "--depth", 0).returncode == 2


def solve(*args):
    r = run("solve", *args)
    assert r.returncode == 0, r.stderr
    return json.loads(r.stdout)


def test_solve_methods():
    oracle = solve("--n", 6, "--method", "oracle", "--seed", 3)
    greedy = solve("--n", 6, "--method", "greedy", "--seed", 3)
    assert oracle["symbols"][0] == 0
    assert oracle["objective"] >= greedy["objective"] - 1e-12
    assert oracle["sat_gain_db"] <= 0.0
    capon = solve("--n", 6, "--method", "capon", "--seed", 3)
    assert capon["distortionless"]["ok"]
    assert capon["distortionless"]["error"] < 1e-9
    assert len(capon["weights"]) == 6


def test_solve_usage_errors(tmp_path):
    assert run("solve", "--n", 6, "--method", "annealing").returncode == 2
    assert run("solve", "--n", 6, "--method", "gbdt_refine").returncode == 2
    assert run("solve", "--n", 16, "--method", "oracle").returncode == 2
    scenario = tmp_path / "s.json"
    scenario.write_text('{"sat_dir": {"azimuth_deg": 10}}')
    assert run("solve", "--n", 4, "--method", "oracle", "--scenario-json", scenario).returncode == 2


def test_solve_scenario_file(tmp_path):
    scenario = {
        "sat_dir": {"azimuth_deg": 30.0, "elevation_deg": 60.0},
        "jammer_dirs": [{"azimuth_deg": 200.0, "elevation_deg": 10.0}],
        "js_db_per_jammer": [50.0],
        "snr_db": -25.0,
        "snapshots": 1024,
        "seed": 17,
    }
    path = tmp_path / "s.json"
    path.write_text(json.dumps(scenario))
    out = solve("--n", 4, "--method", "coord_descent", "--scenario-json", path)
    assert out["scenario"]["seed"] == 17
    assert out["intf_gain_db"] < out["sat_gain_db"]


def test_pattern_export(tmp_path):
    out = tmp_path / "p.csv"
    r = run("pattern", "--n", 8, "--method", "capon", "--seed", 2, "--out", out)
    assert r.returncode == 0, r.stderr
    with out.open() as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 180 * 46
    assert max(float(row["gain_db"]) for row in rows) == 0.0
    assert (tmp_path / "p.csv.meta.json").exists()


def test_bench_restricted_methods(tmp_path):
    r = run("bench", "--n", 4, "--trials", 4, "--methods", "capon,oracle", "--out-dir", tmp_path / "b")
    assert r.returncode == 0, r.stderr
    summary = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert [m["method"] for m in summary["methods"]] == ["capon", "oracle"]
    assert summary["trial_count"] == 4
    assert "Oracle" in r.stdout
    assert (tmp_path / "b" / "trials.csv").exists()


def test_bench_usage_errors(tmp_path):
    assert run("bench", "--methods", "gbdt_refine", "--trials", 2, "--out-dir", tmp_path).returncode == 2
    assert run("bench", "--methods", "bogus", "--out-dir", tmp_path).returncode == 2
    assert run("bench", "--trials", 0, "--out-dir", tmp_path).returncode == 2


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_elements": 4, "trials": 3, "methods": ["naive"], "master_seed": 9}))
    r = run("bench", "--config", cfg, "--out-dir", tmp_path / "a")
    assert r.returncode == 0, r.stderr
    a = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert a["trial_count"] == 3
    assert a["config"]["n_elements"] == 4
    r = run("bench", "--config", cfg, "--trials", 2, "--out-dir", tmp_path / "b")
    assert r.returncode == 0, r.stderr
    b = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert b["trial_count"] == 2
    assert b["config"]["master_seed"] == 9
