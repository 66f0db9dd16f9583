"""Tests for the command-line interface: subcommand results, manifests,
determinism, error handling and exit codes."""
import json
import subprocess
import sys

import numpy as np
import pytest

from tropdiv.cli import main
from tropdiv.compress import model_from_json, model_scores

PROBLEM = {
    "p": {"dim": 1, "terms": [{"a": [-2], "b": -1}, {"a": [0], "b": 1},
                              {"a": [1], "b": 1}, {"a": [3], "b": -3}]},
    "d": {"dim": 1, "terms": [{"a": [1], "b": 0}, {"a": [2], "b": -1}]},
}

NETWORK = {
    "input_dim": 2,
    "layers": [
        {"W": [[1.0, -2.0], [0.5, 1.0], [3.0, 0.0]],
         "b": [0.1, -0.2, 0.0], "activation": "relu"},
        {"W": [[1.0, -1.5, 0.25], [0.2, 0.8, -1.0], [0.0, 0.3, 0.6]],
         "b": [0.3, 0.0, -0.1], "activation": "linear"},
    ],
}


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "problem.json").write_text(json.dumps(PROBLEM))
    (tmp_path / "net.json").write_text(json.dumps(NETWORK))
    pts = np.random.default_rng(0).normal(size=(60, 2))
    np.savetxt(tmp_path / "pts.csv", pts, delimiter=",")
    json.dump({"dim": 2, "units": [{"a": [1.5, 0.0], "b": 0.2},
                                   {"a": [0.5, 1.0], "b": -0.1}]},
              open(tmp_path / "comp.json", "w"))
    return tmp_path


def read(path):
    return json.loads(path.read_text())


# ---------------------------------------------------------------------------
# Exact division.
# ---------------------------------------------------------------------------

def test_divide_exact_golden(workdir):
    rc = main(["divide-exact", "--problem", "problem.json",
               "--out", "result.json"])
    assert rc == 0
    result = read(workdir / "result.json")
    assert set(result) == {"quotient", "remainder", "nontrivial", "effective"}
    terms = {(t["a"][0], t["b"]) for t in result["quotient"]["terms"]}
    assert terms == {(-3.0, -1.0), (-1.0, 1.0), (-0.5, 1.0), (1.0, -2.0)}
    assert {(t["a"][0], t["b"]) for t in result["remainder"]["terms"]} == \
        {(1.0, 1.0)}
    assert result["nontrivial"] and result["effective"]
    manifest = read(workdir / "result.json.manifest.json")
    assert manifest["command"] == "divide-exact"
    assert manifest["outputs"] == ["result.json"]
    assert manifest["config"]["problem"] == "problem.json"
    assert manifest["elapsed_seconds"] >= 0


def test_divide_exact_stdout_and_default_manifest(workdir, capsys):
    rc = main(["divide-exact", "--problem", "problem.json"])
    assert rc == 0
    result = json.loads(capsys.readouterr().out)
    assert set(result) == {"quotient", "remainder", "nontrivial", "effective"}
    assert (workdir / "run-manifest.json").exists()


def test_missing_input_is_machine_readable(workdir, capsys):
    rc = main(["divide-exact", "--problem", "absent.json"])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "FileNotFoundError" or \
        err["error"]["type"] == "OSError"


def test_unknown_flag_exits_2(workdir):
    with pytest.raises(SystemExit) as info:
        main(["divide-exact", "--problem", "problem.json", "--frobnicate"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["transmogrify"])
    assert info.value.code == 2


# ---------------------------------------------------------------------------
# Approximate division.
# ---------------------------------------------------------------------------

def approx_args(out, trace, seed=7):
    return ["divide-approx", "--problem", "problem.json", "--terms", "3",
            "--samples", "200", "--seed", str(seed), "--out", out,
            "--trace", trace]


def test_divide_approx_deterministic(workdir):
    assert main(approx_args("a1.json", "t1.csv")) == 0
    assert main(approx_args("a2.json", "t2.csv")) == 0
    assert (workdir / "a1.json").read_bytes() == \
        (workdir / "a2.json").read_bytes()
    assert (workdir / "t1.csv").read_bytes() == \
        (workdir / "t2.csv").read_bytes()
    result = read(workdir / "a1.json")
    assert set(result) == {"quotient", "remainder", "nontrivial", "effective"}
    rows = [line.split(",") for line in
            (workdir / "t1.csv").read_text().splitlines()]
    assert [int(r[0]) for r in rows] == list(range(len(rows)))
    errors = [float(r[1]) for r in rows]
    assert all(e >= -1e-9 for e in errors)
    assert all(a >= b - 1e-9 for a, b in zip(errors, errors[1:]))
    manifest = read(workdir / "a1.json.manifest.json")
    assert manifest["seed"] == 7
    assert manifest["checks"]["cover_within_tol"] is True
    assert manifest["outputs"] == ["a1.json", "t1.csv"]


def test_tolerance_env_and_flag(workdir, monkeypatch):
    monkeypatch.setenv("TROPDIV_TOL", "-1.0")
    assert main(approx_args("e1.json", "e1.csv")) == 0
    assert read(workdir / "e1.json.manifest.json")["checks"][
        "cover_within_tol"] is False
    assert main(approx_args("e2.json", "e2.csv") + ["--tol", "1.0"]) == 0
    assert read(workdir / "e2.json.manifest.json")["checks"][
        "cover_within_tol"] is True


def test_divide_approx_rejects_bad_config(workdir, capsys):
    rc = main(["divide-approx", "--problem", "problem.json", "--terms", "0"])
    assert rc == 1
    assert json.loads(capsys.readouterr().err)["error"]["type"] == \
        "ValueError"


# ---------------------------------------------------------------------------
# Composite division.
# ---------------------------------------------------------------------------

def test_divide_composite(workdir):
    rc = main(["divide-composite", "--composite", "comp.json",
               "--samples", "pts.csv", "--terms", "2", "--iterations", "30",
               "--seed", "1", "--out", "q.json", "--trace", "qt.csv"])
    assert rc == 0
    result = read(workdir / "q.json")
    assert set(result) == {"quotient"}
    assert len(result["quotient"]["units"]) == 2
    manifest = read(workdir / "q.json.manifest.json")
    assert manifest["checks"]["certificate_feasible"] is True
    trace_rows = (workdir / "qt.csv").read_text().splitlines()
    assert len(trace_rows) == 31


# ---------------------------------------------------------------------------
# Compression.
# ---------------------------------------------------------------------------

def test_compress_binary_maxout_cli(workdir):
    rc = main(["compress", "--network", "net.json", "--samples", "pts.csv",
               "--kind", "maxout-binary", "--classes", "0,2", "--terms", "2",
               "--seed", "3", "--out", "m.json"])
    assert rc == 0
    model = model_from_json((workdir / "m.json").read_text())
    assert model.kind == "maxout-binary"
    pts = np.loadtxt(workdir / "pts.csv", delimiter=",", ndmin=2)
    assert model_scores(model, pts).shape == (60,)
    manifest = read(workdir / "m.json.manifest.json")
    assert manifest["checks"]["quotients_below_dividends"] is True
    assert manifest["config"]["kind"] == "maxout-binary"


def test_compress_binary_needs_classes_for_multioutput(workdir, capsys):
    rc = main(["compress", "--network", "net.json", "--samples", "pts.csv",
               "--kind", "maxout-binary", "--terms", "2"])
    assert rc == 1
    assert json.loads(capsys.readouterr().err)["error"]["type"] == \
        "ValueError"


def test_compress_multiclass_cli_jobs_identical(workdir):
    base = ["compress", "--network", "net.json", "--samples", "pts.csv",
            "--kind", "multiclass-simplified", "--terms", "2", "--seed", "3"]
    assert main(base + ["--out", "j1.json", "--jobs", "1"]) == 0
    assert main(base + ["--out", "j2.json", "--jobs", "3"]) == 0
    assert read(workdir / "j1.json") == read(workdir / "j2.json")
    model = model_from_json((workdir / "j1.json").read_text())
    assert len(model.groups) == 3
    manifest = read(workdir / "j1.json.manifest.json")
    assert manifest["checks"]["quotients_below_dividends"] is True


def test_compress_feature_export_cli(workdir):
    np.savetxt(workdir / "fresh.csv",
               np.random.default_rng(5).normal(size=(9, 2)), delimiter=",")
    rc = main(["compress", "--network", "net.json", "--samples", "pts.csv",
               "--kind", "multiclass-simplified", "--terms", "2",
               "--seed", "3", "--out", "m.json",
               "--features-out", "feats.csv",
               "--feature-samples", "fresh.csv"])
    assert rc == 0
    feats = np.loadtxt(workdir / "feats.csv", delimiter=",", ndmin=2)
    assert feats.shape == (9, 3 * 2)
    assert "feats.csv" in read(workdir / "m.json.manifest.json")["outputs"]
    rc = main(["compress", "--network", "net.json", "--samples", "pts.csv",
               "--kind", "maxout-binary", "--classes", "0,1", "--terms", "2",
               "--out", "b.json", "--features-out", "nope.csv"])
    assert rc == 1


def test_compress_multibinary_cli(workdir):
    rc = main(["compress", "--network", "net.json", "--samples", "pts.csv",
               "--kind", "multiclass-multibinary", "--terms", "2",
               "--subset", "4", "--seed", "3", "--out", "mb.json"])
    assert rc == 0
    model = model_from_json((workdir / "mb.json").read_text())
    assert len(model.groups) == 4
    rc = main(["compress", "--network", "net.json", "--samples", "pts.csv",
               "--kind", "multiclass-multibinary", "--terms", "2",
               "--subset", "5", "--features", "random", "--seed", "3",
               "--pairs", "0-1", "--out", "mr.json"])
    assert rc == 0
    model = model_from_json((workdir / "mr.json").read_text())
    assert len(model.groups) == 5
    assert all(s.shape == (1, 2) for s, _ in model.groups)


def test_compress_sample_count_trims(workdir):
    rc = main(["compress", "--network", "net.json", "--samples", "pts.csv",
               "--sample-count", "10", "--kind", "maxout-binary",
               "--classes", "0,2", "--terms", "2", "--seed", "0",
               "--out", "trim.json"])
    assert rc == 0
    assert read(workdir / "trim.json.manifest.json")["config"][
        "sample_count"] == 10


# ---------------------------------------------------------------------------
# Pruning, evaluation, parameter counts.
# ---------------------------------------------------------------------------

def test_prune_cli(workdir, capsys):
    rc = main(["prune-l1", "--network", "net.json", "--keep", "2",
               "--out", "pruned.json"])
    assert rc == 0
    pruned = read(workdir / "pruned.json")
    assert len(pruned["layers"][0]["W"]) == 2
    rc = main(["prune-l1", "--network", "net.json", "--keep", "0"])
    assert rc == 1
    assert json.loads(capsys.readouterr().err)["error"]["type"] == \
        "ValueError"


def test_evaluate_cli(workdir):
    pts = np.loadtxt(workdir / "pts.csv", delimiter=",", ndmin=2)
    W1 = np.array(NETWORK["layers"][0]["W"])
    b1 = np.array(NETWORK["layers"][0]["b"])
    W2 = np.array(NETWORK["layers"][1]["W"])
    b2 = np.array(NETWORK["layers"][1]["b"])
    z = np.maximum(pts @ W1.T + b1, 0) @ W2.T + b2
    np.savetxt(workdir / "labels.csv", z.argmax(axis=1), delimiter=",",
               fmt="%d")
    rc = main(["evaluate", "--model", "net.json", "--samples", "pts.csv",
               "--labels", "labels.csv", "--out", "e.json"])
    assert rc == 0
    assert read(workdir / "e.json") == {"error_rate": 0.0, "samples": 60}
    rc = main(["evaluate", "--model", "net.json", "--samples", "pts.csv",
               "--labels", "labels.csv", "--sample-count", "25",
               "--out", "e25.json"])
    assert rc == 0
    assert read(workdir / "e25.json")["samples"] == 25


def test_count_params_cli(workdir, capsys):
    rc = main(["count-params", "--kind", "maxout-binary", "--n", "768",
               "--terms", "5", "--out", "c.json"])
    assert rc == 0
    assert read(workdir / "c.json") == {"params": 7691}
    rc = main(["count-params", "--model", "net.json"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out) == \
        {"params": 2 * 3 + 3 + 3 * 3 + 3}
    rc = main(["count-params", "--kind", "maxout-binary"])
    assert rc == 1
    assert json.loads(capsys.readouterr().err)["error"]["message"] == \
        "--kind needs --n"


def test_module_entry_point(workdir):
    proc = subprocess.run(
        [sys.executable, "-m", "tropdiv", "count-params", "--kind",
         "original-binary", "--n", "768", "--hidden", "100"],
        capture_output=True, text=True, cwd=workdir)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"params": 77001}
