import json
import os
import subprocess
import sys

import numpy as np
import pytest

from stpca.cli import main
from stpca.io import read_table

FAST_FIT = ["--radius-mode", "fixed", "--radius", "1.5", "--grid-m", "12", "--restarts", "1"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def t2_csv(tmp_path, capsys):
    assert run(capsys, "simulate", "--scenario", "t2-clusters", "--n", "15", "--seed", "2", "--output-dir", str(tmp_path))[0] == 0
    return tmp_path / "t2-clusters.csv"


@pytest.fixture
def fitted(tmp_path, capsys, t2_csv):
    out = tmp_path / "fit"
    code, stdout, _ = run(capsys, "fit", "--input", str(t2_csv), "--output-dir", str(out), *FAST_FIT)
    assert code == 0
    return out, json.loads(stdout)


class TestSimulate:
    def test_files(self, t2_csv):
        X, _ = read_table(t2_csv)
        labels, _ = read_table(t2_csv.with_name("t2-clusters_labels.csv"))
        assert X.shape == (45, 2) and labels.shape == (45, 1)

    def test_stdout_with_header(self, capsys):
        code, out, _ = run(capsys, "simulate", "--scenario", "t1-circle", "--n", "5", "--header")
        lines = out.strip().splitlines()
        assert code == 0 and lines[0] == "theta_1" and len(lines) == 6

    def test_unknown_scenario_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--scenario", "t9"])
        assert exc.value.code == 2


class TestFit:
    def test_summary_and_artifacts(self, fitted):
        out, summary = fitted
        assert summary["n"] == 45 and summary["d"] == 2
        assert summary["r_star"] == 1.5
        assert sum(summary["torus_proportions"]) == pytest.approx(1.0)
        assert {p.name for p in out.iterdir()} == {"model.json", "scores.csv", "embedding.csv", "curve.csv", "variance.csv"}
        assert json.loads((out / "model.json").read_text())["schema"] == 1

    def test_byte_identical_reruns(self, tmp_path, capsys, t2_csv):
        for name in ("a", "b"):
            assert run(capsys, "fit", "--input", str(t2_csv), "--output-dir", str(tmp_path / name), "--seed", "3", *FAST_FIT)[0] == 0
        for f in ("model.json", "scores.csv", "curve.csv", "variance.csv", "embedding.csv"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_stdin_input(self, tmp_path, capsys, t2_csv, monkeypatch):
        import io

        monkeypatch.setattr(sys, "stdin", io.StringIO(t2_csv.read_text()))
        code, out, _ = run(capsys, "fit", "--input", "-", "--output-dir", str(tmp_path / "s"), *FAST_FIT)
        assert code == 0 and json.loads(out)["n"] == 45

    def test_missing_input_exit_2(self, tmp_path, capsys):
        code, _, err = run(capsys, "fit", "--input", str(tmp_path / "missing.csv"), *FAST_FIT)
        assert code == 2 and "error" in err

    def test_parse_error_exit_2(self, tmp_path, capsys):
        (tmp_path / "bad.csv").write_text("0.1,0.2\n0.3,oops\n")
        code, _, err = run(capsys, "fit", "--input", str(tmp_path / "bad.csv"), *FAST_FIT)
        assert code == 2 and "row 2" in err and "column 2" in err

    def test_radius_without_fixed_mode_exit_2(self, capsys, t2_csv):
        code, _, _ = run(capsys, "fit", "--input", str(t2_csv), "--radius", "1.5")
        assert code == 2

    def test_numerical_failure_exit_3(self, tmp_path, capsys, t2_csv, monkeypatch):
        import stpca.model as model
        from stpca.errors import NumericalFailureError

        def boom(*a, **k):
            raise NumericalFailureError("non-finite stress")

        monkeypatch.setattr(model, "solve_smds", boom)
        code, _, err = run(capsys, "fit", "--input", str(t2_csv), "--output-dir", str(tmp_path / "x"), *FAST_FIT)
        assert code == 3 and "[smds]" in err


class TestPredict:
    def test_zero_score_gives_mean_prediction(self, tmp_path, capsys, fitted):
        out, _ = fitted
        (tmp_path / "zero.csv").write_text("0,0\n")
        code, stdout, _ = run(capsys, "predict", "--model", str(out / "model.json"), "--input", str(tmp_path / "zero.csv"))
        assert code == 0
        lines = stdout.strip().splitlines()
        assert lines[0] == "theta_1,theta_2,objective"
        x = np.array([float(v) for v in lines[1].split(",")[:2]])
        mean = np.array(json.loads((out / "model.json").read_text())["torus_variance"]["mean_prediction"])
        diff = np.angle(np.exp(1j * (x - mean)))
        assert np.abs(diff).max() <= 1e-8

    def test_sphere_points_to_file(self, tmp_path, capsys, fitted):
        out, _ = fitted
        emb = out / "embedding.csv"
        code, _, _ = run(capsys, "predict", "--model", str(out / "model.json"), "--input", str(emb), "--header", "--kind", "sphere", "--output-dir", str(tmp_path / "p"))
        assert code == 0
        pred, _ = read_table(tmp_path / "p" / "predictions.csv", header=True)
        assert pred.shape == (45, 3)

    def test_wrong_width_exit_2(self, tmp_path, capsys, fitted):
        out, _ = fitted
        (tmp_path / "w.csv").write_text("0,0,0\n")
        assert run(capsys, "predict", "--model", str(out / "model.json"), "--input", str(tmp_path / "w.csv"))[0] == 2

    def test_bad_model_exit_2(self, tmp_path, capsys):
        (tmp_path / "m.json").write_text('{"schema": 7}')
        (tmp_path / "z.csv").write_text("0,0\n")
        assert run(capsys, "predict", "--model", str(tmp_path / "m.json"), "--input", str(tmp_path / "z.csv"))[0] == 2


def test_radius(tmp_path, capsys):
    code, out, _ = run(capsys, "radius", "-d", "1", "--mc-replicates", "10", "--mc-size", "30", "--output-dir", str(tmp_path))
    res = json.loads(out)
    assert code == 0 and res["d"] == 1 and 0.8 < res["r_star"] < 1.2
    trace, _ = read_table(tmp_path / "radius_trace.csv", header=True)
    assert trace.shape == (res["evaluations"], 2)


def test_radius_bad_dim(capsys):
    assert run(capsys, "radius", "-d", "0")[0] == 2


def test_embed_check(capsys, t2_csv):
    code, out, _ = run(capsys, "embed-check", "--input", str(t2_csv), "--radius", "1.5")
    rep = json.loads(out)
    assert code == 0 and isinstance(rep["psd"], bool)


class TestCluster:
    def test_with_truth(self, tmp_path, capsys):
        assert run(capsys, "simulate", "--scenario", "t2-clusters", "--seed", "5", "--output-dir", str(tmp_path))[0] == 0
        angles = read_table(tmp_path / "t2-clusters.csv")[0][:, 0]
        code, out, _ = run(
            capsys, "cluster", "--input", str(tmp_path / "t2-clusters.csv"),
            "--truth", str(tmp_path / "t2-clusters_labels.csv"), "--output-dir", str(tmp_path / "c"),
        )
        res = json.loads(out)
        assert code == 0 and res["n_clusters"] >= 1
        assert 0 < res["classification_rate"] <= 1
        labels, _ = read_table(tmp_path / "c" / "labels.csv", header=True)
        assert labels.shape == (angles.size, 1)
        assert json.loads((tmp_path / "c" / "modes.json").read_text()) == res

    def test_rule_bandwidth_and_column_check(self, tmp_path, capsys, t2_csv):
        assert run(capsys, "cluster", "--input", str(t2_csv), "--bandwidth", "rule")[0] == 0
        assert run(capsys, "cluster", "--input", str(t2_csv), "--column", "3")[0] == 2


class TestUniformity:
    def test_uniform_sample(self, tmp_path, capsys):
        a = np.random.default_rng(0).uniform(-180, 180, 400)
        np.savetxt(tmp_path / "u.csv", a[:, None], fmt="%.17g")
        code, out, _ = run(capsys, "uniformity", "--input", str(tmp_path / "u.csv"), "--angle-unit", "degrees")
        res = json.loads(out)
        assert code == 0 and res["n"] == 400 and res["p_value"] > 0.01

    def test_too_small_exit_2(self, tmp_path, capsys):
        (tmp_path / "s.csv").write_text("0.1\n0.2\n")
        assert run(capsys, "uniformity", "--input", str(tmp_path / "s.csv"))[0] == 2


@pytest.mark.parametrize("level,logged", [("INFO", True), ("WARNING", False)])
def test_module_entry_point_and_log_env(level, logged):
    env = dict(os.environ, STPCA_LOG=level)
    res = subprocess.run(
        [sys.executable, "-m", "stpca.cli", "radius", "-d", "1", "--mc-replicates", "4", "--mc-size", "20"],
        capture_output=True, text=True, env=env, check=False,
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["d"] == 1
    assert ("INFO stpca.radius" in res.stderr) == logged
