import json
import os
import subprocess
import sys

import numpy as np
import pytest


def run_cli(args, cwd, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "ssvkit.cli", *args],
        cwd=cwd, env=env, capture_output=True, text=True,
    )


@pytest.fixture
def workdir(tmp_path):
    rng = np.random.default_rng(7)
    X = rng.normal(size=(40, 3))
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1] + 0.1 * rng.normal(size=40)
    lines = ["a,b,c,target"]
    for row, t in zip(X, y):
        lines.append(",".join(repr(float(v)) for v in row) + f",{float(t)!r}")
    (tmp_path / "train.csv").write_text("\n".join(lines) + "\n")
    lines = ["a,b,c"]
    for row in X[:5]:
        lines.append(",".join(repr(float(v)) for v in row))
    (tmp_path / "instances.csv").write_text("\n".join(lines) + "\n")
    return tmp_path


def fitted(workdir):
    res = run_cli(
        ["fit", "--data", "train.csv", "--target", "target",
         "--inducing", "25", "-o", "posterior.json"],
        workdir,
    )
    assert res.returncode == 0, res.stderr
    return workdir / "posterior.json"


class TestFit:
    def test_writes_posterior_and_summary(self, workdir):
        path = fitted(workdir)
        doc = json.loads(path.read_text())
        assert set(doc) == {
            "inducing_points", "mean_at_inducing", "cov_at_inducing",
            "kernel", "noise",
        }
        assert len(doc["inducing_points"]) == 25
        assert set(doc["kernel"]) == {"variance", "lengthscales"}

    def test_missing_target_column_exits_2(self, workdir):
        res = run_cli(["fit", "--data", "train.csv", "--target", "nope"], workdir)
        assert res.returncode == 2
        assert "target column" in res.stderr

    def test_non_numeric_cell_is_located(self, workdir):
        (workdir / "bad.csv").write_text("a,b\n1.0,oops\n")
        res = run_cli(["fit", "--data", "bad.csv", "--target", "a"], workdir)
        assert res.returncode == 2
        assert "oops" in res.stderr and "row 2" in res.stderr and "'b'" in res.stderr

    def test_missing_file_exits_2(self, workdir):
        res = run_cli(["fit", "--data", "absent.csv", "--target", "t"], workdir)
        assert res.returncode == 2


class TestExplain:
    def test_json_output_and_efficiency(self, workdir):
        fitted(workdir)
        res = run_cli(
            ["explain", "--posterior", "posterior.json",
             "--instances", "instances.csv", "-o", "expl.json"],
            workdir,
        )
        assert res.returncode == 0, res.stderr
        doc = json.loads((workdir / "expl.json").read_text())
        assert doc["feature_names"] == ["a", "b", "c"]
        means = np.asarray(doc["means"])
        assert means.shape == (5, 3)
        covs = [np.asarray(c) for c in doc["cov"]]
        assert all(c.shape == (3, 3) for c in covs)
        # each covariance is PSD up to tiny jitter
        for c in covs:
            assert np.min(np.linalg.eigvalsh(0.5 * (c + c.T))) > -1e-8

    def test_csv_output(self, workdir):
        fitted(workdir)
        res = run_cli(
            ["explain", "--posterior", "posterior.json",
             "--instances", "instances.csv", "--format", "csv",
             "-o", "expl.csv"],
            workdir,
        )
        assert res.returncode == 0, res.stderr
        lines = (workdir / "expl.csv").read_text().strip().splitlines()
        assert lines[0] == "instance,feature,mean,sd,lo,hi"
        assert len(lines) == 1 + 5 * 3

    def test_bayes_variants_share_means(self, workdir):
        fitted(workdir)
        docs = {}
        for algo in ("gpshap", "bayesgpshap", "bayesshap"):
            res = run_cli(
                ["explain", "--posterior", "posterior.json",
                 "--instances", "instances.csv", "--algo", algo,
                 "-o", f"{algo}.json"],
                workdir,
            )
            assert res.returncode == 0, res.stderr
            docs[algo] = json.loads((workdir / f"{algo}.json").read_text())
        base = np.asarray(docs["gpshap"]["means"])
        for algo in ("bayesgpshap", "bayesshap"):
            np.testing.assert_allclose(np.asarray(docs[algo]["means"]), base,
                                       atol=1e-10)
            assert "sigma2" in docs[algo]

    def test_sampled_coalitions_and_bad_count(self, workdir):
        fitted(workdir)
        res = run_cli(
            ["explain", "--posterior", "posterior.json",
             "--instances", "instances.csv", "--coalitions", "6",
             "-o", "sub.json"],
            workdir,
        )
        assert res.returncode == 0, res.stderr
        res = run_cli(
            ["explain", "--posterior", "posterior.json",
             "--instances", "instances.csv", "--coalitions", "lots"],
            workdir,
        )
        assert res.returncode == 2

    def test_feature_count_mismatch_exits_2(self, workdir):
        fitted(workdir)
        (workdir / "wrong.csv").write_text("a,b\n0.0,0.0\n")
        res = run_cli(
            ["explain", "--posterior", "posterior.json", "--instances", "wrong.csv"],
            workdir,
        )
        assert res.returncode == 2

    def test_byte_reproducible_across_thread_counts(self, workdir):
        fitted(workdir)
        outputs = []
        for threads, name in (("1", "r1.json"), ("4", "r2.json")):
            res = run_cli(
                ["explain", "--posterior", "posterior.json",
                 "--instances", "instances.csv", "--algo", "bayesgpshap",
                 "--seed", "3", "-o", name],
                workdir, env_extra={"SSVKIT_THREADS": threads},
            )
            assert res.returncode == 0, res.stderr
            outputs.append((workdir / name).read_bytes())
        assert outputs[0] == outputs[1]


class TestPredictExplain:
    def test_roundtrip_from_explain_json(self, workdir):
        fitted(workdir)
        run_cli(
            ["explain", "--posterior", "posterior.json",
             "--instances", "instances.csv", "-o", "expl.json"],
            workdir,
        )
        res = run_cli(
            ["predict-explain", "--explanations", "expl.json",
             "--instances", "instances.csv", "--noise", "1e-6",
             "-o", "pred.json"],
            workdir,
        )
        assert res.returncode == 0, res.stderr
        pred = json.loads((workdir / "pred.json").read_text())
        src = json.loads((workdir / "expl.json").read_text())
        # predicting at the very same inputs roughly reproduces them (the
        # explanation kernel is low rank here: five anchors for fifteen
        # targets, so only coarse agreement is guaranteed)
        assert np.asarray(pred["means"]).shape == np.asarray(src["means"]).shape
        np.testing.assert_allclose(
            np.asarray(pred["means"]), np.asarray(src["means"]), atol=0.5
        )

    def test_wide_csv_input(self, workdir):
        lines = ["x_1,x_2,phi_1,phi_2"]
        rng = np.random.default_rng(0)
        for _ in range(6):
            x0, x1 = float(rng.normal()), float(rng.normal())
            lines.append(f"{x0!r},{x1!r},{x0 / 2!r},{x1 / 2!r}")
        (workdir / "wide.csv").write_text("\n".join(lines) + "\n")
        (workdir / "new.csv").write_text("x_1,x_2\n0.1,0.2\n")
        res = run_cli(
            ["predict-explain", "--explanations", "wide.csv",
             "--instances", "new.csv", "-o", "pred.json"],
            workdir,
        )
        assert res.returncode == 0, res.stderr
        pred = json.loads((workdir / "pred.json").read_text())
        assert np.asarray(pred["means"]).shape == (1, 2)
        assert np.asarray(pred["cov"]).shape == (1, 2, 2)

    def test_mismatched_columns_exit_2(self, workdir):
        (workdir / "wide.csv").write_text("x_1,phi_1,phi_2\n0.0,0.0,0.0\n")
        (workdir / "new.csv").write_text("x_1\n0.0\n")
        res = run_cli(
            ["predict-explain", "--explanations", "wide.csv",
             "--instances", "new.csv"],
            workdir,
        )
        assert res.returncode == 2


class TestAnalyze:
    def test_writes_all_tables(self, workdir):
        fitted(workdir)
        run_cli(
            ["explain", "--posterior", "posterior.json",
             "--instances", "instances.csv", "-o", "expl.json"],
            workdir,
        )
        res = run_cli(
            ["analyze", "--explanations", "expl.json", "--prefix", "out"],
            workdir,
        )
        assert res.returncode == 0, res.stderr
        glob_lines = (workdir / "out_global.csv").read_text().strip().splitlines()
        assert glob_lines[0] == "feature,mean_abs_ssv,abs_mean_ssv"
        assert len(glob_lines) == 4
        # Jensen inequality holds for every reported feature
        for line in glob_lines[1:]:
            _, mean_abs, abs_mean = line.split(",")
            assert float(mean_abs) >= float(abs_mean) - 1e-12
        corr = json.loads((workdir / "out_correlation.json").read_text())
        C = np.asarray(corr["correlation"])
        np.testing.assert_allclose(np.diag(C), np.ones(3), atol=1e-12)
        graph = (workdir / "out_graph.csv").read_text().strip().splitlines()
        assert graph[0] == "feature_i,feature_j,partial_correlation"
        swarm = (workdir / "out_beeswarm.csv").read_text().strip().splitlines()
        assert len(swarm) == 1 + 5 * 3

    def test_missing_cov_exits_2(self, workdir):
        (workdir / "nocov.json").write_text(json.dumps({"means": [[1.0, 2.0]]}))
        res = run_cli(["analyze", "--explanations", "nocov.json"], workdir)
        assert res.returncode == 2


class TestSelftest:
    def test_passes_and_prints_per_check_lines(self, workdir):
        res = run_cli(["selftest"], workdir)
        assert res.returncode == 0, res.stdout + res.stderr
        lines = [l for l in res.stdout.splitlines() if l.startswith("[")]
        assert len(lines) == 4
        assert all(l.startswith("[PASS]") for l in lines)

    def test_negative_control_fails(self, workdir):
        res = run_cli(["selftest", "--corrupt-projection"], workdir)
        assert res.returncode == 1
        assert "[FAIL] projection-vs-brute-force-oracle" in res.stdout


class TestThreads:
    def test_invalid_thread_count_exits_2(self, workdir):
        res = run_cli(["--threads", "0", "selftest"], workdir)
        assert res.returncode == 2
