import io
import json

import numpy as np

from diffmeans.cli import main
from diffmeans.measures import WeightMeasure
from diffmeans.models import get_model
from diffmeans.simulate import observe, simulate_path


def run_cli(args):
    return main(args)


class TestSimulateCommand:
    def test_means_only_header_and_rows(self, tmp_path):
        out = tmp_path / "obs.csv"
        code = run_cli(["simulate", "--model", "multiplicative_bm", "--theta", "1.0",
                        "--n", "8", "--m", "8", "--seed", "3", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "j,xbar"
        assert len(lines) == 9
        meta = json.loads((tmp_path / "obs.csv.meta.json").read_text())
        assert meta["seed"] == 3 and meta["model"] == "multiplicative_bm"

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["simulate", "--theta", "1.2", "--n", "16", "--m", "8", "--seed", "11"]
        assert run_cli(argv + ["--out", str(a)]) == 0
        assert run_cli(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_dirac_rows_match_interpolated_path(self, tmp_path):
        out = tmp_path / "obs.csv"
        code = run_cli(["simulate", "--model", "multiplicative_bm", "--theta", "1.0",
                        "--n", "4", "--m", "8", "--seed", "5",
                        "--measure", "dirac:0.5", "--out", str(out)])
        assert code == 0
        rows = out.read_text().strip().splitlines()[1:]
        got = np.array([float(r.split(",")[1]) for r in rows])
        path = simulate_path(get_model("multiplicative_bm"), 1.0, 0.0, 4, 8, 5)
        expect = observe(path, WeightMeasure.dirac(0.5))
        np.testing.assert_allclose(got, expect, rtol=1e-15)

    def test_unknown_model_exits_2(self, tmp_path):
        code = run_cli(["simulate", "--model", "levy_flight", "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_measure_as_dict_in_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"measure": {"kind": "atomic", "atoms": [[0.5, 1.0]]},
                                   "n": 8, "m": 8}))
        out = tmp_path / "obs.csv"
        assert run_cli(["simulate", "--config", str(cfg), "--seed", "4", "--out", str(out)]) == 0
        meta = json.loads((tmp_path / "obs.csv.meta.json").read_text())
        assert meta["measure"]["kind"] == "atomic"

    def test_malformed_measure_exits_2(self, tmp_path):
        assert run_cli(["simulate", "--measure", "42", "--out", str(tmp_path / "x.csv")]) == 2

    def test_path_dump(self, tmp_path):
        out = tmp_path / "obs.csv"
        dump = tmp_path / "path.csv"
        code = run_cli(["simulate", "--n", "4", "--m", "4", "--seed", "1",
                        "--out", str(out), "--dump-path", str(dump)])
        assert code == 0
        lines = dump.read_text().strip().splitlines()
        assert lines[0] == "t,X,dW"
        assert len(lines) == 18  # 16 steps + terminal row + header
        assert lines[1].startswith("0.0,0.0,")
        assert lines[-1].endswith(",")

    def test_augmented_includes_anchor_columns(self, tmp_path):
        out = tmp_path / "aug.csv"
        code = run_cli(["simulate", "--n", "12", "--m", "8", "--seed", "2",
                        "--augmented", "--k", "fixed:5", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "j,xbar,l,anchor"
        assert len(lines) == 14  # 12 means + terminal row
        assert lines[-1].split(",")[1] == ""


class TestEstimateCommand:
    def _simulate(self, tmp_path, augmented=False, theta="1.5", n="1024"):
        out = tmp_path / ("aug.csv" if augmented else "obs.csv")
        argv = ["simulate", "--model", "multiplicative_bm", "--theta", theta,
                "--n", n, "--m", "16", "--seed", "21", "--out", str(out)]
        if augmented:
            argv += ["--augmented", "--k", "fixed:10"]
        assert run_cli(argv) == 0
        return out

    def test_pipeline_means_only(self, tmp_path):
        obs = self._simulate(tmp_path)
        out = tmp_path / "est.json"
        code = run_cli(["estimate", "--in", str(obs), "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert 1.3 <= payload["theta_hat"] <= 1.7
        assert payload["config"]["mode"] == "means_only"
        assert not payload["boundary_hit"]

    def test_pipeline_augmented(self, tmp_path):
        aug = self._simulate(tmp_path, augmented=True)
        out = tmp_path / "est.json"
        code = run_cli(["estimate", "--in", str(aug), "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert 1.3 <= payload["theta_hat"] <= 1.7
        assert payload["config"]["mode"] == "augmented"
        assert payload["config"]["k"] == 10

    def test_stdin_piping(self, tmp_path, monkeypatch):
        obs = self._simulate(tmp_path, n="256")
        monkeypatch.setattr("sys.stdin", io.StringIO(obs.read_text()))
        out = tmp_path / "est.json"
        assert run_cli(["estimate", "--out", str(out)]) == 0
        assert 1.0 <= json.loads(out.read_text())["theta_hat"] <= 2.0

    def test_malformed_csv_exits_2_without_output(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("j,xbar\n0,1.0\n2,oops\n")
        out = tmp_path / "est.json"
        code = run_cli(["estimate", "--in", str(bad), "--out", str(out)])
        assert code == 2
        assert not out.exists()

    def test_wrong_header_exits_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("time,value\n0,1.0\n")
        assert run_cli(["estimate", "--in", str(bad), "--out", str(tmp_path / "e.json")]) == 2

    def test_boundary_data_still_exits_zero(self, tmp_path):
        # True parameter at the upper edge of the interval: the fit may hit
        # the boundary but the command succeeds.
        obs = self._simulate(tmp_path, theta="3.0", n="256")
        out = tmp_path / "est.json"
        assert run_cli(["estimate", "--in", str(obs), "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert isinstance(payload["boundary_hit"], bool)
        assert 2.0 <= payload["theta_hat"] <= 3.0


class TestVerifyCommand:
    def test_chi2_passes_and_writes_reports(self, tmp_path):
        out = tmp_path / "report"
        code = run_cli(["verify", "--experiment", "chi2", "--M", "20000",
                        "--seed", "7", "--workers", "1", "--out", str(out)])
        assert code == 0
        csv_text = (tmp_path / "report.csv").read_text()
        assert csv_text.startswith("experiment,n,k,M,stat,value,stderr,target,tol,pass")
        data = json.loads((tmp_path / "report.json").read_text())
        assert data["all_pass"] is True
        assert data["seed"] == 7

    def test_unknown_experiment_exits_2(self, tmp_path):
        assert run_cli(["verify", "--experiment", "warp", "--out", str(tmp_path / "r")]) == 2

    def test_failing_tolerance_exits_1(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"tolerances": {"delta_mean": [50.0, 0.1]}}))
        code = run_cli(["verify", "--experiment", "chi2", "--M", "5000", "--seed", "7",
                        "--config", str(cfg), "--workers", "1",
                        "--out", str(tmp_path / "r")])
        assert code == 1

    def test_flags_override_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"M": 64000, "seed": 3}))
        code = run_cli(["verify", "--experiment", "chi2", "--M", "20000",
                        "--config", str(cfg), "--workers", "1",
                        "--out", str(tmp_path / "r")])
        assert code == 0
        data = json.loads((tmp_path / "r.json").read_text())
        assert data["config"]["runs"][0]["replications"] == 20000
        assert data["config"]["runs"][0]["seed"] == 3

    def test_worker_flag_does_not_change_csv(self, tmp_path):
        # Small replication counts may fail statistical rows (exit 1); the
        # contract under test is that the bytes do not depend on --workers.
        argv = ["verify", "--experiment", "coupling", "--model", "sine_scale",
                "--n", "64", "--n", "128", "--k", "fixed:4", "--M", "60", "--seed", "9"]
        assert run_cli(argv + ["--workers", "1", "--out", str(tmp_path / "w1")]) in (0, 1)
        assert run_cli(argv + ["--workers", "3", "--out", str(tmp_path / "w3")]) in (0, 1)
        assert (tmp_path / "w1.csv").read_bytes() == (tmp_path / "w3.csv").read_bytes()

    def test_expansion_sine_reports_without_oracle(self, tmp_path):
        code = run_cli(["verify", "--experiment", "expansion", "--model", "sine_scale",
                        "--n", "128", "--M", "60", "--seed", "7", "--workers", "1",
                        "--out", str(tmp_path / "r")])
        assert code in (0, 1)
        csv_text = (tmp_path / "r.csv").read_text()
        assert "mean_log_lr" not in csv_text
        assert "mean_score_stat" in csv_text
