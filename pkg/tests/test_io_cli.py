import json
import os
import subprocess
import sys

import numpy as np
import pytest

import pressure_consensus as pc
from pressure_consensus.cli import main
from pressure_consensus.io import ScenarioConfig, csv_header, fmt, load_config, read_trajectory_csv


def k2_config(kind="ExpSqrt", params=None, steps=10_000, **extra):
    cfg = {
        "system": {"adjacency": [[0, 1], [1, 0]], "stubbornness": [1, 1], "preferred": [0.1, 0.5]},
        "schedule": {"kind": kind, "params": params if params is not None else {"base": 2}},
        "steps": steps,
    }
    cfg.update(extra)
    return cfg


@pytest.fixture
def write_cfg(tmp_path):
    def _write(cfg, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(cfg), encoding="utf-8")
        return path
    return _write


class TestConfig:
    def test_round_trip(self):
        cfg = ScenarioConfig.from_dict(k2_config(x0=[0.2, 0.2], tolerance=1e-4))
        again = ScenarioConfig.from_dict(cfg.to_dict())
        assert again == cfg
        assert again.to_dict() == cfg.to_dict()

    def test_defaults(self):
        cfg = ScenarioConfig.from_dict(k2_config())
        assert cfg.x0 is None and cfg.tolerance == 1e-3

    @pytest.mark.parametrize(
        "mutate, err",
        [
            (lambda c: c.update(colour="red"), pc.ConfigError),
            (lambda c: c["system"].update(weights=[1]), pc.ConfigError),
            (lambda c: c["schedule"].update(offset=1), pc.ConfigError),
            (lambda c: c.pop("steps"), pc.ConfigError),
            (lambda c: c.update(steps=0), pc.ConfigError),
            (lambda c: c.update(steps=2.5), pc.ConfigError),
            (lambda c: c.update(tolerance=-1), pc.ConfigError),
            (lambda c: c["system"].update(stubbornness=[1, -1]), pc.NonpositiveStubbornness),
            (lambda c: c["system"].update(preferred=["a", 1]), pc.ConfigError),
            (lambda c: c.update(x0=[0.1]), pc.DimensionMismatch),
            (lambda c: c["schedule"].update(kind="Cubic"), pc.InvalidSchedule),
        ],
    )
    def test_rejects(self, mutate, err):
        cfg = k2_config()
        mutate(cfg)
        with pytest.raises(err):
            ScenarioConfig.from_dict(cfg)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(pc.ConfigError):
            load_config(path)


def test_fmt_round_trips():
    rng = np.random.default_rng(1)
    for v in np.concatenate([rng.normal(size=200), [0.1, 1 / 3, 2.0**100, 5e-324]]):
        assert float(fmt(v)) == v


class TestSimulateCommand:
    def test_counterexample_config(self, write_cfg, tmp_path):
        out = tmp_path / "traj.csv"
        assert main(["--quiet", "simulate", "--config", str(write_cfg(k2_config())), "--out", str(out)]) == 0
        cols = read_trajectory_csv(out)
        ref = pc.run_counterexample(10_000)
        assert cols["k"][-1] == 10_000
        assert cols["dist_to_limit"][-1] > 0
        assert cols["dist_to_limit"][-1] == ref.trajectory.dist_to_limit[-1]
        np.testing.assert_array_equal(cols["x_0"], ref.trajectory.states[:, 0])
        np.testing.assert_array_equal(cols["partial_product"][1:], ref.report.partial_products)

    def test_header_and_lines(self, write_cfg, tmp_path):
        out = tmp_path / "one.csv"
        assert main(["--quiet", "simulate", "--config", str(write_cfg(k2_config(steps=1))), "--out", str(out)]) == 0
        raw = out.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode("utf-8").splitlines()
        assert len(lines) == 3
        assert lines[0] == ",".join(csv_header(2))
        assert lines[0] == "k,rho,x_0,x_1,alpha,partial_product,dist_to_fixed_point,dist_to_limit"
        assert lines[1].startswith("0,,")
        assert lines[2].startswith("1,2,")

    def test_bad_stubbornness_exit_2(self, write_cfg, tmp_path, capsys):
        cfg = k2_config()
        cfg["system"]["stubbornness"] = [1, -1]
        status = main(["simulate", "--config", str(write_cfg(cfg)), "--out", str(tmp_path / "x.csv")])
        assert status == 2
        err = capsys.readouterr().err.strip().splitlines()[-1]
        assert err.startswith("error code=NonpositiveStubbornness message=")

    def test_overflow_exit_3(self, write_cfg, tmp_path, capsys):
        cfg = k2_config(params={"base": 1e10}, steps=1000)
        status = main(["simulate", "--config", str(write_cfg(cfg)), "--out", str(tmp_path / "x.csv")])
        assert status == 3
        assert "code=ScheduleOverflow" in capsys.readouterr().err

    def test_env_cap(self, write_cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("PRESSURE_CONSENSUS_MAX_RHO", "1e6")
        status = main(["--quiet", "simulate", "--config", str(write_cfg(k2_config(steps=500))),
                       "--out", str(tmp_path / "x.csv")])
        assert status == 3

    def test_missing_config_exit_4(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x.csv")]) == 4


class TestAnalyzeCommand:
    def run(self, write_cfg, tmp_path, cfg, *extra):
        out = tmp_path / "report.json"
        assert main(["--quiet", "analyze", "--config", str(write_cfg(cfg)), "--out", str(out), *extra]) == 0
        return json.loads(out.read_text(encoding="utf-8"))

    def test_exp_sqrt(self, write_cfg, tmp_path):
        rep = self.run(write_cfg, tmp_path, k2_config(steps=50), "--steps", "10000")
        assert rep["classification"] == "PositiveLimitSuspected"
        assert abs(rep["partial_product_final"] - 0.0310128) <= 1e-4
        assert rep["steps"] == 10_000
        assert set(rep) >= {"alphas_summary", "partial_product_final", "log_sum", "classification",
                            "tail_estimate"}

    def test_linear(self, write_cfg, tmp_path):
        rep = self.run(write_cfg, tmp_path, k2_config("Linear", {"slope": 1}))
        assert rep["partial_product_final"] == pytest.approx(1 / 10_001, rel=1e-12)

    def test_constant(self, write_cfg, tmp_path):
        rep = self.run(write_cfg, tmp_path, k2_config("Constant", {"value": 1}))
        assert rep["alphas_summary"]["min"] == pytest.approx(0.5, rel=1e-14)
        assert rep["alphas_summary"]["max"] == pytest.approx(0.5, rel=1e-14)
        assert rep["classification"] == "VanishesNumerically"

    def test_irregular_graph_needs_inf_norm(self, write_cfg, tmp_path, capsys):
        star = np.zeros((5, 5))
        star[0, 1:] = star[1:, 0] = 1
        cfg = {"system": {"adjacency": star.tolist(), "stubbornness": [1] * 5,
                          "preferred": [0, 0.25, 0.5, 0.75, 1]},
               "schedule": {"kind": "Constant", "params": {"value": 10}}, "steps": 20}
        path = write_cfg(cfg)
        assert main(["analyze", "--config", str(path), "--out", str(tmp_path / "r.json")]) == 2
        assert "code=AlphaOutOfRange" in capsys.readouterr().err
        rep = self.run(write_cfg, tmp_path, cfg, "--norm", "inf")
        assert rep["norm"] == "inf"


class TestCounterexampleCommand:
    def test_outputs(self, tmp_path):
        out = tmp_path / "run"
        assert main(["--quiet", "counterexample", "--out-dir", str(out)]) == 0
        assert {p.name for p in out.iterdir()} == {"counterexample.csv", "convergent.csv", "summary.json"}
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert abs(summary["counterexample"]["partial_product_final"] - 0.0310128) <= 1e-4
        assert abs(summary["euler_phi_0.1"] - 0.89001) <= 1e-5
        assert summary["counterexample"]["converged"] is False
        assert summary["convergent"]["converged"] is True

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["--quiet", "counterexample", "--out-dir", str(a), "--steps", "2000"]) == 0
        assert main(["--quiet", "counterexample", "--out-dir", str(b), "--steps", "2000"]) == 0
        for name in ("counterexample.csv", "convergent.csv", "summary.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    @pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
    def test_unwritable_exit_4(self, tmp_path):
        locked = tmp_path / "locked"
        locked.mkdir()
        locked.chmod(0o500)
        try:
            assert main(["--quiet", "counterexample", "--out-dir", str(locked / "sub")]) == 4
        finally:
            locked.chmod(0o700)

    def test_out_dir_is_a_file_exit_4(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        assert main(["--quiet", "counterexample", "--out-dir", str(blocker)]) == 4


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "pressure_consensus", "--quiet", "counterexample",
         "--out-dir", str(tmp_path), "--steps", "200"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "summary.json").exists()
