import json
import math
import subprocess
import sys

import pytest

from covert_photon import cli
from covert_photon.config import ConfigError, RunConfig


def cfg_file(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


class TestConfig:
    def test_defaults(self):
        cfg = RunConfig.load(None)
        assert cfg.channel.eta == 0.1 and cfg.budget.n == 1e14

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"channel": {"eta": 0.1, "colour": 3}})

    def test_grid(self):
        cfg = RunConfig.from_dict({"budget": {"n_grid": {"start": 1e2, "stop": 1e4, "per_decade": 2}}})
        assert cfg.budget.grid() == [100, 316, 1000, 3162, 10000]


class TestBounds:
    def test_report(self, tmp_path, capsys):
        assert cli.main(["bounds", "--config", cfg_file(tmp_path, {})]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["schema"] == "covert-photon/bounds/v1"
        assert doc["bits_exact"] == pytest.approx(199.442, abs=1e-3)
        # the budget is set with the Taylor bound, so the exact Pinsker value sits just above 1/2 - eps
        assert 0.4 <= doc["willie_error_lb"] < 0.4001
        assert {"c_c_paper", "c_c_exact"} <= set(doc)

    def test_zero_epsilon(self, tmp_path, capsys):
        assert cli.main(["bounds", "--config", cfg_file(tmp_path, {"budget": {"epsilon": 0.0}})]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["nbar"] == 0.0
        assert doc["bits_exact"] == pytest.approx(math.log2(0.1))

    def test_pure_loss_rejected(self, tmp_path, capsys):
        assert cli.main(["bounds", "--config", cfg_file(tmp_path, {"channel": {"n_b": 0.0}})]) == 3
        err = capsys.readouterr().err
        assert "pure-loss" in err

    def test_schema_violation(self, tmp_path, capsys):
        assert cli.main(["bounds", "--config", cfg_file(tmp_path, {"chanel": {}})]) == 2

    def test_missing_config(self, tmp_path):
        assert cli.main(["bounds", "--config", str(tmp_path / "nope.json")]) == 2

    def test_darkcount_field(self, tmp_path, capsys):
        cli.main(["bounds", "--config", cfg_file(tmp_path, {"channel": {"p_d": 1e-7}, "budget": {"n": 1e10}})])
        doc = json.loads(capsys.readouterr().out)
        assert doc["darkcount_nbar"] == pytest.approx(1.405456808125455e-9, rel=1e-12)


class TestSweep:
    def test_layout(self, tmp_path):
        out = tmp_path / "s.csv"
        assert cli.main(["sweep", "--config", cfg_file(tmp_path, {}), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "# covert-photon v1"
        assert lines[1] == "n,epsilon,delta,eta,n_b,nbar,bits_exact,c_d,c_c_paper,c_c_exact"
        keys = [tuple(float(x) for x in (r.split(",")[1], r.split(",")[2], r.split(",")[0])) for r in lines[2:]]
        assert keys == sorted(keys)
        assert len(keys) == 4 * 25

    def test_empty_grid(self, tmp_path):
        doc = {"budget": {"n_values": []}}
        assert cli.main(["sweep", "--config", cfg_file(tmp_path, doc)]) == 2

    def test_workers(self, tmp_path, capsys):
        cfg = cfg_file(tmp_path, {"budget": {"n_grid": {"start": 1e10, "stop": 1e12, "per_decade": 2}}})
        cli.main(["sweep", "--config", cfg])
        one = capsys.readouterr().out
        cli.main(["sweep", "--config", cfg, "--workers", "3"])
        assert capsys.readouterr().out == one


class TestSimulate:
    SMALL = {"sim": {"trials": 500, "scenarios": [
        {"kind": "willie_lrt", "n": 256, "eta": 0.5, "n_b": 1.0, "epsilon": 0.1},
        {"kind": "willie_lrt", "n": 256, "eta": 0.5, "n_b": 1.0, "nbar": 0.0, "label": "null"},
    ]}}

    def test_rows_and_summary(self, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        assert cli.main(["simulate", "--config", cfg_file(tmp_path, self.SMALL), "--seed", "3", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "scenario,n,trials,estimate,ci_low,ci_high,analytic_bound,pass"
        assert [ln.split(",")[0] for ln in lines[2:]] == ["willie_lrt", "null"]
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["seed"] == 3 and summary["all_pass"]
        null = summary["scenarios"][1]
        assert null["ci"][0] <= 0.5 <= null["ci"][1]

    def test_too_few_trials(self, tmp_path):
        assert cli.main(["simulate", "--config", cfg_file(tmp_path, self.SMALL), "--trials", "50"]) == 2

    def test_violation_exit(self, tmp_path, monkeypatch):
        from covert_photon import experiments
        monkeypatch.setattr(experiments, "respects", lambda est, bound, side: False)
        assert cli.main(["simulate", "--config", cfg_file(tmp_path, self.SMALL), "--seed", "1"]) == 4

    def test_seed_precedence(self, tmp_path, monkeypatch, capsys):
        cfg = cfg_file(tmp_path, self.SMALL)
        monkeypatch.setenv("COVERT_PHOTON_SEED", "11")
        cli.main(["simulate", "--config", cfg])
        from_env = capsys.readouterr().out
        cli.main(["simulate", "--config", cfg, "--seed", "11"])
        assert capsys.readouterr().out == from_env
        cli.main(["simulate", "--config", cfg, "--seed", "12"])
        assert capsys.readouterr().out != from_env

    def test_bad_env_seed(self, tmp_path, monkeypatch):
        monkeypatch.setenv("COVERT_PHOTON_SEED", "abc")
        assert cli.main(["simulate", "--config", cfg_file(tmp_path, self.SMALL)]) == 2


class TestVerify:
    def test_passes(self, capsys):
        assert cli.main(["verify"]) == 0
        table = capsys.readouterr().out
        assert "qre_closed_vs_truncated_rel" in table and "FAIL" not in table

    def test_corrupted_tolerance(self, capsys):
        assert cli.main(["verify", "--tolerance-scale", "-1"]) == 4
        assert "FAIL" in capsys.readouterr().out


class TestPlot:
    def test_series(self, tmp_path):
        csv_path = tmp_path / "s.csv"
        cli.main(["sweep", "--config", cfg_file(tmp_path, {}), "--out", str(csv_path)])
        svg = tmp_path / "s.svg"
        assert cli.main(["plot", str(csv_path), "--out", str(svg)]) == 0
        text = svg.read_text()
        assert text.count('id="series-') == 4
        first = svg.read_bytes()
        cli.main(["plot", str(csv_path), "--out", str(svg)])
        assert svg.read_bytes() == first

    def test_empty_csv(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("# covert-photon v1\nn,epsilon,delta,eta,n_b,nbar,bits_exact,c_d,c_c_paper,c_c_exact\n")
        assert cli.main(["plot", str(p)]) == 2

    def test_malformed_csv(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("n,epsilon,delta,bits_exact\n1,x,0.1,2\n")
        assert cli.main(["plot", str(p)]) == 2


def test_entry_point():
    r = subprocess.run([sys.executable, "-m", "covert_photon.cli", "bounds"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["schema"] == "covert-photon/bounds/v1"
    assert r.stderr == ""
