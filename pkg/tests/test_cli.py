import json
import subprocess
import sys
from pathlib import Path

import pytest

from netbandit.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, **changes):
    data = json.loads((CONFIGS / "uniform_baseline.json").read_text())
    data.update(changes)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


class TestEnumerateSpace:
    def test_sizes_and_arms(self, capsys):
        assert main(["enumerate-space", "--config", str(CONFIGS / "needle_ucb_tsn.json")]) == 0
        out = json.loads(capsys.readouterr().out)
        assert (out["U_C"], out["U_O"], out["U_E"]) == (4, 16, 4)
        assert out["arms"][1] == [0, 0, 1, 1]

    def test_fraction_labels(self, capsys):
        assert main(["enumerate-space", "--config", str(CONFIGS / "cluster_switchback.json")]) == 0
        out = json.loads(capsys.readouterr().out)
        assert ["0", "0", "0", "1/3", "1/3", "1/3"] == [str(x) for x in out["arms"][1]]


class TestOracle:
    def test_report(self, capsys):
        assert main(["oracle", "--config", str(CONFIGS / "adversarial_exp3_tsn.json")]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["best_arm_index"] == 1
        assert out["ate_matrix"][1][0] == pytest.approx(0.2, abs=1e-12)
        assert out["method"]["kind"] == "exact"

    def test_horizon_override(self, capsys):
        main(["oracle", "--config", str(CONFIGS / "needle_ucb_tsn.json"), "--T", "100"])
        small = json.loads(capsys.readouterr().out)
        main(["oracle", "--config", str(CONFIGS / "needle_ucb_tsn.json")])
        large = json.loads(capsys.readouterr().out)
        assert max(small["arm_means"]) > max(large["arm_means"])


class TestValidate:
    def test_ok(self, capsys):
        assert main(["validate", "--config", str(CONFIGS / "threshold_network.json")]) == 0
        assert capsys.readouterr().out.strip() == "ok"

    def test_error_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path, policy={"name": "ucb_tsn", "T": 100, "T1": 1})
        assert main(["validate", "--config", str(path)]) == 2
        assert "error" in capsys.readouterr().err

    def test_warning_only(self, tmp_path, capsys):
        data = json.loads((CONFIGS / "adversarial_exp3_tsn.json").read_text())
        data["policy"]["T"] = 10
        path = tmp_path / "adv.json"
        path.write_text(json.dumps(data))
        assert main(["validate", "--config", str(path)]) == 0
        assert "warning" in capsys.readouterr().err

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["validate", "--config", str(path)]) == 2


class TestRun:
    def test_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", "--config", str(CONFIGS / "uniform_baseline.json"), "--out", str(out), "--reps", "4", "--traces"]) == 0
        names = {p.name for p in out.iterdir()}
        assert {"results.csv", "aggregate.json", "replications.jsonl", "trace_0.jsonl", "trace_3.jsonl"} <= names
        assert len((out / "results.csv").read_text().splitlines()) == 5
        assert "regret=" in capsys.readouterr().out

    def test_invalid_config_exit_code(self, tmp_path):
        path = write_config(tmp_path, policy={"name": "exp3_tsn", "T": 100})
        assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
        assert not (tmp_path / "o").exists()

    def test_seed_override_and_workers(self, tmp_path):
        args = ["run", "--config", str(CONFIGS / "needle_ucb_tsn.json"), "--reps", "6"]
        main(args + ["--out", str(tmp_path / "a"), "--workers", "1"])
        main(args + ["--out", str(tmp_path / "b"), "--workers", "3"])
        main(args + ["--out", str(tmp_path / "c"), "--seed", "1"])
        a, b, c = ((tmp_path / d / "results.csv").read_bytes() for d in "abc")
        assert a == b and a != c

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "netbandit", "enumerate-space", "--config", str(CONFIGS / "uniform_baseline.json")],
            capture_output=True, text=True, check=True,
        )
        assert json.loads(proc.stdout)["U_E"] == 2
