import json
import os
import sys
from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import pytest

from app import DEFAULT_CONFIG, main
from src.algos.config import eps_lp_bound
from src.bench.generators import canonical_extended, instance_from_means
from src.cli.config_schema import load_config, validate_config
from src.config.constants import RESOURCES_DIR
from src.model.ground_truth import compute_ground_truth
from src.model.instance import save_instance
from src.utils.errors import ConfigError, InvariantViolation

LP_FILE = os.path.join(RESOURCES_DIR, "canonical_k_lp.json")


def _write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _json_block(text):
    return json.loads(text[text.index("{"):])


def _degenerate_config(tmp_path):
    instance_path = save_instance(instance_from_means([0.5, 0.5], [[0.5, 0.5]], 100, 50), str(tmp_path / "deg.json"))
    return _write_config(
        tmp_path,
        {"instance": {"file": instance_path}, "algorithms": [{"algorithm": "alg2-quantum"}], "t_grid": [100]},
    )


class TestConfigSchema:
    def test_unknown_key_suggests_close_match(self):
        payload = {"instance": {"generator": "canonical", "buget": 10}, "algorithms": [{"algorithm": "alg1-quantum"}]}
        with pytest.raises(ConfigError, match=r"instance\.buget.*did you mean 'budget'"):
            validate_config(payload)

    def test_unknown_algorithm_key(self):
        payload = {"algorithms": [{"algorithm": "alg1-quantum", "eps_lpp": 0.1}]}
        with pytest.raises(ConfigError, match=r"algorithms\[0\]\.eps_lpp"):
            validate_config(payload)

    def test_algorithms_required(self):
        with pytest.raises(ConfigError):
            validate_config({"instance": {"generator": "canonical"}})

    def test_bad_t_grid(self):
        with pytest.raises(ConfigError):
            validate_config({"algorithms": [{"algorithm": "alg1-quantum"}], "t_grid": [1]})

    def test_toml_config(self):
        config = load_config(os.path.join(RESOURCES_DIR, "configs", "extended_alg2.toml"))
        assert config.name == "extended-alg2-growth"
        assert config.to_experiment_spec().labels == ["alg2-quantum", "alg2-quantum-approx", "alg2-classical"]

    def test_approx_entry_is_inside_the_regret_bound(self):
        config = load_config(os.path.join(RESOURCES_DIR, "configs", "extended_alg2.toml"))
        entry = next(e for e in config.algorithms if e.get("label") == "alg2-quantum-approx")
        assert entry["approx_backend"] == "idealized"
        T = min(config.t_grid)
        gt = compute_ground_truth(canonical_extended(T, config.instance["b"] * T))
        assert entry["eps_lp"] <= eps_lp_bound(gt)

    def test_game_config(self):
        config = load_config(os.path.join(RESOURCES_DIR, "configs", "extended_alg2_game.toml"))
        game = next(e for e in config.algorithms if e.get("label") == "alg2-quantum-game")
        assert game["lp_mode"] == "approx"
        assert game["approx_backend"] == "game"
        gt = compute_ground_truth(canonical_extended(max(config.t_grid), 0.5 * max(config.t_grid)))
        assert game["eps_lp"] < gt.delta / 4

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(str(tmp_path / "nope.json"))

    def test_broken_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="could not parse"):
            load_config(str(path))


class TestInspect:
    def test_canonical(self, capsys):
        assert main(["inspect", "--config", DEFAULT_CONFIG]) == 0
        out = capsys.readouterr().out
        assert "OPT_LP = 65" in out
        report = _json_block(out)
        assert report["opt_lp"] == pytest.approx(65.0)
        assert report["delta"] == pytest.approx(0.15)
        assert report["chi"] == pytest.approx(0.375)
        assert report["sigma"] == pytest.approx(0.3347, abs=1e-3)
        assert report["theta"] > 0

    def test_degenerate_suppresses_constants(self, tmp_path, capsys):
        assert main(["inspect", "--config", _degenerate_config(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "nondegenerate = false" in out
        assert "not defined" in out
        assert "theta" not in _json_block(out)

    def test_unknown_key_exits_one(self, tmp_path, capsys):
        path = _write_config(
            tmp_path, {"instance": {"generator": "canonical", "buget": 10}, "algorithms": [{"algorithm": "alg1-quantum"}]}
        )
        assert main(["inspect", "--config", path]) == 1
        assert "instance.buget" in capsys.readouterr().err


class TestSimulate:
    def test_alg1_quantum_smoke(self, tmp_path, capsys):
        out_dir = str(tmp_path / "runs")
        argv = ["simulate", "--config", DEFAULT_CONFIG, "--algo", "alg1-quantum", "--t", "4096", "--seed", "7", "--out", out_dir]
        assert main(argv) == 0
        trace_path = os.path.join(out_dir, "trace-alg1-quantum-7.json")
        with open(trace_path, encoding="utf-8") as f:
            trace = json.load(f)
        assert all(v >= 0 for v in trace["remaining_budget"])
        assert trace["T"] == 4096
        assert "pseudo_regret=" in capsys.readouterr().out

    def test_same_invocation_same_trace(self, tmp_path):
        seed = load_config(DEFAULT_CONFIG).seed
        contents = []
        for name in ("a", "b"):
            out_dir = str(tmp_path / name)
            argv = ["simulate", "--config", DEFAULT_CONFIG, "--algo", "alg1-classical", "--t", "512", "--out", out_dir]
            assert main(argv) == 0
            with open(os.path.join(out_dir, f"trace-alg1-classical-{seed}.json"), "rb") as f:
                contents.append(f.read())
        assert contents[0] == contents[1]

    def test_alg2_on_degenerate_instance(self, tmp_path, capsys):
        path = _degenerate_config(tmp_path)
        assert main(["simulate", "--config", path, "--out", str(tmp_path / "runs")]) == 1
        assert "Assumption 1" in capsys.readouterr().err

    def test_override_flags_reach_the_run(self, tmp_path):
        out_dir = str(tmp_path / "runs")
        argv = ["simulate", "--config", DEFAULT_CONFIG, "--algo", "alg1-quantum", "--t", "256", "--mw-eps", "0.2", "--out", out_dir]
        assert main(argv) == 0
        with open(os.path.join(out_dir, "trace-alg1-quantum-7.json"), encoding="utf-8") as f:
            trace = json.load(f)
        start = next(e for e in trace["events"] if e["kind"] == "phase2-start")
        assert start["mw_eps"] == 0.2


class TestSweepCommand:
    def test_dry_run_writes_nothing(self, tmp_path, capsys):
        out_dir = tmp_path / "never"
        assert main(["sweep", "--config", DEFAULT_CONFIG, "--dry-run", "--out", str(out_dir)]) == 0
        out = capsys.readouterr().out
        assert "8 cells, nothing written" in out
        assert not out_dir.exists()

    def test_small_sweep_creates_output_dir(self, tmp_path, capsys):
        path = _write_config(
            tmp_path,
            {
                "experiment": {"name": "tiny", "seed": 1, "replications": 2},
                "instance": {"generator": "canonical", "T": 100},
                "algorithms": [{"algorithm": "alg1-classical"}],
                "t_grid": [64, 128],
            },
        )
        out_dir = tmp_path / "new" / "dir"
        assert main(["sweep", "--config", path, "--out", str(out_dir)]) == 0
        assert (out_dir / "runs.csv").exists()
        assert len((out_dir / "runs.csv").read_text().strip().splitlines()) == 1 + 4
        assert "n/a" in capsys.readouterr().out


class TestLpCommand:
    def test_exact(self, capsys):
        assert main(["lp", "--file", LP_FILE]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["status"] == "optimal"
        assert payload["value"] == pytest.approx(65.0)

    def test_approx(self, capsys):
        assert main(["lp", "--file", LP_FILE, "--mode", "approx", "--eps", "0.02"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["status"] == "approx"
        assert payload["value"] >= 65.0 - 2.0 - 1e-9
        assert payload["eps_scaled"] == 0.02
        assert payload["dual_bound"] == pytest.approx(3.0)

    def test_zero_eps(self, capsys):
        assert main(["lp", "--file", LP_FILE, "--eps", "0"]) == 1
        assert "eps must be positive" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["lp", "--file", str(tmp_path / "missing.json")]) == 1

    def test_infeasible_is_an_answer(self, tmp_path, capsys):
        path = _write_config(tmp_path, {"objective": [1.0], "A": [[1.0]], "rhs": [-1.0]}, name="lp.json")
        assert main(["lp", "--file", path]) == 0
        assert json.loads(capsys.readouterr().out)["status"] == "infeasible"


class TestExitCodes:
    def test_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["bogus"])
        assert excinfo.value.code == 1

    def test_invariant_violation(self, capsys):
        with patch("src.cli.commands.cmd_lp", side_effect=InvariantViolation("broken tableau")):
            assert main(["lp", "--file", LP_FILE]) == 2
        assert "invariant violation" in capsys.readouterr().err
