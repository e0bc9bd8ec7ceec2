import math
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.algos.config import RunConfig
from src.algos.dispatch import run_algorithm
from src.algos.trace import RunTrace
from src.bench.generators import (
    canonical_extended,
    canonical_instance,
    generate_planted,
    instance_from_means,
    instance_from_source,
    two_point_arm,
)
from src.bench.metrics import (
    build_record,
    consumption_gap,
    fit_loglog_slope,
    identification_correct,
    regret_decomposition,
)
from src.bench.sweep import ExperimentSpec, replication_seed, run_sweep, summarize_runs
from src.config.constants import RUNS_COLUMNS
from src.model.ground_truth import compute_ground_truth
from src.model.instance import save_instance
from src.utils.errors import BwkError, ConfigError, InstanceError
from src.utils.logging import get_system_events


def _synthetic_trace(gt, pulls, consumption, remaining=None):
    if remaining is None:
        remaining = np.full(gt.d, float(gt.B)) - np.asarray(consumption, dtype=float)
    return RunTrace(
        algo="synthetic",
        seed=0,
        T=gt.T,
        B=gt.B,
        m=gt.m,
        d=gt.d,
        pulls=list(pulls),
        expected_consumption=list(consumption),
        remaining_budget=list(remaining),
        total_pseudo_reward=float(np.asarray(pulls) @ gt.r),
    )


class TestRegretDecomposition:
    def test_optimal_play_has_no_suboptimal_term(self):
        gt = compute_ground_truth(canonical_instance())
        pulls = [37, 62]
        trace = _synthetic_trace(gt, pulls, gt.C @ np.array(pulls, dtype=float))
        suboptimal, _ = regret_decomposition(trace, gt)
        assert suboptimal == pytest.approx(0.0, abs=1e-9)

    def test_exhausted_budgets_leave_nothing(self):
        gt = compute_ground_truth(canonical_instance())
        trace = _synthetic_trace(gt, [37.5, 62.5], [50.0, 50.0])
        _, leftover = regret_decomposition(trace, gt)
        assert leftover == pytest.approx(0.0, abs=1e-9)

    def test_leftover_prices_the_realized_remaining_budget(self):
        gt = compute_ground_truth(canonical_instance())
        # expected consumption says 10 units are left on row 1, the run actually left 4
        trace = _synthetic_trace(gt, [30, 50], [40.0, 40.0], remaining=[10.0, 4.0])
        _, leftover = regret_decomposition(trace, gt)
        assert leftover == pytest.approx(10.0 * 0.8 + 4.0 * 0.5)

    def test_bounds_pseudo_regret_with_deterministic_costs(self):
        instance = canonical_instance(T=1000, B=500.0)
        gt = compute_ground_truth(instance)
        trace = run_algorithm(instance, RunConfig("alg1-classical", seed=3))
        suboptimal, leftover = regret_decomposition(trace, gt)
        pseudo_regret = gt.opt_lp - trace.total_pseudo_reward
        assert consumption_gap(trace, gt) == pytest.approx(0.0, abs=1e-9)
        assert pseudo_regret <= suboptimal + leftover + 1e-6 * gt.opt_lp

    def test_bounds_pseudo_regret_with_deterministic_costs_two_phase(self):
        instance = canonical_extended(T=1000, B=500.0)
        gt = compute_ground_truth(instance)
        trace = run_algorithm(instance, RunConfig("alg2-classical", seed=1, exact_bounds=True))
        suboptimal, leftover = regret_decomposition(trace, gt)
        pseudo_regret = gt.opt_lp - trace.total_pseudo_reward
        assert pseudo_regret <= suboptimal + leftover + 1e-6 * gt.opt_lp

    def test_stochastic_costs_differ_by_consumption_gap(self):
        instance = generate_planted(m=3, d_user=1, b=0.25, margin=0.05, seed=1, T=2048)
        gt = compute_ground_truth(instance)
        trace = run_algorithm(instance, RunConfig("alg1-classical", seed=3))
        suboptimal, leftover = regret_decomposition(trace, gt)
        pseudo_regret = gt.opt_lp - trace.total_pseudo_reward
        assert leftover == pytest.approx(float(np.asarray(trace.remaining_budget) @ gt.eta_star))
        assert pseudo_regret - (suboptimal + leftover) == pytest.approx(
            consumption_gap(trace, gt), abs=1e-6 * gt.opt_lp
        )

    def test_optimal_arms_are_not_charged(self):
        instance = canonical_extended()
        gt = compute_ground_truth(instance)
        trace = _synthetic_trace(gt, [20, 40, 0], gt.C @ np.array([20.0, 40.0, 0.0]))
        suboptimal, _ = regret_decomposition(trace, gt)
        assert suboptimal == 0.0

    def test_suboptimal_arm_reduced_cost(self):
        instance = instance_from_means([0.9, 0.5, 0.1], [[1.0, 0.2, 1.0]], 100, 50)
        gt = compute_ground_truth(instance)
        trace = _synthetic_trace(gt, [0, 0, 10], gt.C[:, 2] * 10)
        suboptimal, _ = regret_decomposition(trace, gt)
        assert suboptimal == pytest.approx(10 * (0.5 * 0.8 + 1.0 * 0.5 - 0.1))


class TestRecords:
    def test_record_columns(self):
        instance = canonical_instance(T=300, B=150.0)
        gt = compute_ground_truth(instance)
        record = build_record(run_algorithm(instance, RunConfig("alg1-quantum")), gt, replication=2)
        assert list(record) == RUNS_COLUMNS
        assert record["status"] == "ok"
        assert record["replication"] == 2
        assert record["identification_correct"] == ""

    def test_record_names_exhausted_rows(self):
        instance = instance_from_means([0.6], [[1.0]], 200, 100.0, deterministic=True)
        gt = compute_ground_truth(instance)
        record = build_record(run_algorithm(instance, RunConfig("alg1-classical")), gt, replication=0)
        assert record["exhausted_rows"] == "1"
        assert record["tau"] == 100

    def test_identification_correct(self):
        gt = compute_ground_truth(canonical_instance())
        trace = _synthetic_trace(gt, [0, 0], [0.0, 0.0])
        assert identification_correct(trace, gt) is None
        trace.identified_arms, trace.identified_rows = [1, 0], []
        assert identification_correct(trace, gt) is True
        trace.identified_rows = [1]
        assert identification_correct(trace, gt) is False


class TestSlopeFit:
    def test_power_law(self):
        horizons = [2**k for k in range(10, 15)]
        assert fit_loglog_slope(horizons, [math.sqrt(t) for t in horizons]) == pytest.approx(0.5, abs=1e-9)

    def test_constant(self):
        assert fit_loglog_slope([10, 100, 1000], [3.0, 3.0, 3.0]) == pytest.approx(0.0, abs=1e-9)

    def test_logarithmic_growth_is_flat(self):
        horizons = [2**k for k in range(12, 17)]
        assert fit_loglog_slope(horizons, [math.log(t) for t in horizons]) < 0.15

    def test_nonpositive_values_are_dropped(self):
        with pytest.raises(BwkError):
            fit_loglog_slope([10, 100, 1000], [1.0, 0.0, -2.0])

    def test_needs_three_points(self):
        with pytest.raises(BwkError):
            fit_loglog_slope([10, 100], [1.0, 2.0])


class TestGenerators:
    @settings(max_examples=50, deadline=None)
    @given(
        reward=st.floats(min_value=0.0, max_value=1.0),
        costs=st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=3),
    )
    def test_two_point_arm_keeps_means(self, reward, costs):
        arm = two_point_arm(reward, costs)
        assert arm.mean_reward == pytest.approx(reward, abs=1e-12)
        assert np.allclose(arm.mean_cost, costs, atol=1e-12)

    def test_planted_instance(self):
        instance = generate_planted(m=3, d_user=1, b=0.5, margin=0.05, seed=0)
        gt = compute_ground_truth(instance)
        assert gt.nondegenerate
        assert gt.delta >= 0.05 - 1e-12

    def test_planted_is_deterministic(self):
        first = generate_planted(m=4, d_user=1, b=0.25, margin=0.05, seed=3)
        second = generate_planted(m=4, d_user=1, b=0.25, margin=0.05, seed=3)
        assert first == second

    def test_planted_rejects_bad_parameters(self):
        with pytest.raises(InstanceError):
            generate_planted(m=3, d_user=1, b=0.5, margin=0.0, seed=0)
        with pytest.raises(InstanceError):
            generate_planted(m=1, d_user=0, b=0.5, margin=0.05, seed=0)
        with pytest.raises(InstanceError):
            generate_planted(m=2, d_user=2, b=0.5, margin=0.05, seed=0)

    def test_source_with_budget_override(self):
        instance = instance_from_source({"generator": "canonical", "T": 200, "budget": 40})
        assert instance.T == 200 and instance.B == 40.0

    def test_source_from_file(self, tmp_path):
        path = save_instance(canonical_instance(), str(tmp_path / "k.json"))
        instance = instance_from_source({"file": path})
        assert np.allclose(instance.mean_rewards, [0.9, 0.5])
        assert get_system_events("INSTANCE_LOADED")

    def test_unknown_generator(self):
        with pytest.raises(InstanceError):
            instance_from_source({"generator": "adversarial"})


class TestSweep:
    def _spec(self, tmp_path, **overrides):
        params = dict(
            name="unit",
            instance={"generator": "canonical", "T": 100},
            t_grid=[64, 128],
            algorithms=[{"algorithm": "alg1-classical"}],
            replications=3,
            seed=7,
            output_dir=str(tmp_path / "out"),
        )
        params.update(overrides)
        return ExperimentSpec(**params)

    def test_rows_and_files(self, tmp_path):
        result = run_sweep(self._spec(tmp_path))
        assert len(result.runs) == 6
        assert list(result.runs.columns) == RUNS_COLUMNS
        assert list(zip(result.runs["T"], result.runs["replication"])) == [(64, 0), (64, 1), (64, 2), (128, 0), (128, 1), (128, 2)]
        assert os.path.exists(result.runs_path) and os.path.exists(result.summary_path)
        assert get_system_events("SWEEP_COMPLETE")

    def test_rerun_is_byte_identical(self, tmp_path):
        first = run_sweep(self._spec(tmp_path, output_dir=str(tmp_path / "a")))
        second = run_sweep(self._spec(tmp_path, output_dir=str(tmp_path / "b")), threads=3)
        for left, right in ((first.runs_path, second.runs_path), (first.summary_path, second.summary_path)):
            with open(left, "rb") as f, open(right, "rb") as g:
                assert f.read() == g.read()

    def test_failed_cells_keep_the_sweep_going(self, tmp_path):
        degenerate = save_instance(instance_from_means([0.5, 0.5], [[0.5, 0.5]], 100, 50), str(tmp_path / "deg.json"))
        spec = self._spec(
            tmp_path,
            instance={"file": degenerate},
            algorithms=[{"algorithm": "alg1-classical"}, {"algorithm": "alg2-quantum"}],
            replications=1,
        )
        result = run_sweep(spec)
        statuses = dict(zip(result.runs["algo"] + "@" + result.runs["T"].astype(str), result.runs["status"]))
        assert statuses["alg1-classical@64"] == "ok"
        assert statuses["alg2-quantum@64"].startswith("failed: DegenerateInstanceError")
        assert get_system_events("SWEEP_RUN_FAILED")

    def test_labels_name_rows(self, tmp_path):
        spec = self._spec(
            tmp_path,
            algorithms=[{"algorithm": "alg1-quantum", "label": "q"}, {"algorithm": "alg1-classical"}],
            replications=1,
            t_grid=[64],
        )
        result = run_sweep(spec, write=False)
        assert result.runs["algo"].tolist() == ["alg1-classical", "q"]
        assert result.runs_path == ""

    def test_spec_validation(self, tmp_path):
        with pytest.raises(ConfigError):
            self._spec(tmp_path, t_grid=[])
        with pytest.raises(ConfigError):
            self._spec(tmp_path, replications=0)

    def test_replication_seeds(self):
        assert replication_seed(7, 0) == replication_seed(7, 0)
        assert replication_seed(7, 0) != replication_seed(7, 1)


class TestSummary:
    def test_mean_and_standard_error(self):
        runs = pd.DataFrame(
            {
                "algo": ["a", "a", "a", "b"],
                "T": [10, 10, 10, 10],
                "status": ["ok", "ok", "failed: boom", "ok"],
                "pseudo_regret": [1.0, 3.0, "", 5.0],
                "realized_regret": [2.0, 2.0, "", 1.0],
                "tau": [10, 8, "", 9],
                "phase1_rounds": [2, 2, "", 2],
                "qmc_query_total": [0, 0, "", 4],
            }
        )
        summary = summarize_runs(runs)
        row = summary[summary["algo"] == "a"].iloc[0]
        assert row["runs"] == 2
        assert row["pseudo_regret_mean"] == pytest.approx(2.0)
        assert row["pseudo_regret_se"] == pytest.approx(math.sqrt(2.0) / math.sqrt(2.0))
        assert summary[summary["algo"] == "b"].iloc[0]["pseudo_regret_se"] == 0.0
