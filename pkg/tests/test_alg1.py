import json
import math
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.algos.alg1 import (
    bang_per_buck_arm,
    batch_size,
    mw_epsilon,
    mw_update,
    run_alg1_classical,
    run_alg1_quantum,
)
from src.algos.config import RunConfig, alg1_qmc_bound
from src.algos.dispatch import run_algorithm
from src.algos.trace import STOP_BUDGET
from src.bench.generators import canonical_instance, instance_from_means
from src.utils.errors import ConfigError


def _dominant_instance(T=200):
    # arm 0 has the higher reward and the lower cost
    return instance_from_means([0.9, 0.3], [[0.2, 0.8]], T, T / 2)


class TestHelpers:
    def test_batch_size(self):
        assert batch_size(100, 1.0, 1.0) == math.ceil(2 * math.log(100))
        assert batch_size(100, 1.0, 0.5) == math.ceil(4 * math.log(100))

    def test_mw_epsilon(self):
        instance = canonical_instance()
        assert mw_epsilon(instance, RunConfig("alg1-quantum")) == pytest.approx(math.sqrt(math.log(2) / 50))
        assert mw_epsilon(instance, RunConfig("alg1-quantum", mw_eps_override=0.3)) == 0.3

    def test_bang_per_buck_prefers_zero_cost(self):
        c_lower = np.array([[0.5, 0.0], [0.5, 0.0]])
        assert bang_per_buck_arm(np.array([0.9, 0.1]), c_lower, np.ones(2)) == 1

    def test_bang_per_buck_clamps_negative_costs(self):
        c_lower = np.array([[0.5, 0.5], [-0.3, 0.2]])
        # arm 0: 0.8 / 0.5, arm 1: 0.5 / 0.7
        assert bang_per_buck_arm(np.array([0.8, 0.5]), c_lower, np.ones(2)) == 0

    def test_bang_per_buck_ties_to_lowest_index(self):
        c_lower = np.array([[0.5, 0.5]])
        assert bang_per_buck_arm(np.array([0.5, 0.5]), c_lower, np.ones(1)) == 0

    @settings(max_examples=50, deadline=None)
    @given(
        costs=st.lists(st.floats(min_value=-1.0, max_value=2.0), min_size=3, max_size=3),
        eps=st.floats(min_value=0.001, max_value=0.5),
    )
    def test_mw_update_is_monotone_and_bounded(self, costs, eps):
        v = np.array([1.0, 2.0, 0.5])
        updated = mw_update(v, np.array(costs), eps)
        assert np.all(updated >= v)
        assert np.all(updated <= v * (1.0 + eps) + 1e-12)


class TestAlg1Quantum:
    def test_qmc_executions_within_bound(self):
        instance = canonical_instance(T=4096, B=2048.0)
        trace = run_alg1_quantum(instance, RunConfig("alg1-quantum", seed=7))
        assert 0 < trace.qmc_calls <= alg1_qmc_bound(instance.m, instance.T, 1.0)

    def test_queries_match_batches(self):
        instance = canonical_instance(T=1024, B=512.0)
        trace = run_alg1_quantum(instance, RunConfig("alg1-quantum", seed=3))
        events = trace.events_of("qmc")
        assert sum(e["queries"] for e in events) == trace.qmc_queries
        first = next(e for e in events if e["arm"] == 0)
        assert first["queries"] == batch_size(1024, 1.0, 1.0)
        assert trace.phase1_rounds == 2 * batch_size(1024, 1.0, 1.0)

    def test_budget_never_negative(self):
        trace = run_alg1_quantum(canonical_instance(T=2048, B=1024.0), RunConfig("alg1-quantum", seed=1))
        assert trace.tau <= 2048
        assert all(v >= 0 for v in trace.remaining_budget)
        assert all(min(r["remaining"]) >= -1e-12 for r in trace.rounds)
        assert trace.stop_reason in ("horizon", "budget")

    def test_deterministic(self):
        instance = canonical_instance(T=1024, B=512.0)
        cfg = RunConfig("alg1-quantum", seed=11)
        first = json.dumps(run_alg1_quantum(instance, cfg).to_dict(), sort_keys=True)
        second = json.dumps(run_alg1_quantum(instance, cfg).to_dict(), sort_keys=True)
        assert first == second

    def test_dominant_arm_in_primal_dual_phase(self):
        trace = run_alg1_quantum(_dominant_instance(), RunConfig("alg1-quantum", exact_bounds=True))
        assert all(r["arm"] == 0 for r in trace.rounds if r["t"] > trace.phase1_rounds)

    def test_budget_runs_out_during_init(self):
        instance = instance_from_means([0.9, 0.5], [[1.0, 0.2]], 100, 2.0)
        trace = run_alg1_quantum(instance, RunConfig("alg1-quantum"))
        assert trace.events_of("init-incomplete")
        assert trace.stop_reason == STOP_BUDGET
        assert trace.tau == 2

    def test_ae_backend(self):
        trace = run_alg1_quantum(canonical_instance(T=512, B=256.0), RunConfig("alg1-quantum", estimator_backend="ae-analytic"))
        assert trace.qmc_calls >= 2
        assert len(trace.final_weights) == 2

    def test_classical_backend_is_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig("alg1-quantum", estimator_backend="classical")


class TestAlg1Classical:
    def test_one_init_pull_per_arm(self):
        trace = run_alg1_classical(canonical_instance(T=500, B=250.0), RunConfig("alg1-classical", seed=2))
        assert trace.phase1_rounds == 2
        assert [r["arm"] for r in trace.rounds[:2]] == [0, 1]
        assert trace.qmc_calls == 0 and trace.qmc_queries == 0

    def test_dominant_arm(self):
        trace = run_alg1_classical(_dominant_instance(), RunConfig("alg1-classical", exact_bounds=True))
        assert trace.pulls[1] == 1
        assert trace.pulls[0] == trace.tau - 1

    def test_deterministic_arm_matches_quantum_after_init(self):
        instance = instance_from_means([0.6], [[1.0]], 200, 100.0)
        quantum = run_alg1_quantum(instance, RunConfig("alg1-quantum"))
        classical = run_alg1_classical(instance, RunConfig("alg1-classical"))
        assert {r["arm"] for r in quantum.rounds} == {r["arm"] for r in classical.rounds} == {0}
        assert quantum.tau == classical.tau == 100

    def test_user_resource_stop_is_recorded(self):
        instance = instance_from_means([0.6], [[1.0]], 200, 100.0, deterministic=True)
        trace = run_alg1_classical(instance, RunConfig("alg1-classical"))
        assert trace.stop_reason == STOP_BUDGET
        assert trace.tau == 100
        assert trace.exhausted_rows == [1]
        assert trace.remaining_budget[0] == pytest.approx(50.0)

    def test_weights_follow_lower_cost_rule(self):
        instance = instance_from_means([0.6], [[1.0]], 200, 100.0, deterministic=True)
        cfg = RunConfig("alg1-classical", exact_bounds=True, mw_eps_override=0.01)
        trace = run_alg1_classical(instance, cfg)
        updates = trace.tau - trace.phase1_rounds
        assert trace.final_weights == pytest.approx([1.01 ** (0.5 * updates), 1.01**updates], rel=1e-9)

    def test_dispatch(self):
        instance = canonical_instance(T=300, B=150.0)
        trace = run_algorithm(instance, RunConfig("alg1-classical", seed=4))
        assert trace.algo == "alg1-classical"
        assert sum(trace.pulls) == trace.tau
