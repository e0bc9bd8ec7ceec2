import os
import sys

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, PROJECT_ROOT)

import numpy as np
import pytest

from src.bench.generators import canonical_extended, canonical_instance, generate_planted, instance_from_means
from src.model.ground_truth import classify, compute_ground_truth
from src.model.instance import (
    ArmDistribution,
    RawInstance,
    augment_time_resource,
    instance_from_dict,
    load_instance,
    sample_arm,
    save_instance,
)
from src.utils.errors import InstanceError


def _raw(T, B, atoms_per_arm):
    return RawInstance(T=T, B=B, arms=tuple(ArmDistribution.from_atoms(atoms) for atoms in atoms_per_arm))


class TestAugmentTimeResource:
    def test_reward_only_arm_gets_time_row(self):
        instance = augment_time_resource(_raw(100, 10.0, [[(1.0, 0.4, ())]]))
        assert instance.d == 1
        assert instance.arms[0].costs == ((0.1,),)

    def test_time_row_is_constant_b(self):
        instance = canonical_instance()
        assert instance.d == 2
        assert np.allclose(instance.mean_costs[0], [0.5, 0.5])
        for arm in instance.arms:
            assert all(c[0] == 0.5 for c in arm.costs)

    def test_budget_above_horizon(self):
        with pytest.raises(InstanceError, match="budget exceeds horizon"):
            augment_time_resource(_raw(100, 200.0, [[(1.0, 0.4, ())]]))

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(InstanceError):
            ArmDistribution.from_atoms([(0.5, 0.1, (0.2,)), (0.4, 0.3, (0.2,))])

    def test_atoms_outside_unit_interval(self):
        with pytest.raises(InstanceError, match="outside"):
            ArmDistribution.from_atoms([(1.0, 1.5, (0.2,))])

    def test_with_horizon_keeps_b(self):
        instance = canonical_instance().with_horizon(1000)
        assert instance.T == 1000
        assert instance.B == pytest.approx(500.0)
        assert np.allclose(instance.mean_rewards, [0.9, 0.5])


class TestSampleArm:
    def test_single_atom_is_deterministic(self):
        instance = augment_time_resource(_raw(100, 50.0, [[(1.0, 0.7, (0.5,))]]))
        rng = np.random.default_rng(0)
        for _ in range(20):
            reward, cost = sample_arm(instance, 0, rng)
            assert reward == 0.7
            assert np.allclose(cost, [0.5, 0.5])

    def test_two_atom_mean(self):
        instance = augment_time_resource(_raw(100, 50.0, [[(0.5, 0.0, (0.0,)), (0.5, 1.0, (1.0,))]]))
        rng = np.random.default_rng(12345)
        rewards = [sample_arm(instance, 0, rng)[0] for _ in range(100_000)]
        assert abs(np.mean(rewards) - 0.5) < 0.01

    def test_reward_and_cost_come_from_same_atom(self):
        instance = augment_time_resource(_raw(100, 50.0, [[(0.5, 0.0, (0.0,)), (0.5, 1.0, (1.0,))]]))
        rng = np.random.default_rng(3)
        for _ in range(200):
            reward, cost = sample_arm(instance, 0, rng)
            assert reward == cost[1]

    def test_two_atom_cost_mean(self):
        instance = instance_from_means([0.9, 0.5], [[0.7, 0.3]], 100, 50)
        rng = np.random.default_rng(2024)
        costs = np.array([sample_arm(instance, 0, rng)[1] for _ in range(100_000)])
        assert np.all(np.abs(costs.mean(axis=0) - instance.mean_costs[:, 0]) < 0.01)

    def test_canonical_arms_are_single_atoms(self):
        instance = canonical_instance()
        assert all(len(arm.probs) == 1 for arm in instance.arms)
        reward, cost = sample_arm(instance, 1, np.random.default_rng(0))
        assert reward == 0.5
        assert np.allclose(cost, [0.5, 0.2])

    def test_bad_index(self):
        instance = canonical_instance()
        with pytest.raises(InstanceError):
            sample_arm(instance, instance.m, np.random.default_rng(0))


class TestInstanceFiles:
    def test_save_and_load(self, tmp_path):
        instance = canonical_extended()
        path = save_instance(instance, str(tmp_path / "k_ext.json"))
        loaded = load_instance(path)
        assert loaded.T == instance.T and loaded.B == instance.B
        assert np.allclose(loaded.mean_costs, instance.mean_costs)

    def test_canonical_resource_file(self):
        loaded = load_instance(os.path.join(PROJECT_ROOT, "resources", "canonical_k.json"))
        assert all(len(arm.probs) == 1 for arm in loaded.arms)
        assert np.allclose(loaded.mean_rewards, canonical_instance().mean_rewards)
        assert np.allclose(loaded.mean_costs, canonical_instance().mean_costs)

    def test_unknown_key(self):
        with pytest.raises(InstanceError, match="unknown instance keys"):
            instance_from_dict({"m": 1, "d_user": 0, "T": 10, "B": 5, "arms": [], "budget": 3})

    def test_arm_count_mismatch(self):
        payload = {"m": 2, "d_user": 0, "T": 10, "B": 5, "arms": [{"atoms": [{"p": 1.0, "reward": 0.5, "cost": []}]}]}
        with pytest.raises(InstanceError, match="m=2"):
            instance_from_dict(payload)


class TestGroundTruth:
    def test_canonical(self):
        gt = compute_ground_truth(canonical_instance())
        assert gt.opt_lp == pytest.approx(65.0, abs=1e-9)
        assert np.allclose(gt.xi_star, [37.5, 62.5])
        assert np.allclose(gt.eta_star, [0.8, 0.5])
        assert np.allclose(gt.opt_i, [50.0, 45.0])
        assert gt.I_star == (0, 1)
        assert gt.J_star == (0, 1)
        assert gt.J_prime == ()
        assert gt.delta == pytest.approx(0.15)
        assert gt.chi == pytest.approx(0.375)
        assert gt.sigma == pytest.approx(0.3347, abs=1e-3)
        assert gt.unique
        assert gt.nondegenerate

    def test_reduced_costs_vanish_on_optimal_arms(self):
        gt = compute_ground_truth(canonical_instance())
        assert np.allclose(gt.reduced_costs(), 0.0, atol=1e-9)

    def test_extended_instance(self):
        gt = compute_ground_truth(canonical_extended())
        assert gt.I_star == (0, 1)
        assert gt.I_prime == (2,)
        assert gt.J_prime == (2,)
        assert gt.opt_j[2] == pytest.approx(25.0)
        assert gt.delta == pytest.approx(0.15)
        assert gt.nondegenerate
        # arm 2 uses (0.5, 1.0) at reward 0.1
        assert gt.reduced_costs()[2] == pytest.approx(0.5 * 0.8 + 1.0 * 0.5 - 0.1)

    @pytest.mark.parametrize("m, d_user, seed", [(3, 1, 0), (4, 1, 1), (4, 1, 3), (4, 2, 2)])
    def test_removal_values_match_index_sets(self, m, d_user, seed):
        gt = compute_ground_truth(generate_planted(m=m, d_user=d_user, b=0.25, margin=0.05, seed=seed))
        assert gt.nondegenerate
        tol = 1e-9 * max(1.0, gt.opt_lp)
        for i in range(gt.m):
            assert (gt.opt_i[i] < gt.opt_lp - tol) == (i in gt.I_star)
        for j in range(gt.d):
            assert (gt.opt_j[j] < gt.opt_lp - tol) == (j in gt.J_prime)

    def test_identical_arms_are_degenerate(self):
        gt = compute_ground_truth(instance_from_means([0.5, 0.5], [[0.5, 0.5]], 100, 50))
        assert not gt.unique
        assert not gt.nondegenerate

    def test_zero_reward_is_degenerate(self):
        gt = compute_ground_truth(instance_from_means([0.0], [[0.5]], 100, 50))
        assert gt.opt_lp == pytest.approx(0.0)
        assert gt.delta is None
        assert not gt.nondegenerate

    def test_to_dict_is_plain(self):
        payload = compute_ground_truth(canonical_instance()).to_dict()
        assert payload["I_star"] == [0, 1]
        assert payload["nondegenerate"] is True


class TestClassify:
    def test_zero_solution_has_no_binding_rows(self):
        I_star, I_prime, J_star, J_prime = classify([0.0, 0.0], [[0.5, 0.5], [1.0, 0.2]], 50.0)
        assert I_star == () and J_star == ()
        assert I_prime == (0, 1) and J_prime == (0, 1)

    def test_zero_coordinate_goes_to_I_prime(self):
        I_star, I_prime, _, _ = classify([0.0, 100.0], [[0.5, 0.5], [1.0, 0.2]], 50.0)
        assert I_star == (1,)
        assert I_prime == (0,)
