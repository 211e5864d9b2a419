import numpy as np
import pytest

from adflsim.scheduler import (RoundPlan, choose_active_set, drift_plus_penalty,
                               estimate_round_cost, update_queue, update_staleness)
from oracles import brute_force_activation


# ---- staleness ledger ----

def test_staleness_reset_on_activation():
    out = update_staleness(np.array([3]), np.array([1]))
    assert out[0] == 0


def test_staleness_ages_when_idle():
    assert update_staleness(np.array([3]), np.array([0]))[0] == 4
    assert update_staleness(np.array([0]), np.array([0]))[0] == 1


def test_staleness_vectorized():
    out = update_staleness(np.array([5, 0, 2]), np.array([0, 1, 1]))
    assert np.array_equal(out, [6, 0, 0])


# ---- virtual queue ----

def test_queue_clamped_at_zero():
    assert update_queue(np.array([0.0]), np.array([1]), 5)[0] == 0.0


def test_queue_worked_example():
    assert update_queue(np.array([2.0]), np.array([8]), 5)[0] == pytest.approx(5.0, abs=1e-12)


def test_queue_boundary_case():
    assert update_queue(np.array([0.0]), np.array([5]), 5)[0] == 0.0


def test_queue_never_negative():
    rng = np.random.default_rng(0)
    q = np.zeros(20)
    for _ in range(200):
        tau = rng.integers(0, 10, 20)
        q = update_queue(q, tau, 4)
        assert (q >= 0).all()


# ---- drift plus penalty ----

def test_penalty_only_when_queues_empty():
    q = np.zeros(3)
    tau = np.array([1, 2, 3])
    assert drift_plus_penalty(q, tau, 5, 10.0, 2.5) == pytest.approx(25.0, abs=1e-12)


def test_drift_plus_penalty_worked_example():
    out = drift_plus_penalty(np.array([1.0, 1.0]), np.array([6, 2]), 5, 10.0, 1.0)
    assert out == pytest.approx(8.0, abs=1e-12)


def test_doubling_weight_doubles_only_the_penalty():
    q = np.array([1.0, 2.0])
    tau = np.array([7, 3])
    drift = float(q @ (tau - 4))
    a = drift_plus_penalty(q, tau, 4, 10.0, 1.5)
    b = drift_plus_penalty(q, tau, 4, 20.0, 1.5)
    assert b - a == pytest.approx(15.0, abs=1e-12)
    assert a - drift == pytest.approx(15.0, abs=1e-12)


# ---- round cost estimate ----

def test_cost_fresh_worker_pays_full_training():
    assert estimate_round_cost(2.0, 0.0, [0.3, 1.0]) == pytest.approx(3.0, abs=1e-12)


def test_cost_long_idle_leaves_transfer_only():
    assert estimate_round_cost(2.0, 5.0, [0.7]) == pytest.approx(0.7, abs=1e-12)


def test_cost_isolated_worker_is_compute_only():
    assert estimate_round_cost(2.0, 0.5, []) == pytest.approx(1.5, abs=1e-12)


# ---- greedy activation ----

def test_single_worker_plan():
    plan = choose_active_set(np.array([2.0]), np.array([1.5]), np.array([4]), 5, 10.0)
    assert plan.active_ids == [0]
    assert plan.objective == pytest.approx(1.5 * (4 - 5) + 10.0 * 2.0, abs=1e-12)


def test_huge_penalty_selects_fastest_singleton():
    costs = np.array([3.0, 1.0, 2.0])
    queue = np.array([5.0, 0.0, 9.0])
    stale = np.array([7, 0, 9])
    plan = choose_active_set(costs, queue, stale, 2, 1e12)
    assert plan.active_ids == [1]


def test_ties_break_toward_smaller_prefix():
    # zero queues make every prefix's drift identical; equal costs tie the
    # penalty, so the first (smallest) prefix must win
    plan = choose_active_set(np.array([1.0, 1.0, 1.0]), np.zeros(3),
                             np.zeros(3, dtype=int), 3, 5.0)
    assert plan.active_ids == [0]


def test_equal_costs_sort_by_worker_id():
    # make every worker's queue push it into the active set
    plan = choose_active_set(np.array([1.0, 1.0]), np.array([100.0, 100.0]),
                             np.array([3, 3]), 0, 0.001)
    assert plan.active_ids == [0, 1]


def test_backlogged_worker_forces_larger_prefix():
    costs = np.array([1.0, 4.0])
    queue = np.array([0.0, 50.0])
    stale = np.array([0, 6])
    plan = choose_active_set(costs, queue, stale, 2, 1.0)
    # excluding worker 1 costs 50 extra in drift, far above 3s of penalty
    assert plan.active_ids == [0, 1]


def test_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(1)
    for _ in range(300):
        n = int(rng.integers(1, 13))
        costs = np.round(rng.uniform(0.1, 5.0, n), 3)
        queue = np.round(rng.uniform(0.0, 10.0, n), 3)
        stale = rng.integers(0, 12, n)
        bound = int(rng.integers(0, 8))
        weight = float(rng.uniform(0.1, 30.0))
        plan = choose_active_set(costs, queue, stale, bound, weight)
        best_s, best_prefix = brute_force_activation(costs, queue, stale, bound, weight)
        assert plan.objective == pytest.approx(best_s, rel=1e-12, abs=1e-12)
        assert set(plan.active_ids) == best_prefix


def test_plan_flags_and_duration_consistent():
    costs = np.array([2.0, 0.5, 1.0])
    plan = choose_active_set(costs, np.array([3.0, 0.0, 4.0]),
                             np.array([5, 0, 2]), 1, 2.0)
    assert isinstance(plan, RoundPlan)
    assert plan.flags.sum() == len(plan.active_ids)
    assert all(plan.flags[i] == 1 for i in plan.active_ids)
    assert plan.round_duration == pytest.approx(max(costs[plan.flags == 1]), abs=1e-12)
    assert len(plan.active_ids) >= 1
