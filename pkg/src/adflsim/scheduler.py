"""Staleness ledger, virtual queues and greedy worker activation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RoundPlan:
    """Activation decision for one round."""

    active_ids: list[int]
    flags: np.ndarray
    costs: np.ndarray
    objective: float

    @property
    def round_duration(self) -> float:
        return float(self.costs[self.flags == 1].max())


def update_staleness(staleness: np.ndarray, flags: np.ndarray) -> np.ndarray:
    """Advance the ledger: activation resets to zero, everyone else ages by one."""
    return ((staleness + 1) * (1 - flags)).astype(staleness.dtype)


def update_queue(queue: np.ndarray, staleness: np.ndarray, staleness_bound: float) -> np.ndarray:
    """Accumulate staleness excess over the bound; backlog never goes negative."""
    return np.maximum(queue + staleness - staleness_bound, 0.0)


def drift_plus_penalty(queue: np.ndarray, staleness: np.ndarray, staleness_bound: float,
                       penalty_weight: float, round_duration: float) -> float:
    """Backlog-weighted staleness excess plus the weighted round duration."""
    return float(queue @ (staleness - staleness_bound) + penalty_weight * round_duration)


def estimate_round_cost(training_time: float, elapsed_since_start: float,
                        transfer_times) -> float:
    """Residual compute plus the slowest candidate transfer, in seconds.

    Idle rounds since the worker last started training are credited against
    its training time; the residual never goes negative. With no reachable
    neighbor the cost is compute only.
    """
    transfer_times = np.asarray(transfer_times, dtype=float)
    residual = max(training_time - elapsed_since_start, 0.0)
    slowest = float(transfer_times.max()) if transfer_times.size else 0.0
    return residual + slowest


def choose_active_set(costs: np.ndarray, queue: np.ndarray, staleness: np.ndarray,
                      staleness_bound: float, penalty_weight: float) -> RoundPlan:
    """Pick the prefix of the cost-sorted worker list that minimizes the
    drift-plus-penalty objective.

    Prefixes of length 1..N are scored with the round duration set to the
    largest cost in the prefix. The candidate ledger ages workers outside
    the prefix by one round, while prefix members keep the staleness they
    carry into this round (their reset lands next round). Ties go to the
    smaller prefix; the cost sort breaks ties by worker id.
    """
    n = costs.shape[0]
    if n < 1:
        raise ValueError("need at least one worker")
    order = np.lexsort((np.arange(n), costs))
    candidate = staleness.astype(float) + 1.0
    best_objective = np.inf
    best_k = 1
    for k in range(1, n + 1):
        wid = order[k - 1]
        candidate[wid] = staleness[wid]
        objective = drift_plus_penalty(queue, candidate, staleness_bound,
                                       penalty_weight, costs[order[k - 1]])
        if objective < best_objective:
            best_objective = objective
            best_k = k
    chosen = np.sort(order[:best_k])
    flags = np.zeros(n, dtype=np.int64)
    flags[chosen] = 1
    return RoundPlan(active_ids=[int(i) for i in chosen], flags=flags,
                     costs=np.asarray(costs, dtype=float), objective=float(best_objective))
