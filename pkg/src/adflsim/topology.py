"""Per-round directed topology construction under bandwidth budgets."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


@dataclass
class TopologySnapshot:
    """Directed neighbor sets for one round plus bandwidth accounting.

    ``edges`` lists realized (puller, source) pairs, excluding self loops.
    Every worker's in/out neighbor set contains the worker itself; self
    loops carry no bandwidth. ``bandwidth`` is bits consumed per worker,
    counting both its pulls and the pushes requested from it.
    """

    in_neighbors: list[list[int]]
    out_neighbors: list[list[int]]
    edges: list[tuple[int, int]]
    bandwidth: np.ndarray


def early_phase_priority(emd_ij: float, emd_max: float,
                         dist_ij: float, dist_max: float) -> float:
    """Favor dissimilar data and physical proximity; range [0, 2].

    Degenerate normalizations (all-zero distances or identical data
    everywhere) drop the affected term without changing the ranking.
    """
    emd_term = emd_ij / emd_max if emd_max > 0 else 0.0
    dist_term = 1.0 - dist_ij / dist_max if dist_max > 0 else 1.0
    return emd_term + dist_term


def late_phase_priority(pull_count: int, t: int, stale_i: int, stale_j: int) -> float:
    """Favor rarely pulled sources with similar staleness; range [0, 1]."""
    return (1.0 - pull_count / t) / (1.0 + abs(stale_i - stale_j))


def early_phase_priority_matrix(emd: np.ndarray, dist: np.ndarray) -> np.ndarray:
    """Priority of every ordered pair under the early-phase rule."""
    emd_max = float(emd.max())
    dist_max = float(dist.max())
    emd_term = emd / emd_max if emd_max > 0 else np.zeros_like(emd)
    dist_term = 1.0 - dist / dist_max if dist_max > 0 else np.ones_like(dist)
    return emd_term + dist_term


def late_phase_priority_matrix(pulls: np.ndarray, t: int, staleness: np.ndarray) -> np.ndarray:
    """Priority of every ordered pair under the late-phase rule."""
    gap = np.abs(staleness[:, None] - staleness[None, :])
    return (1.0 - pulls / t) / (1.0 + gap)


def build_topology(active_ids, in_range: np.ndarray, budgets: np.ndarray,
                   model_cost_bits: float, priorities: np.ndarray,
                   in_degree_cap: int | None = None) -> TopologySnapshot:
    """Greedy round-robin neighbor selection under per-worker budgets.

    Each activated worker keeps a candidate list of in-range peers sorted by
    descending priority (ties to the lower id) and claims at most one source
    per sweep; a claim debits the model cost from both endpoints. Sources
    without budget are dropped from the list. Sweeping stops once a full
    pass adds no bandwidth. ``in_degree_cap`` bounds pulls per activated
    worker on top of the budgets.
    """
    n = in_range.shape[0]
    budgets = np.asarray(budgets, dtype=float)
    bandwidth = np.zeros(n)
    in_nbrs: list[set[int]] = [{i} for i in range(n)]
    out_nbrs: list[set[int]] = [{i} for i in range(n)]
    edges: list[tuple[int, int]] = []

    candidates: dict[int, list[int]] = {}
    for i in active_ids:
        peers = np.flatnonzero(in_range[i])
        order = np.lexsort((peers, -priorities[i, peers]))
        candidates[i] = list(peers[order])

    while True:
        consumed_before = bandwidth.sum()
        for i in active_ids:
            if in_degree_cap is not None and len(in_nbrs[i]) - 1 >= in_degree_cap:
                continue
            if bandwidth[i] + model_cost_bits > budgets[i]:
                continue
            queue = candidates[i]
            while queue:
                j = queue[0]
                if bandwidth[j] + model_cost_bits > budgets[j]:
                    queue.pop(0)
                    continue
                queue.pop(0)
                edges.append((i, j))
                in_nbrs[i].add(j)
                out_nbrs[j].add(i)
                bandwidth[i] += model_cost_bits
                bandwidth[j] += model_cost_bits
                break
        if bandwidth.sum() == consumed_before:
            break

    return TopologySnapshot(
        in_neighbors=[sorted(s) for s in in_nbrs],
        out_neighbors=[sorted(s) for s in out_nbrs],
        edges=edges,
        bandwidth=bandwidth,
    )


def record_pulls(snapshot: TopologySnapshot, pulls: np.ndarray) -> np.ndarray:
    """Count one pull per realized edge; returns the updated matrix."""
    for i, j in snapshot.edges:
        if i != j:
            pulls[i, j] += 1
    return pulls


def edges_to_csv(per_round_edges: list[tuple[int, list[tuple[int, int]]]]) -> str:
    """Render (round, puller, source) rows for topology evolution analysis."""
    out = io.StringIO()
    out.write("round,puller,source\n")
    for t, edges in per_round_edges:
        for i, j in edges:
            out.write(f"{t},{i},{j}\n")
    return out.getvalue()
