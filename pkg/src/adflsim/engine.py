"""Round-driven simulation of staleness-controlled decentralized training.

One coordinator round: activate a subset of workers, build the directed
pull topology, let activated workers aggregate possibly stale neighbor
models and take a local step, then advance the simulated clock by the
slowest activated worker. Two baselines share the same environment: a
synchronous gossip scheme (everyone, every round, straggler bound) and a
push-to-all scheme (same activation, broadcast instead of selective pulls).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import data as data_mod
from . import learners, scheduler, topology, world as world_mod
from .config import ExperimentConfig

TAG_PLACE, TAG_POWER, TAG_COMPUTE, TAG_PARTITION = 1, 2, 3, 4
TAG_DATA, TAG_OBJECTIVE, TAG_GRAD, TAG_BUDGET = 5, 6, 8, 9

METRICS_SCHEMA = "v1"
METRICS_HEADER = (
    "round", "n_active", "active_ids", "n_edges", "edges",
    "round_duration_s", "cum_time_s", "active_costs_s",
    "round_bandwidth_bits", "cum_bandwidth_bits",
    "global_loss", "stop_metric", "mean_accuracy",
    "mean_staleness", "max_staleness", "queue_total",
)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class WorkerState:
    """One worker: served model snapshot plus its static attributes."""

    wid: int
    model: np.ndarray
    objective: object
    data_size: int
    training_time: float


@dataclass
class RoundRecord:
    t: int
    active_ids: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    round_duration: float
    cum_time: float
    active_costs: tuple[float, ...]
    round_bandwidth: float
    cum_bandwidth: float
    global_loss: float
    stop_metric: float
    mean_accuracy: float
    mean_staleness: float
    max_staleness: int
    queue_total: float


@dataclass
class EventLog:
    """Ordered per-round records enabling replay, export and summaries."""

    policy: str
    seed: int
    records: list[RoundRecord] = field(default_factory=list)
    reached_epsilon: bool = False
    aborted: bool = False
    abort_round: int | None = None
    abort_reason: str | None = None
    config: dict = field(default_factory=dict)

    @property
    def rounds_run(self) -> int:
        return len(self.records)

    @property
    def completion_time(self) -> float:
        return self.records[-1].cum_time if self.records else 0.0

    @property
    def total_bandwidth(self) -> float:
        return self.records[-1].cum_bandwidth if self.records else 0.0

    def to_csv(self) -> str:
        lines = [",".join(METRICS_HEADER)]
        for r in self.records:
            lines.append(",".join([
                str(r.t),
                str(len(r.active_ids)),
                ";".join(str(i) for i in r.active_ids),
                str(len(r.edges)),
                ";".join(f"{i}-{j}" for i, j in r.edges),
                _fmt(r.round_duration),
                _fmt(r.cum_time),
                ";".join(_fmt(c) for c in r.active_costs),
                _fmt(r.round_bandwidth),
                _fmt(r.cum_bandwidth),
                _fmt(r.global_loss),
                _fmt(r.stop_metric),
                _fmt(r.mean_accuracy),
                _fmt(r.mean_staleness),
                str(r.max_staleness),
                _fmt(r.queue_total),
            ]))
        return "\n".join(lines) + "\n"

    def edges_csv(self) -> str:
        return topology.edges_to_csv([(r.t, list(r.edges)) for r in self.records])

    def summary(self) -> dict:
        final = self.records[-1] if self.records else None
        mean_stale = (sum(r.mean_staleness for r in self.records) / len(self.records)
                      if self.records else 0.0)
        mean_queue = (sum(r.queue_total for r in self.records) / len(self.records)
                      if self.records else 0.0)
        return {
            "metrics_schema": METRICS_SCHEMA,
            "policy": self.policy,
            "seed": self.seed,
            "rounds_run": self.rounds_run,
            "reached_epsilon": self.reached_epsilon,
            "completion_time_s": self.completion_time,
            "total_bandwidth_bits": self.total_bandwidth,
            "final_loss": final.global_loss if final else None,
            "final_stop_metric": final.stop_metric if final else None,
            "final_accuracy": final.mean_accuracy if final else None,
            "mean_staleness": mean_stale,
            "max_staleness": max((r.max_staleness for r in self.records), default=0),
            "mean_queue_total": mean_queue,
            "aborted": self.aborted,
            "abort_round": self.abort_round,
            "abort_reason": self.abort_reason,
            "config": self.config,
        }


class Simulation:
    """Deterministic single-run simulator; all randomness is seed-derived."""

    def __init__(self, cfg: ExperimentConfig, world: world_mod.World | None = None):
        cfg.validate()
        self.cfg = cfg
        n = cfg.n_workers
        seed = cfg.seed

        positions = _stream(seed, TAG_PLACE).uniform(0.0, cfg.region_size, (n, 2))
        if cfg.comm_radius == "auto":
            radius = world_mod.min_connected_radius(positions) if n > 1 else 1.0
        else:
            radius = float(cfg.comm_radius)

        power_rng = _stream(seed, TAG_POWER)
        dbm = power_rng.uniform(cfg.tx_power_min_dbm, cfg.tx_power_max_dbm, n)
        watts = 10.0 ** (dbm / 10.0) / 1000.0
        fluct = np.maximum(1.0 + cfg.tx_fluctuation_sigma * power_rng.standard_normal(n), 0.01)
        tx_powers = watts * fluct

        channel = world_mod.ChannelModel(
            path_loss_constant_db=cfg.g0_db,
            noise_power=cfg.noise_watts,
            channel_bandwidth=cfg.channel_bandwidth_hz,
            path_loss_exponent=cfg.path_loss_exponent,
        )
        self.world = world or world_mod.World(
            positions, tx_powers, channel, cfg.model_cost_bits, radius, seed)

        per_batch = _stream(seed, TAG_COMPUTE).uniform(
            cfg.per_batch_time, cfg.per_batch_time * cfg.compute_spread, n)

        global_counts = np.full(cfg.n_classes, cfg.samples_per_class, dtype=np.int64)
        if cfg.iid_exact:
            self.histograms = data_mod.iid_exact_partition(global_counts, n)
        else:
            self.histograms = data_mod.dirichlet_partition(
                global_counts, n, cfg.phi, _stream(seed, TAG_PARTITION))
        sizes = np.array([h.total for h in self.histograms], dtype=np.int64)
        self.emd = data_mod.emd_matrix(self.histograms)

        self.test_features = None
        self.test_labels = None
        objectives = self._build_objectives(sizes)

        eta = learners.enforce_step_size(
            cfg.eta, objectives[0].known_mu, objectives[0].known_lip, cfg.eta_policy)
        self.eta = eta

        batches = np.ceil(sizes / cfg.batch_size)
        training_times = per_batch * batches * cfg.local_steps

        dim = objectives[0].dim
        w0 = np.full(dim, cfg.init_offset / math.sqrt(dim))
        self.workers = [
            WorkerState(i, w0.copy(), objectives[i], int(sizes[i]), float(training_times[i]))
            for i in range(n)
        ]
        self.sizes = sizes

        self.budget = world_mod.BandwidthBudget(cfg.budget_bits, cfg.budget_sigma)
        self.staleness = np.zeros(n, dtype=np.int64)
        self.queue = np.zeros(n)
        self.pulls = np.zeros((n, n), dtype=np.int64)
        self.grad_rngs = [_stream(seed, TAG_GRAD, i) for i in range(n)]
        self._cum_time = [0.0]
        self._cum_bandwidth = 0.0
        self._early_priority = topology.early_phase_priority_matrix(
            self.emd, self.world.distances)
        self._s_cap = cfg.resolved_s()
        self._t_thre = cfg.phase_threshold()
        self._inbox: list[dict[int, tuple[np.ndarray, int]]] = [dict() for _ in range(n)]

        if cfg.learner == "quadratic":
            self.w_star, self.f_star = learners.quadratic_ensemble_optimum(objectives, sizes)
            self.initial_gap = self._global_loss_now() - self.f_star
        else:
            self.w_star, self.f_star = None, None
            self.initial_gap = None

    def _build_objectives(self, sizes: np.ndarray) -> list:
        cfg = self.cfg
        n = cfg.n_workers
        if cfg.learner == "quadratic":
            rng = _stream(cfg.seed, TAG_OBJECTIVE)
            anchors = cfg.divergence_spread * rng.standard_normal(
                (cfg.n_classes, cfg.feature_dim))
            objectives = []
            for i in range(n):
                frac = self.histograms[i].normalized()
                objectives.append(learners.random_spd_quadratic(
                    cfg.feature_dim, cfg.mu_target, cfg.l_target,
                    frac @ anchors, rng, data_size=int(sizes[i]),
                    grad_noise_std=cfg.grad_noise_std))
            return objectives
        means = data_mod.class_mean_vertices(cfg.n_classes, cfg.feature_dim,
                                             cfg.class_mean_scale)
        rng = _stream(cfg.seed, TAG_DATA)
        objectives = []
        for i in range(n):
            ds = data_mod.synth_dataset(self.histograms[i], cfg.feature_dim,
                                        means, cfg.noise_sigma, rng)
            objectives.append(learners.LogisticObjective(
                ds.features, ds.labels, cfg.n_classes, l2=cfg.lambda_l2))
        test_hist = data_mod.ClassHistogram(
            np.full(cfg.n_classes, cfg.test_samples_per_class, dtype=np.int64))
        test_ds = data_mod.synth_dataset(test_hist, cfg.feature_dim, means,
                                         cfg.noise_sigma, rng)
        self.test_features, self.test_labels = test_ds.features, test_ds.labels
        return objectives

    # ---- per-round pieces ----

    def _elapsed_since_start(self, t: int) -> np.ndarray:
        """Simulated time covered by the rounds each worker has sat out."""
        cum = self._cum_time
        start = t - 1 - self.staleness  # index into the cumulative-time table
        return cum[t - 1] - np.asarray([cum[int(s)] for s in start])

    def _estimate_costs(self, t: int) -> np.ndarray:
        transfer = self.world.transfer_matrix(t)
        elapsed = self._elapsed_since_start(t)
        residual = np.maximum(
            np.array([w.training_time for w in self.workers]) - elapsed, 0.0)
        masked = np.where(self.world.in_range, transfer, -np.inf)
        slowest = masked.max(axis=1)
        slowest[~np.isfinite(slowest)] = 0.0  # isolated worker: compute only
        return residual + slowest

    def _priority_matrix(self, t: int) -> np.ndarray:
        if t <= self._t_thre:
            return self._early_priority
        return topology.late_phase_priority_matrix(self.pulls, t, self.staleness)

    def _pull_and_update(self, active_ids, in_neighbors) -> dict[int, np.ndarray]:
        staged = {}
        cfg = self.cfg
        for i in active_ids:
            nbrs = in_neighbors[i]
            models = [self.workers[j].model for j in nbrs]
            sizes = [self.workers[j].data_size for j in nbrs]
            agg = learners.aggregate(models, sizes)
            staged[i] = learners.sgd_step(self.workers[i].objective, agg, self.eta,
                                          cfg.batch_size, self.grad_rngs[i],
                                          steps=cfg.local_steps)
        return staged

    def _realized_costs(self, t: int, active_ids, link_sets) -> dict[int, float]:
        """Residual compute plus the slowest realized link per activated worker.

        ``link_sets[i]`` holds (receiver, source) pairs whose transfer the
        worker must wait for.
        """
        transfer = self.world.transfer_matrix(t)
        elapsed = self._elapsed_since_start(t)
        out = {}
        for i in active_ids:
            residual = max(self.workers[i].training_time - elapsed[i], 0.0)
            links = link_sets[i]
            slowest = max((transfer[r, s] for r, s in links), default=0.0)
            out[i] = residual + slowest
        return out

    def _finish_round(self, t: int, flags: np.ndarray, active_ids, edges,
                      real_costs, staged, round_bandwidth: float) -> RoundRecord:
        stale_in = self.staleness
        queue_in = self.queue
        mean_stale = float(stale_in.mean())
        max_stale = int(stale_in.max())
        queue_total = float(queue_in.sum())

        self.queue = scheduler.update_queue(queue_in, stale_in, self.cfg.tau_bound)
        self.staleness = scheduler.update_staleness(stale_in, flags)
        for i, m in staged.items():
            self.workers[i].model = m

        duration = max(real_costs.values())
        self._cum_time.append(self._cum_time[-1] + duration)
        self._cum_bandwidth += round_bandwidth

        gloss = self._global_loss_now()
        if self.cfg.learner == "quadratic":
            stop_metric = (gloss - self.f_star) / self.initial_gap
            mean_acc = -1.0
        else:
            stop_metric = gloss
            mean_acc = float(np.mean([
                w.objective.accuracy(w.model, self.test_features, self.test_labels)
                for w in self.workers]))

        return RoundRecord(
            t=t,
            active_ids=tuple(active_ids),
            edges=tuple(edges),
            round_duration=float(duration),
            cum_time=self._cum_time[-1],
            active_costs=tuple(real_costs[i] for i in active_ids),
            round_bandwidth=float(round_bandwidth),
            cum_bandwidth=float(self._cum_bandwidth),
            global_loss=float(gloss),
            stop_metric=float(stop_metric),
            mean_accuracy=mean_acc,
            mean_staleness=mean_stale,
            max_staleness=max_stale,
            queue_total=queue_total,
        )

    def _global_loss_now(self) -> float:
        models = [w.model for w in self.workers]
        w_bar = learners.global_weighted_model(models, self.sizes)
        return learners.global_loss([w.objective for w in self.workers],
                                    self.sizes, w_bar)

    # ---- round protocols ----

    def _round_dystop(self, t: int) -> RoundRecord:
        costs = self._estimate_costs(t)
        plan = scheduler.choose_active_set(costs, self.queue, self.staleness,
                                           self.cfg.tau_bound, self.cfg.V)
        budgets = self.budget.draw(_stream(self.cfg.seed, TAG_BUDGET, t), self.world.n)
        snap = topology.build_topology(plan.active_ids, self.world.in_range, budgets,
                                       self.world.model_cost_bits,
                                       self._priority_matrix(t), self._s_cap)
        staged = self._pull_and_update(plan.active_ids, snap.in_neighbors)
        link_sets = {i: [(i, j) for j in snap.in_neighbors[i] if j != i]
                     for i in plan.active_ids}
        real_costs = self._realized_costs(t, plan.active_ids, link_sets)
        topology.record_pulls(snap, self.pulls)
        return self._finish_round(t, plan.flags, plan.active_ids, snap.edges,
                                  real_costs, staged, float(snap.bandwidth.sum()))

    def _round_sync_gossip(self, t: int) -> RoundRecord:
        n = self.world.n
        active_ids = list(range(n))
        flags = np.ones(n, dtype=np.int64)
        in_neighbors = [sorted({int(j) for j in np.flatnonzero(self.world.in_range[i])} | {i})
                        for i in range(n)]
        edges = [(i, j) for i in range(n) for j in in_neighbors[i] if j != i]
        degree = self.world.in_range.sum(axis=1)
        bandwidth = 2.0 * degree * self.world.model_cost_bits
        staged = self._pull_and_update(active_ids, in_neighbors)
        link_sets = {i: [(i, j) for j in in_neighbors[i] if j != i] for i in active_ids}
        real_costs = self._realized_costs(t, active_ids, link_sets)
        return self._finish_round(t, flags, active_ids, edges, real_costs,
                                  staged, float(bandwidth.sum()))

    def _round_push_all(self, t: int) -> RoundRecord:
        costs = self._estimate_costs(t)
        plan = scheduler.choose_active_set(costs, self.queue, self.staleness,
                                           self.cfg.tau_bound, self.cfg.V)
        staged = {}
        edges = []
        bandwidth = np.zeros(self.world.n)
        link_sets = {}
        pushes = []
        for i in plan.active_ids:
            received = sorted(self._inbox[i].items())
            models = [self.workers[i].model] + [m for _, (m, _) in received]
            sizes = [self.workers[i].data_size] + [d for _, (_, d) in received]
            agg = learners.aggregate(models, sizes)
            staged[i] = learners.sgd_step(self.workers[i].objective, agg, self.eta,
                                          self.cfg.batch_size, self.grad_rngs[i],
                                          steps=self.cfg.local_steps)
            targets = np.flatnonzero(self.world.in_range[i])
            pushes.append((i, targets))
            for j in targets:
                edges.append((int(j), i))
                bandwidth[i] += self.world.model_cost_bits
                bandwidth[j] += self.world.model_cost_bits
            self._inbox[i] = {}
            link_sets[i] = [(int(j), i) for j in targets]
        real_costs = self._realized_costs(t, plan.active_ids, link_sets)
        # broadcasts land after the round so simultaneous pushers miss each other
        for i, targets in pushes:
            for j in targets:
                self._inbox[int(j)][i] = (staged[i], self.workers[i].data_size)
        return self._finish_round(t, plan.flags, plan.active_ids, edges,
                                  real_costs, staged, float(bandwidth.sum()))

    # ---- driver ----

    def run(self) -> EventLog:
        cfg = self.cfg
        log = EventLog(policy=cfg.policy, seed=cfg.seed, config=cfg.to_dict())
        round_fn = {
            "dystop": self._round_dystop,
            "sync_gossip": self._round_sync_gossip,
            "push_all": self._round_push_all,
        }[cfg.policy]
        if cfg.learner == "quadratic" and self.initial_gap <= 1e-15:
            log.reached_epsilon = True
            return log
        for t in range(1, cfg.T_max + 1):
            try:
                record = round_fn(t)
            except ValueError as exc:
                log.aborted = True
                log.abort_round = t
                log.abort_reason = str(exc)
                break
            if not math.isfinite(record.global_loss):
                log.aborted = True
                log.abort_round = t
                log.abort_reason = "non-finite global loss"
                break
            log.records.append(record)
            if record.stop_metric <= cfg.epsilon:
                log.reached_epsilon = True
                break
        return log


def run_experiment(cfg: ExperimentConfig) -> EventLog:
    """Build the environment from the config and run it to completion."""
    return Simulation(cfg).run()
