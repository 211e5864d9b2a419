"""Watch the activation scheduler trade staleness against round duration.

The virtual queues accumulate staleness excess over the bound; the greedy
prefix search activates just enough cheap workers to keep them stable.
A tighter bound forces broader activation and lower achieved staleness; a
looser one lets the scheduler run mostly singletons.
"""
import dataclasses

import numpy as np

from adflsim.config import ExperimentConfig
from adflsim.engine import run_experiment

base = ExperimentConfig(n_workers=30, T_max=200, samples_per_class=100,
                        learner="quadratic", epsilon=1e-12, compute_spread=10.0)

print("effect of the staleness bound (30 workers, 200 rounds, seed 0):\n")
print(f"{'bound':>6} {'mean stale':>11} {'max stale':>10} {'mean |A_t|':>11} "
      f"{'mean backlog':>13} {'sim time':>9}")
for bound in (0, 2, 5, 8, 15):
    log = run_experiment(dataclasses.replace(base, tau_bound=bound))
    stale = np.mean([r.mean_staleness for r in log.records])
    mstale = max(r.max_staleness for r in log.records)
    act = np.mean([len(r.active_ids) for r in log.records])
    backlog = np.mean([r.queue_total for r in log.records])
    print(f"{bound:>6} {stale:>11.2f} {mstale:>10} {act:>11.1f} "
          f"{backlog:>13.1f} {log.completion_time:>8.1f}s")

print("\nfirst rounds under bound 2, seed 0:")
log = run_experiment(dataclasses.replace(base, tau_bound=2, T_max=12))
for r in log.records:
    print(f"  t={r.t:>2} activated {list(r.active_ids)} "
          f"duration {r.round_duration:6.2f}s backlog {r.queue_total:5.1f}")
