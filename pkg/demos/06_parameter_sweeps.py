"""Drive the sweep runner the way the command line does.

Sweeps the staleness bound on a small instance, writing one metrics CSV
per point plus a sweep summary, then reads the summary back. The same
thing is available from the shell:

    adflsim sweep cfg.yaml --axis tau_bound --values 0,2,5,8,10,15 --out out/
"""
import tempfile
from pathlib import Path

from adflsim.cli import sweep_to_files
from adflsim.config import ExperimentConfig

cfg = ExperimentConfig(n_workers=20, T_max=150, samples_per_class=80,
                       learner="quadratic", epsilon=1e-12, compute_spread=10.0)

out = Path(tempfile.mkdtemp(prefix="adflsim_sweep_"))
logs = sweep_to_files(cfg, "tau_bound", [0, 2, 5, 8, 10, 15], out)

print(f"wrote {sum(1 for _ in out.rglob('*.csv'))} csv files under {out}\n")
print("sweep_summary.csv:")
print(out.joinpath("sweep_summary.csv").read_text())

print("mean staleness per point, recomputed from the per-round files:")
for bound, log in zip([0, 2, 5, 8, 10, 15], logs):
    rows = out.joinpath(f"tau_bound_{bound}", "metrics.csv").read_text().strip().split("\n")
    header = rows[0].split(",")
    col = header.index("mean_staleness")
    vals = [float(r.split(",")[col]) for r in rows[1:]]
    print(f"  bound {bound:>2}: {sum(vals) / len(vals):.3f}")
