"""Experiment front end: single runs, parameter sweeps, metrics export."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import SWEEP_AXES, ConfigError, ExperimentConfig, load_config
from .engine import EventLog, run_experiment

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUN_ABORT = 2

SWEEP_SUMMARY_HEADER = (
    "axis", "value", "seed", "policy", "rounds_run", "reached_epsilon",
    "completion_time_s", "total_bandwidth_bits", "final_loss",
    "final_stop_metric", "final_accuracy", "mean_staleness", "max_staleness",
)


def run_to_files(cfg: ExperimentConfig, out_dir: str | Path) -> EventLog:
    """Run one experiment and write metrics.csv plus summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log = run_experiment(cfg)
    (out / "metrics.csv").write_text(log.to_csv(), encoding="utf-8")
    (out / "summary.json").write_text(
        json.dumps(log.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return log


def _point_value(axis: str, raw: str):
    if axis in ("tau_bound", "s"):
        return int(raw)
    return float(raw)


def _with_axis(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    return dataclasses.replace(cfg, **{axis: value}).validate()


def sweep_to_files(cfg: ExperimentConfig, axis: str, values, out_dir: str | Path) -> list[EventLog]:
    """Run one experiment per axis value; per-point dirs plus a summary CSV."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"axis: must be one of {SWEEP_AXES}")
    if not values:
        raise ConfigError("values: at least one sweep value is required")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    logs = []
    rows = [",".join(SWEEP_SUMMARY_HEADER)]
    for value in values:
        point_cfg = _with_axis(cfg, axis, value)
        log = run_to_files(point_cfg, out / f"{axis}_{value}")
        logs.append(log)
        s = log.summary()
        rows.append(",".join(str(x) for x in (
            axis, value, point_cfg.seed, point_cfg.policy, s["rounds_run"],
            s["reached_epsilon"], s["completion_time_s"], s["total_bandwidth_bits"],
            s["final_loss"], s["final_stop_metric"], s["final_accuracy"],
            s["mean_staleness"], s["max_staleness"],
        )))
    (out / "sweep_summary.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    return logs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adflsim",
        description="Simulate staleness-controlled asynchronous decentralized learning.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a single experiment")
    run_p.add_argument("config", help="YAML config file (empty file = defaults)")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--out", default="out", help="output directory")
    run_p.add_argument("--policy", default=None, help="override the config policy")

    sweep_p = sub.add_parser("sweep", help="run one experiment per axis value")
    sweep_p.add_argument("config")
    sweep_p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 0,2,5,8")
    sweep_p.add_argument("--seed", type=int, default=None)
    sweep_p.add_argument("--out", default="out")
    sweep_p.add_argument("--policy", default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.policy is not None:
            cfg = dataclasses.replace(cfg, policy=args.policy)
        cfg.validate()
        if args.command == "run":
            logs = [run_to_files(cfg, args.out)]
        else:
            values = [_point_value(args.axis, v) for v in args.values.split(",") if v != ""]
            logs = sweep_to_files(cfg, args.axis, values, args.out)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    for log in logs:
        if log.aborted:
            print(f"run aborted at round {log.abort_round}: {log.abort_reason}",
                  file=sys.stderr)
            return EXIT_RUN_ABORT
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
