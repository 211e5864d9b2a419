import json
import math

import pytest

from adflsim.cli import (EXIT_CONFIG_ERROR, EXIT_OK, main, run_to_files,
                         sweep_to_files)
from adflsim.config import (ConfigError, ExperimentConfig, load_config,
                            save_config)
from adflsim.engine import METRICS_HEADER


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


FAST = """
n_workers: 5
T_max: 8
samples_per_class: 30
n_classes: 4
feature_dim: 6
epsilon: 1.0e-9
"""


# ---- loading and validation ----

def test_empty_file_yields_reference_defaults(tmp_path):
    cfg = load_config(write(tmp_path, ""))
    assert cfg == ExperimentConfig()
    assert cfg.n_workers == 100
    assert cfg.V == 10.0
    assert cfg.g0_db == -43.0
    assert cfg.noise_watts == 1e-13
    assert cfg.channel_bandwidth_hz == 1e6
    assert cfg.resolved_s() == math.ceil(math.log2(100))


def test_missing_file_is_a_config_error():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/path.yaml")


def test_unknown_key_is_rejected_by_name(tmp_path):
    with pytest.raises(ConfigError, match="learning_rate_wrong"):
        load_config(write(tmp_path, "learning_rate_wrong: 0.1\n"))


def test_out_of_range_phi_names_the_key(tmp_path):
    with pytest.raises(ConfigError, match="phi"):
        load_config(write(tmp_path, "phi: -1\n"))


def test_out_of_range_values_name_their_keys():
    for key, value in [("n_workers", 0), ("eta", 0.0), ("tau_bound", -1),
                       ("V", 0.0), ("epsilon", 0.0), ("t_thre_frac", 1.5),
                       ("policy", "nonsense"), ("learner", "deep")]:
        with pytest.raises(ConfigError, match=key):
            ExperimentConfig(**{key: value}).validate()


def test_tight_budget_needs_explicit_override():
    with pytest.raises(ConfigError, match="budget_bits"):
        ExperimentConfig(budget_bits=1e3, model_cost_bits=1e6).validate()
    cfg = ExperimentConfig(budget_bits=1e3, model_cost_bits=1e6,
                           allow_tight_budget=True).validate()
    assert cfg.budget_bits == 1e3


def test_type_errors_are_reported(tmp_path):
    with pytest.raises(ConfigError, match="n_workers"):
        load_config(write(tmp_path, "n_workers: 2.5\n"))
    with pytest.raises(ConfigError, match="iid_exact"):
        load_config(write(tmp_path, "iid_exact: 3\n"))


def test_config_roundtrip(tmp_path):
    cfg = ExperimentConfig(seed=7, n_workers=12, phi=0.4, tau_bound=5,
                           comm_radius=44.5, s=3, policy="push_all")
    path = str(tmp_path / "saved.yaml")
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_s_accepts_auto_off_and_int(tmp_path):
    assert load_config(write(tmp_path, "s: auto\n")).resolved_s() == 7
    assert load_config(write(tmp_path, "s: off\n")).resolved_s() is None
    assert load_config(write(tmp_path, "s: 4\n")).resolved_s() == 4
    with pytest.raises(ConfigError, match="s"):
        load_config(write(tmp_path, "s: never\n"))


def test_phase_threshold_fraction():
    cfg = ExperimentConfig(T_max=500, t_thre_frac=0.3)
    assert cfg.phase_threshold() == 150


# ---- run and sweep outputs ----

def test_run_writes_metrics_and_summary(tmp_path):
    cfg = load_config(write(tmp_path, FAST))
    out = tmp_path / "out"
    log = run_to_files(cfg, out)
    lines = (out / "metrics.csv").read_text().strip().split("\n")
    assert lines[0] == ",".join(METRICS_HEADER)
    assert len(lines) == log.rounds_run + 1
    summary = json.loads((out / "summary.json").read_text())
    assert summary["metrics_schema"] == "v1"
    assert summary["rounds_run"] == log.rounds_run
    assert summary["config"]["n_workers"] == 5


def test_byte_identical_outputs_for_same_seed(tmp_path):
    cfg = load_config(write(tmp_path, FAST))
    run_to_files(cfg, tmp_path / "a")
    run_to_files(cfg, tmp_path / "b")
    assert (tmp_path / "a/metrics.csv").read_bytes() == (tmp_path / "b/metrics.csv").read_bytes()
    assert (tmp_path / "a/summary.json").read_bytes() == (tmp_path / "b/summary.json").read_bytes()


def test_sweep_emits_one_dir_per_point_plus_summary(tmp_path):
    cfg = load_config(write(tmp_path, FAST))
    values = [0, 2, 5, 8, 10, 15]
    logs = sweep_to_files(cfg, "tau_bound", values, tmp_path / "sweep")
    assert len(logs) == 6
    for v in values:
        assert (tmp_path / f"sweep/tau_bound_{v}/metrics.csv").exists()
        assert (tmp_path / f"sweep/tau_bound_{v}/summary.json").exists()
    rows = (tmp_path / "sweep/sweep_summary.csv").read_text().strip().split("\n")
    assert len(rows) == 7


def test_sweep_with_single_value_matches_plain_run(tmp_path):
    cfg = load_config(write(tmp_path, FAST))
    run_to_files(cfg, tmp_path / "plain")
    sweep_to_files(cfg, "phi", [cfg.phi], tmp_path / "sw")
    a = (tmp_path / "plain/metrics.csv").read_bytes()
    b = (tmp_path / f"sw/phi_{cfg.phi}/metrics.csv").read_bytes()
    assert a == b


def test_sweep_summary_matches_per_round_files(tmp_path):
    cfg = load_config(write(tmp_path, FAST))
    sweep_to_files(cfg, "tau_bound", [0, 3], tmp_path / "sw")
    rows = (tmp_path / "sw/sweep_summary.csv").read_text().strip().split("\n")
    header = rows[0].split(",")
    for row in rows[1:]:
        vals = dict(zip(header, row.split(",")))
        point = tmp_path / f"sw/tau_bound_{vals['value']}"
        csv_rows = point.joinpath("metrics.csv").read_text().strip().split("\n")
        last = dict(zip(csv_rows[0].split(","), csv_rows[-1].split(",")))
        assert float(vals["completion_time_s"]) == pytest.approx(
            float(last["cum_time_s"]), rel=1e-12)
        assert float(vals["total_bandwidth_bits"]) == pytest.approx(
            float(last["cum_bandwidth_bits"]), rel=1e-12)
        assert int(vals["rounds_run"]) == int(last["round"])


def test_sweep_rejects_bad_axis_and_empty_values(tmp_path):
    cfg = load_config(write(tmp_path, FAST))
    with pytest.raises(ConfigError, match="axis"):
        sweep_to_files(cfg, "noise_watts", [1.0], tmp_path / "x")
    with pytest.raises(ConfigError, match="values"):
        sweep_to_files(cfg, "phi", [], tmp_path / "y")


# ---- command line entry point ----

def test_cli_run_exit_zero(tmp_path):
    cfg_path = write(tmp_path, FAST)
    code = main(["run", cfg_path, "--out", str(tmp_path / "cli_out"), "--seed", "9"])
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "cli_out/summary.json").read_text())
    assert summary["seed"] == 9


def test_cli_policy_override(tmp_path):
    cfg_path = write(tmp_path, FAST)
    code = main(["run", cfg_path, "--out", str(tmp_path / "o"),
                 "--policy", "sync_gossip"])
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "o/summary.json").read_text())
    assert summary["policy"] == "sync_gossip"


def test_cli_bad_config_exit_one(tmp_path, capsys):
    code = main(["run", write(tmp_path, "phi: -3\n"), "--out", str(tmp_path / "o")])
    assert code == EXIT_CONFIG_ERROR
    assert "phi" in capsys.readouterr().err


def test_cli_missing_file_exit_one(tmp_path):
    assert main(["run", str(tmp_path / "nope.yaml")]) == EXIT_CONFIG_ERROR


def test_cli_sweep(tmp_path):
    cfg_path = write(tmp_path, FAST)
    code = main(["sweep", cfg_path, "--axis", "V", "--values", "1,10",
                 "--out", str(tmp_path / "sw")])
    assert code == EXIT_OK
    assert (tmp_path / "sw/sweep_summary.csv").exists()
    assert (tmp_path / "sw/V_1.0/metrics.csv").exists()
    assert (tmp_path / "sw/V_10.0/metrics.csv").exists()
