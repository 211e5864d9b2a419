"""Experiment configuration: defaults, validation, YAML load/save."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import yaml


class ConfigError(ValueError):
    """Raised for unknown keys or out-of-range values; names the key."""


POLICIES = ("dystop", "sync_gossip", "push_all")
LEARNERS = ("quadratic", "logistic")
SWEEP_AXES = ("tau_bound", "V", "s", "phi")


@dataclass
class ExperimentConfig:
    """All knobs for one run. Defaults follow the reference edge setting:
    100 workers in a 100 m square, -43 dB path loss at 1 m, 1e-13 W noise,
    1 MHz links, 10-20 dBm transmit power, V=10, sample cap ceil(log2 N).
    """

    seed: int = 0
    n_workers: int = 100
    region_size: float = 100.0
    comm_radius: float | str = "auto"

    # channel
    g0_db: float = -43.0
    noise_watts: float = 1e-13
    channel_bandwidth_hz: float = 1e6
    path_loss_exponent: float = 4.0
    tx_power_min_dbm: float = 10.0
    tx_power_max_dbm: float = 20.0
    tx_fluctuation_sigma: float = 0.1

    # communication accounting
    model_cost_bits: float = 1e6
    budget_bits: float = 16e6
    budget_sigma: float = 0.0
    allow_tight_budget: bool = False

    # compute heterogeneity
    per_batch_time: float = 0.05
    compute_spread: float = 4.0
    local_steps: int = 1
    batch_size: int = 32

    # data
    phi: float = 1.0
    iid_exact: bool = False
    n_classes: int = 10
    samples_per_class: int = 300
    feature_dim: int = 20
    noise_sigma: float = 0.5
    class_mean_scale: float = 2.0
    test_samples_per_class: int = 20

    # learner
    learner: str = "quadratic"
    mu_target: float = 0.1
    l_target: float = 1.0
    divergence_spread: float = 2.0
    grad_noise_std: float = 0.0
    lambda_l2: float = 0.01
    eta: float = 0.04
    eta_policy: str = "clamp"
    init_offset: float = 0.0

    # scheduling and topology
    tau_bound: int = 2
    V: float = 10.0
    s: int | str = "auto"
    t_thre_frac: float = 0.3

    # stopping
    T_max: int = 500
    epsilon: float = 0.01
    policy: str = "dystop"

    def validate(self) -> "ExperimentConfig":
        def require(cond: bool, key: str, why: str):
            if not cond:
                raise ConfigError(f"{key}: {why}")

        require(self.seed >= 0, "seed", "must be nonnegative")
        require(self.n_workers >= 1, "n_workers", "must be at least 1")
        require(self.region_size > 0, "region_size", "must be positive")
        if self.comm_radius != "auto":
            require(isinstance(self.comm_radius, (int, float)) and self.comm_radius > 0,
                    "comm_radius", "must be positive or 'auto'")
        require(self.noise_watts > 0, "noise_watts", "must be positive")
        require(self.channel_bandwidth_hz > 0, "channel_bandwidth_hz", "must be positive")
        require(self.path_loss_exponent > 0, "path_loss_exponent", "must be positive")
        require(self.tx_power_min_dbm <= self.tx_power_max_dbm,
                "tx_power_min_dbm", "must not exceed tx_power_max_dbm")
        require(self.tx_fluctuation_sigma >= 0, "tx_fluctuation_sigma", "must be nonnegative")
        require(self.model_cost_bits > 0, "model_cost_bits", "must be positive")
        require(self.budget_bits >= 0, "budget_bits", "must be nonnegative")
        if not self.allow_tight_budget:
            require(self.budget_bits >= self.model_cost_bits, "budget_bits",
                    "must cover at least one model transfer "
                    "(set allow_tight_budget to override)")
        require(self.budget_sigma >= 0, "budget_sigma", "must be nonnegative")
        require(self.per_batch_time > 0, "per_batch_time", "must be positive")
        require(self.compute_spread >= 1, "compute_spread", "must be at least 1")
        require(self.local_steps >= 1, "local_steps", "must be at least 1")
        require(self.batch_size >= 1, "batch_size", "must be at least 1")
        require(self.phi > 0, "phi", "must be positive")
        require(self.n_classes >= 1, "n_classes", "must be at least 1")
        require(self.samples_per_class >= 1, "samples_per_class", "must be at least 1")
        require(self.feature_dim >= 1, "feature_dim", "must be at least 1")
        if self.learner == "logistic":
            require(self.feature_dim >= self.n_classes, "feature_dim",
                    "must be at least n_classes for the synthetic task")
        require(self.noise_sigma >= 0, "noise_sigma", "must be nonnegative")
        require(self.test_samples_per_class >= 1, "test_samples_per_class",
                "must be at least 1")
        require(self.learner in LEARNERS, "learner", f"must be one of {LEARNERS}")
        require(self.mu_target > 0, "mu_target", "must be positive")
        require(self.l_target >= self.mu_target, "l_target", "must be at least mu_target")
        require(self.divergence_spread >= 0, "divergence_spread", "must be nonnegative")
        require(self.grad_noise_std >= 0, "grad_noise_std", "must be nonnegative")
        require(self.lambda_l2 >= 0, "lambda_l2", "must be nonnegative")
        require(self.eta > 0, "eta", "must be positive")
        require(self.eta_policy in ("clamp", "error"), "eta_policy",
                "must be 'clamp' or 'error'")
        require(self.init_offset >= 0, "init_offset", "must be nonnegative")
        require(self.tau_bound >= 0, "tau_bound", "must be nonnegative")
        require(self.V > 0, "V", "must be positive")
        if self.s not in ("auto", "off"):
            require(isinstance(self.s, int) and self.s >= 1, "s",
                    "must be a positive integer, 'auto' or 'off'")
        require(0.0 <= self.t_thre_frac <= 1.0, "t_thre_frac", "must be in [0, 1]")
        require(self.T_max >= 0, "T_max", "must be nonnegative")
        require(self.epsilon > 0, "epsilon", "must be positive")
        require(self.policy in POLICIES, "policy", f"must be one of {POLICIES}")
        return self

    def resolved_s(self) -> int | None:
        if self.s == "off":
            return None
        if self.s == "auto":
            return max(1, math.ceil(math.log2(max(2, self.n_workers))))
        return int(self.s)

    def phase_threshold(self) -> int:
        """Last round of the early topology phase."""
        return math.ceil(self.t_thre_frac * self.T_max)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, value):
    """Nudge YAML scalars toward the declared field type."""
    if key not in _FIELD_TYPES:
        raise ConfigError(f"{key}: unknown configuration key")
    current = getattr(ExperimentConfig(), key)
    if key == "s" and value is False:
        return "off"  # YAML 1.1 reads a bare `off` as boolean
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false")
        return value
    if isinstance(current, int) and not isinstance(current, bool):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number")
        if float(value) != int(value):
            raise ConfigError(f"{key}: expected an integer")
        return int(value)
    if isinstance(current, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number")
        return float(value)
    # str-or-number fields (comm_radius, s) and plain strings
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if key == "comm_radius":
            return float(value)
        if key == "s":
            return int(value)
        raise ConfigError(f"{key}: expected a string")
    if not isinstance(value, str):
        raise ConfigError(f"{key}: unsupported value type {type(value).__name__}")
    return value


def config_from_dict(raw: dict) -> ExperimentConfig:
    values = {key: _coerce(key, value) for key, value in raw.items()}
    return ExperimentConfig(**values).validate()


def load_config(path: str) -> ExperimentConfig:
    """Read a YAML key-value document; an empty file yields all defaults."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}")
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must be a key-value document")
    return config_from_dict(raw)


def save_config(cfg: ExperimentConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=True)
