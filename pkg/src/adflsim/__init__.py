"""Simulator for asynchronous decentralized federated learning with
dynamic staleness control and phase-aware topology construction."""

from .config import ConfigError, ExperimentConfig, load_config, save_config
from .data import ClassHistogram, LocalDataset, dirichlet_partition, emd, synth_dataset
from .engine import EventLog, RoundRecord, Simulation, WorkerState, run_experiment
from .learners import (LogisticObjective, QuadraticObjective, aggregate,
                       global_loss, global_weighted_model, sgd_step)
from .scheduler import RoundPlan, choose_active_set, drift_plus_penalty
from .topology import TopologySnapshot, build_topology
from .world import (BandwidthBudget, ChannelModel, ComputeProfile, Position,
                    World, channel_gain, distance, transfer_time,
                    transmission_rate)

__version__ = "0.1.0"

__all__ = [
    "BandwidthBudget", "ChannelModel", "ClassHistogram", "ComputeProfile",
    "ConfigError", "EventLog", "ExperimentConfig", "LocalDataset",
    "LogisticObjective", "Position", "QuadraticObjective", "RoundPlan",
    "RoundRecord", "Simulation", "TopologySnapshot", "WorkerState", "World",
    "aggregate", "build_topology", "channel_gain", "choose_active_set",
    "dirichlet_partition", "distance", "drift_plus_penalty", "emd",
    "global_loss", "global_weighted_model", "load_config", "run_experiment",
    "save_config", "sgd_step", "synth_dataset", "transfer_time",
    "transmission_rate",
]
