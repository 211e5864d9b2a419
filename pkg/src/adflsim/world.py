"""Edge environment model: worker placement, wireless channel, link timing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LinkUnavailableError(RuntimeError):
    """Raised when a transfer is requested over a link with zero rate."""


@dataclass(frozen=True)
class Position:
    """Worker location in meters inside the square deployment region."""

    x: float
    y: float


@dataclass(frozen=True)
class ChannelModel:
    """Wireless channel parameters.

    ``path_loss_constant_db`` is the mean channel gain at the reference
    distance of 1 m, in dB. ``noise_power`` is the receiver noise power in
    watts and ``channel_bandwidth`` the link bandwidth in Hz used by the
    Shannon capacity formula. ``channel_bandwidth`` is a rate parameter and
    is distinct from the per-model bandwidth cost accounted by topology
    construction, which is measured in bits.
    """

    path_loss_constant_db: float = -43.0
    noise_power: float = 1e-13
    channel_bandwidth: float = 1e6
    path_loss_exponent: float = 4.0
    min_reference_distance: float = 1.0

    def __post_init__(self):
        if self.noise_power <= 0:
            raise ValueError("noise_power must be positive")
        if self.channel_bandwidth <= 0:
            raise ValueError("channel_bandwidth must be positive")

    @property
    def gain_constant(self) -> float:
        """Path-loss constant converted from dB to linear scale."""
        return 10.0 ** (self.path_loss_constant_db / 10.0)

    def mean_gain(self, dist):
        """Mean channel gain at a given distance (scalar or array), meters."""
        d = np.maximum(np.asarray(dist, dtype=float), self.min_reference_distance)
        return self.gain_constant * d ** (-self.path_loss_exponent)


@dataclass(frozen=True)
class ComputeProfile:
    """Per-worker compute capability and transmit power."""

    per_batch_time: float
    local_steps_per_round: int = 1
    transmit_power: float = 0.1

    def __post_init__(self):
        if self.per_batch_time <= 0:
            raise ValueError("per_batch_time must be positive")
        if self.transmit_power <= 0:
            raise ValueError("transmit_power must be positive")


@dataclass(frozen=True)
class BandwidthBudget:
    """Per-round bandwidth budget in bits, optionally fluctuating over rounds."""

    budget_per_round: float
    fluctuation_sigma: float = 0.0

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Sample per-worker budgets for one round."""
        if self.fluctuation_sigma <= 0.0:
            return np.full(n, float(self.budget_per_round))
        factor = np.clip(1.0 + self.fluctuation_sigma * rng.standard_normal(n), 0.1, None)
        return self.budget_per_round * factor


def distance(a: Position, b: Position) -> float:
    """Euclidean distance between two positions, meters."""
    return float(np.hypot(a.x - b.x, a.y - b.y))


def channel_gain(dist: float, rng: np.random.Generator,
                 channel: ChannelModel = ChannelModel()) -> float:
    """Sample one channel gain for a link of the given length.

    Gains are exponentially distributed with mean given by the path-loss
    model. Distances below the reference distance are clamped to it.
    """
    return float(rng.exponential(channel.mean_gain(dist)))


def transmission_rate(gain: float, tx_power: float, channel: ChannelModel) -> float:
    """Shannon rate in bits/s for a link with the given gain and power."""
    return channel.channel_bandwidth * np.log2(1.0 + tx_power * gain / channel.noise_power)


def transfer_time(model_bits: float, rate: float) -> float:
    """Seconds needed to push one model over a link with the given rate."""
    if model_bits == 0:
        return 0.0
    if rate <= 0:
        raise LinkUnavailableError("link rate is zero; pair must not be selected")
    return model_bits / rate


def pairwise_distances(xy: np.ndarray) -> np.ndarray:
    """Dense symmetric distance matrix for an (n, 2) position array."""
    diff = xy[:, None, :] - xy[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def _disk_graph_connected(dist: np.ndarray, radius: float) -> bool:
    n = dist.shape[0]
    adj = dist <= radius
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        nbrs = np.flatnonzero(adj[i] & ~seen)
        seen[nbrs] = True
        stack.extend(nbrs.tolist())
    return bool(seen.all())


def min_connected_radius(xy: np.ndarray) -> float:
    """Smallest communication radius whose disk graph is connected.

    Binary search over the sorted pairwise distances; the answer is always
    one of them.
    """
    n = xy.shape[0]
    if n <= 1:
        return 0.0
    dist = pairwise_distances(xy)
    candidates = np.unique(dist[np.triu_indices(n, k=1)])
    lo, hi = 0, len(candidates) - 1
    if not _disk_graph_connected(dist, candidates[hi]):
        raise ValueError("positions cannot form a connected disk graph")
    while lo < hi:
        mid = (lo + hi) // 2
        if _disk_graph_connected(dist, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


class World:
    """Static environment plus per-round fading state for one simulation run.

    Positions, transmit powers and the communication radius are fixed at
    setup. Channel gains are redrawn once per round for every directed pair
    from a round-keyed substream, so a given (seed, round, pair) always sees
    the same fade regardless of query order.
    """

    _GAIN_TAG = 7

    def __init__(self, positions: np.ndarray, tx_powers: np.ndarray,
                 channel: ChannelModel, model_cost_bits: float,
                 comm_radius: float, seed: int):
        self.positions = np.asarray(positions, dtype=float)
        self.tx_powers = np.asarray(tx_powers, dtype=float)
        self.channel = channel
        self.model_cost_bits = float(model_cost_bits)
        self.comm_radius = float(comm_radius)
        self.seed = int(seed)
        self.n = self.positions.shape[0]
        self.distances = pairwise_distances(self.positions)
        self.in_range = (self.distances <= self.comm_radius)
        np.fill_diagonal(self.in_range, False)
        self._mean_gain = channel.mean_gain(self.distances)
        self._round_cache: tuple[int, np.ndarray, np.ndarray] | None = None

    def gain_matrix(self, t: int) -> np.ndarray:
        """Channel gains for round t; entry [i, j] is the fade on the j->i link."""
        self._ensure_round(t)
        return self._round_cache[1]

    def transfer_matrix(self, t: int) -> np.ndarray:
        """Seconds to move one model over each directed link at round t.

        Entry [i, j] is the time for worker i to pull one model from j.
        """
        self._ensure_round(t)
        return self._round_cache[2]

    def _ensure_round(self, t: int) -> None:
        if self._round_cache is not None and self._round_cache[0] == t:
            return
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, self._GAIN_TAG, t]))
        gains = rng.standard_exponential((self.n, self.n)) * self._mean_gain
        snr = self.tx_powers[None, :] * gains / self.channel.noise_power
        rates = self.channel.channel_bandwidth * np.log2(1.0 + snr)
        with np.errstate(divide="ignore"):
            transfer = np.where(rates > 0, self.model_cost_bits / rates, np.inf)
        self._round_cache = (t, gains, transfer)
