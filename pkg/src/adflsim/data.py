"""Synthetic per-worker datasets with a controllable non-IID level."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ClassHistogram:
    """Per-class sample counts held by one worker."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if (counts < 0).any():
            raise ValueError("class counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return int(self.counts.shape[0])

    def normalized(self) -> np.ndarray:
        if self.total == 0:
            raise ValueError("cannot normalize an empty histogram")
        return self.counts / self.total


@dataclass(frozen=True)
class LocalDataset:
    """Feature/label arrays for one worker plus their class histogram."""

    features: np.ndarray
    labels: np.ndarray
    histogram: ClassHistogram = field(repr=False)

    def __post_init__(self):
        if len(self.features) != len(self.labels) or len(self.labels) != self.histogram.total:
            raise ValueError("features, labels and histogram sizes disagree")

    def __len__(self) -> int:
        return len(self.labels)


def _largest_remainder(total: int, proportions: np.ndarray) -> np.ndarray:
    """Allocate an integer total across bins, conserving the sum exactly."""
    shares = proportions * total
    alloc = np.floor(shares).astype(np.int64)
    short = total - int(alloc.sum())
    if short > 0:
        # ties broken toward the lower index (stable sort on descending remainder)
        order = np.argsort(-(shares - alloc), kind="stable")
        alloc[order[:short]] += 1
    return alloc


def dirichlet_partition(global_counts, n_workers: int, phi: float,
                        rng: np.random.Generator) -> list[ClassHistogram]:
    """Split per-class counts across workers with Dirichlet(phi) proportions.

    Column sums always equal ``global_counts``. Smaller phi concentrates
    classes on few workers. Allocations leaving any worker with an empty
    dataset are redrawn up to 100 times; if that fails, one sample is moved
    from the current largest holder to each empty worker.
    """
    if phi <= 0:
        raise ValueError("phi must be positive")
    if n_workers < 1:
        raise ValueError("n_workers must be at least 1")
    global_counts = np.asarray(global_counts, dtype=np.int64)
    n_classes = global_counts.shape[0]

    table = None
    for _ in range(100):
        table = np.zeros((n_workers, n_classes), dtype=np.int64)
        for k in range(n_classes):
            props = rng.dirichlet(np.full(n_workers, phi))
            table[:, k] = _largest_remainder(int(global_counts[k]), props)
        if (table.sum(axis=1) > 0).all():
            break
    for w in np.flatnonzero(table.sum(axis=1) == 0):
        donor = int(np.argmax(table.sum(axis=1)))
        k = int(np.argmax(table[donor]))
        table[donor, k] -= 1
        table[w, k] += 1
    return [ClassHistogram(row) for row in table]


def iid_exact_partition(global_counts, n_workers: int) -> list[ClassHistogram]:
    """Deterministic equal split of each class, remainders to low worker ids."""
    global_counts = np.asarray(global_counts, dtype=np.int64)
    table = np.zeros((n_workers, global_counts.shape[0]), dtype=np.int64)
    for k, ck in enumerate(global_counts):
        base, rem = divmod(int(ck), n_workers)
        table[:, k] = base
        table[:rem, k] += 1
    return [ClassHistogram(row) for row in table]


def emd(h_i: ClassHistogram, h_j: ClassHistogram) -> float:
    """L1 distance between the normalized class histograms of two workers."""
    if h_i.total == 0 or h_j.total == 0:
        raise ValueError("EMD is undefined for an empty histogram")
    return float(np.abs(h_i.normalized() - h_j.normalized()).sum())


def emd_matrix(histograms: list[ClassHistogram]) -> np.ndarray:
    """Dense symmetric matrix of pairwise histogram distances."""
    props = np.stack([h.normalized() for h in histograms])
    return np.abs(props[:, None, :] - props[None, :, :]).sum(axis=-1)


def class_mean_vertices(n_classes: int, feature_dim: int, scale: float) -> np.ndarray:
    """Class centers at scaled one-hot vertices of the feature space."""
    if feature_dim < n_classes:
        raise ValueError("feature_dim must be at least n_classes")
    means = np.zeros((n_classes, feature_dim))
    means[np.arange(n_classes), np.arange(n_classes)] = scale
    return means


def synth_dataset(hist: ClassHistogram, feature_dim: int, class_means: np.ndarray,
                  noise_sigma: float, rng: np.random.Generator) -> LocalDataset:
    """Draw Gaussian clusters around the class means, sized by the histogram."""
    if feature_dim < 1:
        raise ValueError("feature_dim must be at least 1")
    parts, labels = [], []
    for k, count in enumerate(hist.counts):
        if count == 0:
            continue
        noise = noise_sigma * rng.standard_normal((int(count), feature_dim))
        parts.append(class_means[k] + noise)
        labels.append(np.full(int(count), k, dtype=np.int64))
    if parts:
        features = np.concatenate(parts)
        labels = np.concatenate(labels)
    else:
        features = np.zeros((0, feature_dim))
        labels = np.zeros(0, dtype=np.int64)
    return LocalDataset(features, labels, hist)


def histograms_to_csv(histograms: list[ClassHistogram]) -> str:
    """Render per-worker class counts as CSV for inspection."""
    n_classes = histograms[0].n_classes
    out = io.StringIO()
    out.write("worker," + ",".join(f"class_{k}" for k in range(n_classes)) + ",total\n")
    for i, h in enumerate(histograms):
        out.write(f"{i}," + ",".join(str(int(c)) for c in h.counts) + f",{h.total}\n")
    return out.getvalue()
