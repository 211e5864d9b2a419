"""Convex local objectives, SGD updates and data-size weighted aggregation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


def _check_finite(w: np.ndarray, what: str) -> np.ndarray:
    if not np.isfinite(w).all():
        raise ValueError(f"{what} contains non-finite entries")
    return w


@dataclass
class QuadraticObjective:
    """Strongly convex quadratic loss 0.5 w'Aw - b'w with known curvature."""

    a_matrix: np.ndarray
    b_vector: np.ndarray
    data_size: int
    known_mu: float
    known_lip: float
    grad_noise_std: float = 0.0

    kind = "quadratic"

    @property
    def dim(self) -> int:
        return self.b_vector.shape[0]

    def loss(self, w: np.ndarray) -> float:
        if w.shape[0] != self.dim:
            raise ValueError("model dimension mismatch")
        return float(0.5 * w @ self.a_matrix @ w - self.b_vector @ w)

    def gradient(self, w: np.ndarray) -> np.ndarray:
        if w.shape[0] != self.dim:
            raise ValueError("model dimension mismatch")
        return self.a_matrix @ w - self.b_vector

    def stochastic_gradient(self, w: np.ndarray, batch_size: int,
                            rng: np.random.Generator) -> np.ndarray:
        # gradient is exact; optional Gaussian noise models minibatch variance
        g = self.gradient(w)
        if self.grad_noise_std > 0.0:
            g = g + self.grad_noise_std * rng.standard_normal(self.dim)
        return g

    def local_optimum(self) -> np.ndarray:
        return np.linalg.solve(self.a_matrix, self.b_vector)


@dataclass
class LogisticObjective:
    """Multinomial logistic regression with L2 regularization on one worker.

    The model vector is the flattened (n_classes, feature_dim + 1) weight
    matrix, bias column last. With l2 > 0 the loss is l2-strongly convex;
    a tight smoothness constant is data dependent, so none is claimed.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    l2: float = 0.0

    kind = "logistic"
    known_lip = None

    def __post_init__(self):
        n = self.features.shape[0]
        self._design = np.hstack([self.features, np.ones((n, 1))])
        self.data_size = n
        self.known_mu = self.l2 if self.l2 > 0 else None

    @property
    def dim(self) -> int:
        return self.n_classes * self._design.shape[1]

    def _weights(self, w: np.ndarray) -> np.ndarray:
        if w.shape[0] != self.dim:
            raise ValueError("model dimension mismatch")
        return w.reshape(self.n_classes, self._design.shape[1])

    def _log_probs(self, wm: np.ndarray, x: np.ndarray) -> np.ndarray:
        logits = x @ wm.T
        logits -= logits.max(axis=1, keepdims=True)
        return logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))

    def loss(self, w: np.ndarray) -> float:
        if self.data_size == 0:
            raise ValueError("empty dataset")
        wm = self._weights(w)
        logp = self._log_probs(wm, self._design)
        nll = -logp[np.arange(self.data_size), self.labels].mean()
        return float(nll + 0.5 * self.l2 * (w @ w))

    def gradient(self, w: np.ndarray) -> np.ndarray:
        return self._batch_gradient(w, np.arange(self.data_size))

    def _batch_gradient(self, w: np.ndarray, idx: np.ndarray) -> np.ndarray:
        if self.data_size == 0:
            raise ValueError("empty dataset")
        wm = self._weights(w)
        x = self._design[idx]
        probs = np.exp(self._log_probs(wm, x))
        probs[np.arange(len(idx)), self.labels[idx]] -= 1.0
        grad = probs.T @ x / len(idx)
        return grad.ravel() + self.l2 * w

    def stochastic_gradient(self, w: np.ndarray, batch_size: int,
                            rng: np.random.Generator) -> np.ndarray:
        if batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.data_size == 0:
            raise ValueError("empty dataset")
        if batch_size >= self.data_size:
            return self.gradient(w)
        idx = rng.choice(self.data_size, size=batch_size, replace=False)
        return self._batch_gradient(w, idx)

    def accuracy(self, w: np.ndarray, features: np.ndarray, labels: np.ndarray) -> float:
        wm = self._weights(w)
        design = np.hstack([features, np.ones((features.shape[0], 1))])
        pred = (design @ wm.T).argmax(axis=1)
        return float((pred == labels).mean())


def random_spd_quadratic(dim: int, mu: float, lip: float, b_vector: np.ndarray,
                         rng: np.random.Generator, data_size: int = 1,
                         grad_noise_std: float = 0.0) -> QuadraticObjective:
    """Quadratic with random orientation and spectrum spanning [mu, lip]."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = np.linspace(mu, lip, dim)
    a = (q * eigs) @ q.T
    a = 0.5 * (a + a.T)  # kill asymmetric rounding residue
    return QuadraticObjective(a, np.asarray(b_vector, dtype=float), data_size,
                              known_mu=mu, known_lip=lip, grad_noise_std=grad_noise_std)


def aggregate(models: list[np.ndarray], data_sizes) -> np.ndarray:
    """Data-size weighted average of pulled models."""
    if len(models) == 0:
        raise ValueError("cannot aggregate an empty model list")
    stacked = np.stack(models)
    sizes = np.asarray(data_sizes, dtype=float)
    if sizes.shape[0] != stacked.shape[0]:
        raise ValueError("one data size per model is required")
    weights = sizes / sizes.sum()
    return _check_finite(weights @ stacked, "aggregated model")


def max_safe_eta(mu: float, lip: float) -> float:
    """Largest step size with a per-round contraction guarantee."""
    return mu / (2.0 * lip ** 2)


def enforce_step_size(eta: float, mu, lip, policy: str = "clamp") -> float:
    """Apply the contraction-safe step-size bound when curvature is known.

    ``policy`` is "clamp" (warn and shrink) or "error".
    """
    if mu is None or lip is None:
        return eta
    bound = max_safe_eta(mu, lip)
    if eta < bound:
        return eta
    if policy == "error":
        raise ValueError(f"eta={eta} violates the step-size bound {bound}")
    clamped = bound * (1.0 - 1e-6)
    warnings.warn(f"eta={eta} exceeds the safe bound {bound}; clamped to {clamped}")
    return clamped


def sgd_step(objective, w: np.ndarray, eta: float, batch_size: int,
             rng: np.random.Generator, steps: int = 1) -> np.ndarray:
    """One or more stochastic gradient steps from an aggregated model."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    for _ in range(steps):
        w = w - eta * objective.stochastic_gradient(w, batch_size, rng)
    return _check_finite(w, "updated model")


def global_weighted_model(models: list[np.ndarray], data_sizes) -> np.ndarray:
    """Data-size weighted average over the whole population."""
    return aggregate(models, data_sizes)


def global_loss(objectives, data_sizes, w: np.ndarray) -> float:
    """Population loss: data-size weighted sum of local losses at w."""
    sizes = np.asarray(data_sizes, dtype=float)
    weights = sizes / sizes.sum()
    return float(sum(a * obj.loss(w) for a, obj in zip(weights, objectives)))


def global_gradient(objectives, data_sizes, w: np.ndarray) -> np.ndarray:
    sizes = np.asarray(data_sizes, dtype=float)
    weights = sizes / sizes.sum()
    g = np.zeros_like(w)
    for a, obj in zip(weights, objectives):
        g += a * obj.gradient(w)
    return g


def quadratic_ensemble_optimum(objectives, data_sizes) -> tuple[np.ndarray, float]:
    """Analytic minimizer and minimum of a weighted quadratic ensemble."""
    sizes = np.asarray(data_sizes, dtype=float)
    weights = sizes / sizes.sum()
    a_bar = sum(a * obj.a_matrix for a, obj in zip(weights, objectives))
    b_bar = sum(a * obj.b_vector for a, obj in zip(weights, objectives))
    w_star = np.linalg.solve(a_bar, b_bar)
    return w_star, global_loss(objectives, data_sizes, w_star)


def gradient_divergence(objectives, data_sizes, probes: list[np.ndarray]) -> float:
    """Max observed gap between a local gradient and the population gradient."""
    worst = 0.0
    for w in probes:
        g_all = global_gradient(objectives, data_sizes, w)
        for obj in objectives:
            worst = max(worst, float(np.linalg.norm(g_all - obj.gradient(w))))
    return worst
