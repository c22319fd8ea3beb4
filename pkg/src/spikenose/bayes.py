"""Variational Gaussian output layer: sampling, KL, ELBO and MC prediction.

The output layer keeps a fully factorized Gaussian posterior over its
weights (mean mu, scale sigma = softplus(rho)) against a zero-mean
Gaussian prior, trained by reparameterized sampling. Prediction averages
softmax probabilities over several weight draws and reports the entropy
of the averaged distribution as the uncertainty signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import snn


def softplus(x: np.ndarray) -> np.ndarray:
    # log1p(exp(x)) written to avoid overflow for large x
    return np.logaddexp(0.0, x)


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class GaussianPosterior:
    """Per-weight variational parameters and the shared prior scale."""

    mu: np.ndarray
    rho: np.ndarray
    prior_sigma: float = 1.0

    def __post_init__(self):
        if self.mu.shape != self.rho.shape:
            raise ValueError("mu and rho shapes differ")
        if self.prior_sigma <= 0.0:
            raise ValueError("prior_sigma must be positive")

    @property
    def sigma(self) -> np.ndarray:
        return softplus(self.rho)


def sample_weights(
    post: GaussianPosterior, rng: np.random.Generator, return_noise: bool = False
):
    """Reparameterized draw w = mu + softplus(rho) * eps, eps ~ N(0, 1)."""
    eps = rng.standard_normal(post.mu.shape).astype(post.mu.dtype)
    w = post.mu + post.sigma * eps
    return (w, eps) if return_noise else w


def kl_gaussian(post: GaussianPosterior) -> float:
    """Closed-form KL(q || prior) for diagonal Gaussians, summed over weights."""
    sigma_q = post.sigma
    sigma_p = post.prior_sigma
    terms = (
        np.log(sigma_p / sigma_q)
        + (sigma_q**2 + post.mu**2) / (2.0 * sigma_p**2)
        - 0.5
    )
    return float(terms.sum())


def kl_gradients(post: GaussianPosterior) -> tuple[np.ndarray, np.ndarray]:
    """d KL / d mu and d KL / d rho (chained through sigma = softplus(rho))."""
    sigma_q = post.sigma
    d_mu = post.mu / post.prior_sigma**2
    d_sigma = sigma_q / post.prior_sigma**2 - 1.0 / sigma_q
    return d_mu, d_sigma * sigmoid(post.rho)


def elbo_loss(cross_entropy: float, kl: float, beta: float, n_minibatches: int) -> float:
    """Per-minibatch objective: data term plus amortized, weighted KL."""
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if n_minibatches < 1:
        raise ValueError("n_minibatches must be >= 1")
    return cross_entropy + beta * kl / n_minibatches


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def counts_to_probs(counts: np.ndarray, time_steps: int, temperature: float = 1.0) -> np.ndarray:
    """Map output spike counts to class probabilities: softmax(counts/T * tau)."""
    return softmax(np.asarray(counts, dtype=np.float64) / time_steps * temperature)


def entropy(probs: np.ndarray, axis: int = -1) -> np.ndarray:
    p = np.clip(probs, 1e-12, 1.0)
    return -(p * np.log(p)).sum(axis=axis)


@dataclass
class Predictive:
    """Monte Carlo predictive distribution for one or more inputs."""

    mean_probs: np.ndarray  # (..., n_classes), rows sum to 1
    entropy: np.ndarray  # (...,) nats, in [0, ln n_classes]
    counts: np.ndarray  # (S, ..., n_classes) raw spike counts per draw

    @property
    def predicted_class(self) -> np.ndarray:
        """Argmax class label, 1-based to match the dataset convention."""
        return np.argmax(self.mean_probs, axis=-1) + 1


def predict_batch(
    spike_trains: np.ndarray,
    model,
    n_samples: int,
    rng: np.random.Generator,
    mode: str = "spike",
) -> Predictive:
    """Average softmax probabilities over ``n_samples`` posterior weight draws.

    spike_trains: (B, T, 8, 16). Each draw is shared across the batch; the
    predictive integral is approximated sample-wise per input.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    config: snn.NetworkConfig = model.config
    all_counts = []
    all_probs = []
    for _ in range(n_samples):
        weights = model.sampled_weights(rng)
        result = snn.network_forward(spike_trains, weights, config, mode=mode)
        all_counts.append(result.counts)
        all_probs.append(counts_to_probs(result.counts, spike_trains.shape[1]))
    mean_probs = np.mean(all_probs, axis=0)
    mean_probs /= mean_probs.sum(axis=-1, keepdims=True)
    return Predictive(
        mean_probs=mean_probs,
        entropy=entropy(mean_probs),
        counts=np.stack(all_counts),
    )


def predict(
    spike_train: np.ndarray,
    model,
    n_samples: int,
    rng: np.random.Generator,
    mode: str = "spike",
) -> Predictive:
    """Single-input convenience wrapper around predict_batch."""
    batched = predict_batch(spike_train[None], model, n_samples, rng, mode=mode)
    return Predictive(
        mean_probs=batched.mean_probs[0],
        entropy=batched.entropy[0],
        counts=batched.counts[:, 0],
    )
