"""The hybrid model: deterministic spiking layers + variational output layer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bayes, snn
from .dataset import NormalizationStats

RHO_INIT = -3.0  # initial posterior scale softplus(-3) ~= 0.049


@dataclass
class Model:
    """Trainable state: conv + dense weights, output-layer posteriors, and
    the normalization stats of the training set the model was fitted on."""

    config: snn.NetworkConfig
    weights: dict[str, np.ndarray]  # conv_w, conv_b, fc_w, fc_b
    posterior_w: bayes.GaussianPosterior
    posterior_b: bayes.GaussianPosterior
    stats: Optional[NormalizationStats] = None

    @classmethod
    def initialize(
        cls, config: snn.NetworkConfig, seed: int, prior_sigma: float = 1.0
    ) -> "Model":
        """Seeded scaled-normal init; biases start at zero."""
        rng = np.random.default_rng([seed, 0xC0FFEE])
        c, k, h, o = config.conv_channels, config.kernel_size, config.hidden, config.n_classes
        f32 = np.float32

        def scaled(shape, fan_in):
            return (rng.standard_normal(shape) / np.sqrt(fan_in)).astype(f32)

        weights = {
            "conv_w": scaled((c, 1, k, k), k * k),
            "conv_b": np.zeros(c, dtype=f32),
            "fc_w": scaled((h, config.flat_size), config.flat_size),
            "fc_b": np.zeros(h, dtype=f32),
        }
        posterior_w = bayes.GaussianPosterior(
            mu=scaled((o, h), h),
            rho=np.full((o, h), RHO_INIT, dtype=f32),
            prior_sigma=prior_sigma,
        )
        posterior_b = bayes.GaussianPosterior(
            mu=np.zeros(o, dtype=f32),
            rho=np.full(o, RHO_INIT, dtype=f32),
            prior_sigma=prior_sigma,
        )
        return cls(config, weights, posterior_w, posterior_b)

    def sampled_weights(
        self, rng: Optional[np.random.Generator], return_noise: bool = False
    ) -> dict[str, np.ndarray]:
        """Full weight set with one posterior draw for the output layer.

        ``rng=None`` collapses the posterior to its mean (deterministic pass).
        """
        full = dict(self.weights)
        if rng is None:
            full["out_w"] = self.posterior_w.mu
            full["out_b"] = self.posterior_b.mu
            if return_noise:
                full["_eps_w"] = np.zeros_like(self.posterior_w.mu)
                full["_eps_b"] = np.zeros_like(self.posterior_b.mu)
            return full
        w, eps_w = bayes.sample_weights(self.posterior_w, rng, return_noise=True)
        b, eps_b = bayes.sample_weights(self.posterior_b, rng, return_noise=True)
        full["out_w"], full["out_b"] = w, b
        if return_noise:
            full["_eps_w"], full["_eps_b"] = eps_w, eps_b
        return full

    def kl(self) -> float:
        return bayes.kl_gaussian(self.posterior_w) + bayes.kl_gaussian(self.posterior_b)

    def parameters(self) -> dict[str, np.ndarray]:
        """All trainable arrays, in the declared checkpoint order."""
        return {
            "conv_w": self.weights["conv_w"],
            "conv_b": self.weights["conv_b"],
            "fc_w": self.weights["fc_w"],
            "fc_b": self.weights["fc_b"],
            "out_mu_w": self.posterior_w.mu,
            "out_rho_w": self.posterior_w.rho,
            "out_mu_b": self.posterior_b.mu,
            "out_rho_b": self.posterior_b.rho,
        }

    def set_parameters(self, params: dict[str, np.ndarray]) -> None:
        for name in ("conv_w", "conv_b", "fc_w", "fc_b"):
            self.weights[name] = params[name]
        self.posterior_w.mu = params["out_mu_w"]
        self.posterior_w.rho = params["out_rho_w"]
        self.posterior_b.mu = params["out_mu_b"]
        self.posterior_b.rho = params["out_rho_b"]

    def param_count(self) -> int:
        return sum(p.size for p in self.parameters().values())
