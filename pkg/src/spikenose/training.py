"""Mini-batch training with Adam, deterministic seeding, and checkpoints."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bayes, encoding, snn
from .dataset import GasSample, NormalizationStats, fit_stats, scale_features, to_grid
from .model import Model

CHECKPOINT_FORMAT = "spikenose-checkpoint"
CHECKPOINT_VERSION = 1


class TrainingDivergedError(RuntimeError):
    """Loss went non-finite; aborting instead of writing a broken model."""


class CheckpointError(ValueError):
    """Corrupt, truncated, or mismatched checkpoint file."""


@dataclass(frozen=True)
class TrainConfig:
    """Loop hyperparameters plus the architecture being trained."""

    epochs: int = 50
    minibatch: int = 32
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    kl_weight: float = 0.1
    prior_sigma: float = 1.0
    seed: int = 1234
    network: snn.NetworkConfig = field(default_factory=snn.NetworkConfig)

    def __post_init__(self):
        if self.epochs < 1 or self.minibatch < 1:
            raise ValueError("epochs and minibatch must be >= 1")
        # zero is allowed so a no-op step stays expressible in tests
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        net = dict(d.pop("network"))
        lif = snn.LifParams(**net.pop("lif"))
        return cls(network=snn.NetworkConfig(lif=lif, **net), **d)


def config_hash(config: TrainConfig) -> str:
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


class Adam:
    """Per-array adaptive moment optimizer, updates in place."""

    def __init__(self, lr: float, beta1: float, beta2: float, eps: float):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bias1 = 1.0 - self.beta1**self.t
        bias2 = 1.0 - self.beta2**self.t
        for name, p in params.items():
            g = grads[name].astype(p.dtype)
            m = self.m.setdefault(name, np.zeros_like(p))
            v = self.v.setdefault(name, np.zeros_like(p))
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            p -= (self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)).astype(p.dtype)


def minibatch_loss_and_grads(
    model: Model,
    spike_trains: np.ndarray,
    labels: np.ndarray,
    kl_weight: float,
    n_minibatches: int,
    weight_rng: Optional[np.random.Generator],
    mode: str = "spike",
) -> tuple[float, dict[str, np.ndarray], np.ndarray]:
    """One MC weight draw, forward, BPTT, and the variational chain rule.

    Returns (elbo loss, gradients keyed like model.parameters(), predicted
    1-based labels for the minibatch).
    """
    config = model.config
    batch, steps = spike_trains.shape[:2]
    weights = model.sampled_weights(weight_rng, return_noise=True)
    result = snn.network_forward(spike_trains, weights, config, mode=mode, record=True)

    probs = bayes.counts_to_probs(result.counts, steps)
    onehot = np.zeros_like(probs)
    onehot[np.arange(batch), labels - 1] = 1.0
    ce = float(-np.log(np.clip(probs[np.arange(batch), labels - 1], 1e-12, None)).mean())
    kl = model.kl()
    loss = bayes.elbo_loss(ce, kl, kl_weight, n_minibatches)

    d_counts = ((probs - onehot) / (batch * steps)).astype(np.float32)
    g = snn.backward(result.trace, d_counts, weights, config)

    # Reparameterization: w = mu + softplus(rho) * eps.
    kl_scale = kl_weight / n_minibatches
    kl_mu_w, kl_rho_w = bayes.kl_gradients(model.posterior_w)
    kl_mu_b, kl_rho_b = bayes.kl_gradients(model.posterior_b)
    sig_w = bayes.sigmoid(model.posterior_w.rho)
    sig_b = bayes.sigmoid(model.posterior_b.rho)
    grads = {
        "conv_w": g["conv_w"],
        "conv_b": g["conv_b"],
        "fc_w": g["fc_w"],
        "fc_b": g["fc_b"],
        "out_mu_w": g["out_w"] + kl_scale * kl_mu_w,
        "out_rho_w": g["out_w"] * weights["_eps_w"] * sig_w + kl_scale * kl_rho_w,
        "out_mu_b": g["out_b"] + kl_scale * kl_mu_b,
        "out_rho_b": g["out_b"] * weights["_eps_b"] * sig_b + kl_scale * kl_rho_b,
    }
    predicted = np.argmax(result.counts, axis=-1) + 1
    return loss, grads, predicted


@dataclass
class EpochStats:
    epoch: int
    loss: float
    train_accuracy: float


@dataclass
class TrainResult:
    model: Model
    history: list[EpochStats]


def preprocess(samples: Sequence[GasSample], stats: NormalizationStats):
    """Scale all samples to (N, 8, 16) grids plus a (N,) label vector."""
    grids = np.stack(
        [to_grid(scale_features(s.features, stats)) for s in samples]
    ).astype(np.float32)
    labels = np.array([s.label for s in samples], dtype=np.int64)
    return grids, labels


def train(config: TrainConfig, samples: Sequence[GasSample]) -> TrainResult:
    """Full training run: fit stats, encode per epoch, Adam-update per batch."""
    if not samples:
        raise ValueError("empty training set")
    stats64 = fit_stats(samples)
    stats = NormalizationStats(
        log_min=stats64.log_min.astype(np.float32),
        log_max=stats64.log_max.astype(np.float32),
    )
    model = Model.initialize(config.network, config.seed, config.prior_sigma)
    model.stats = stats
    grids, labels = preprocess(samples, stats)

    n = len(samples)
    steps = config.network.time_steps
    n_minibatches = (n + config.minibatch - 1) // config.minibatch
    opt = Adam(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps)

    history: list[EpochStats] = []
    for epoch in range(config.epochs):
        order = np.random.default_rng([config.seed, 2, epoch]).permutation(n)
        losses = []
        correct = 0
        for step_no in range(n_minibatches):
            idx = order[step_no * config.minibatch : (step_no + 1) * config.minibatch]
            trains = encoding.encode_batch(grids[idx], steps, config.seed, epoch, idx)
            weight_rng = np.random.default_rng([config.seed, 1, epoch, step_no])
            loss, grads, predicted = minibatch_loss_and_grads(
                model, trains, labels[idx], config.kl_weight, n_minibatches, weight_rng
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, step {step_no}"
                )
            opt.step(model.parameters(), grads)
            losses.append(loss)
            correct += int((predicted == labels[idx]).sum())
        history.append(EpochStats(epoch, float(np.mean(losses)), correct / n))
    return TrainResult(model=model, history=history)


def history_csv(history: Sequence[EpochStats]) -> str:
    lines = ["epoch,loss,train_acc"]
    lines += [f"{h.epoch},{h.loss:.6f},{h.train_accuracy:.6f}" for h in history]
    return "\n".join(lines) + "\n"


def save_checkpoint(
    model: Model,
    config: TrainConfig,
    path: str | Path,
    epoch: int = 0,
    metrics: Optional[dict] = None,
) -> None:
    """JSON manifest line followed by raw little-endian float32 blocks."""
    if model.stats is None:
        raise CheckpointError("model has no normalization stats; train first")
    arrays = dict(model.parameters())
    arrays["stats_log_min"] = model.stats.log_min
    arrays["stats_log_max"] = model.stats.log_max
    manifest = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config_hash": config_hash(config),
        "config": config.to_dict(),
        "epoch": epoch,
        "metrics": metrics or {},
        "arrays": [
            {"name": k, "shape": list(v.shape), "dtype": "<f4"} for k, v in arrays.items()
        ],
    }
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(json.dumps(manifest, sort_keys=True).encode() + b"\n")
        for v in arrays.values():
            f.write(np.ascontiguousarray(v, dtype="<f4").tobytes())
    os.replace(tmp, path)


def load_checkpoint(
    path: str | Path, expected_config: Optional[TrainConfig] = None
) -> tuple[Model, dict]:
    """Exact inverse of save_checkpoint; rejects corruption and mismatches."""
    raw = Path(path).read_bytes()
    header, sep, blob = raw.partition(b"\n")
    if not sep:
        raise CheckpointError("missing manifest line")
    try:
        manifest = json.loads(header)
    except json.JSONDecodeError as e:
        raise CheckpointError(f"corrupt manifest: {e}") from e
    if manifest.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError("not a checkpoint file")
    if manifest.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {manifest.get('version')}")
    if expected_config is not None and manifest["config_hash"] != config_hash(expected_config):
        raise CheckpointError("checkpoint config hash does not match provided config")

    config = TrainConfig.from_dict(manifest["config"])
    arrays = {}
    offset = 0
    for spec in manifest["arrays"]:
        shape = tuple(spec["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 4
        chunk = blob[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(f"truncated array block {spec['name']!r}")
        arrays[spec["name"]] = np.frombuffer(chunk, dtype="<f4").reshape(shape).copy()
        offset += nbytes
    if offset != len(blob):
        raise CheckpointError("trailing bytes after declared arrays")

    model = Model.initialize(config.network, config.seed, config.prior_sigma)
    model.set_parameters(arrays)
    model.stats = NormalizationStats(
        log_min=arrays["stats_log_min"], log_max=arrays["stats_log_max"]
    )
    return model, manifest
