"""Spiking layers on the leaky integrate-and-fire neuron.

Membrane recurrence (soft reset, per neuron):

    V[t] = gamma * V[t-1] + I[t] - Spk[t-1] * v_thr
    Spk[t] = 1 if V[t] > v_thr else 0

Backward passes replace the threshold's derivative with a fast-sigmoid
surrogate and run backpropagation through time over the unrolled T-step
graph. A "soft" forward mode swaps the hard threshold for the smooth
function whose exact derivative is that surrogate, which makes the whole
network differentiable so BPTT can be checked against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .dataset import FEATURES_PER_SENSOR, N_CLASSES, N_SENSORS

GRID_SHAPE = (FEATURES_PER_SENSOR, N_SENSORS)  # 8 x 16
PARAM_COUNT_TARGET = 32768  # published parameter budget, +/-10%

LAYER_NAMES = ("conv", "hidden", "output")


@dataclass(frozen=True)
class LifParams:
    """Neuron constants: membrane decay, firing threshold, surrogate slope."""

    gamma: float = 0.9
    v_thr: float = 1.0
    surrogate_slope: float = 25.0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.v_thr <= 0.0:
            raise ValueError("v_thr must be positive")
        if self.surrogate_slope <= 0.0:
            raise ValueError("surrogate_slope must be positive")


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture: conv 1->C (k x k, same padding) -> LIF -> dense -> LIF
    -> variational dense -> LIF, simulated for ``time_steps`` steps.

    Defaults (C=8, hidden=31) put the trainable parameter count at 32239,
    within 10% of the 32K target; ``assert_param_budget`` enforces that for
    full-scale runs while leaving toy test networks unconstrained.
    """

    conv_channels: int = 8
    kernel_size: int = 3
    hidden: int = 31
    n_classes: int = N_CLASSES
    time_steps: int = 50
    lif: LifParams = field(default_factory=LifParams)

    def __post_init__(self):
        if self.kernel_size % 2 != 1:
            raise ValueError("kernel_size must be odd (same padding)")
        if min(self.conv_channels, self.hidden, self.n_classes, self.time_steps) < 1:
            raise ValueError("all sizes must be >= 1")

    @property
    def flat_size(self) -> int:
        return self.conv_channels * GRID_SHAPE[0] * GRID_SHAPE[1]

    def param_count(self) -> int:
        conv = self.conv_channels * self.kernel_size**2 + self.conv_channels
        dense = self.flat_size * self.hidden + self.hidden
        variational = 2 * (self.hidden * self.n_classes + self.n_classes)
        return conv + dense + variational

    def assert_param_budget(self, target: int = PARAM_COUNT_TARGET, slack: float = 0.10):
        count = self.param_count()
        if abs(count - target) > slack * target:
            raise ValueError(
                f"parameter count {count} outside {slack:.0%} of target {target}"
            )


def surrogate_grad(v_minus_thr: np.ndarray, slope: float) -> np.ndarray:
    """Fast-sigmoid surrogate for the spike threshold's derivative."""
    return 1.0 / (1.0 + slope * np.abs(v_minus_thr)) ** 2


def soft_spike(v_minus_thr: np.ndarray, slope: float) -> np.ndarray:
    """Smooth spike stand-in whose exact derivative is surrogate_grad."""
    return 0.5 + v_minus_thr / (1.0 + slope * np.abs(v_minus_thr))


def _emit(v: np.ndarray, params: LifParams, mode: str) -> np.ndarray:
    if mode == "spike":
        return (v > params.v_thr).astype(v.dtype)
    if mode == "soft":
        return soft_spike(v - params.v_thr, params.surrogate_slope)
    raise ValueError(f"unknown mode {mode!r}")


def lif_step(
    v_prev: np.ndarray,
    input_current: np.ndarray,
    prev_spikes: np.ndarray,
    params: LifParams,
    mode: str = "spike",
) -> tuple[np.ndarray, np.ndarray]:
    """One membrane update: decay + integrate + soft reset, then threshold."""
    v = params.gamma * v_prev + input_current - prev_spikes * params.v_thr
    return v, _emit(v, params, mode)


def _conv_windows(x: np.ndarray, k: int) -> np.ndarray:
    """Zero-padded k x k sliding windows over the last two axes."""
    pad = k // 2
    widths = [(0, 0)] * (x.ndim - 2) + [(pad, pad), (pad, pad)]
    return sliding_window_view(np.pad(x, widths), (k, k), axis=(-2, -1))


def conv_forward(
    spikes_in: np.ndarray, kernel: np.ndarray, bias: Optional[np.ndarray] = None
) -> np.ndarray:
    """Same-padding stride-1 cross-correlation.

    spikes_in: (..., C_in, H, W); kernel: (C_out, C_in, k, k).
    """
    if spikes_in.shape[-3] != kernel.shape[1]:
        raise ValueError("input channel mismatch")
    windows = _conv_windows(spikes_in, kernel.shape[-1])
    out = np.einsum("...chwij,ocij->...ohw", windows, kernel)
    if bias is not None:
        out += bias[:, None, None]
    return out


@dataclass
class ForwardTrace:
    """Membrane and spike history of one forward pass, kept for BPTT."""

    inputs: np.ndarray  # (B, T, 8, 16)
    v: dict[str, np.ndarray]  # layer -> (T, B, ...)
    s: dict[str, np.ndarray]
    mode: str


@dataclass
class ForwardResult:
    counts: np.ndarray  # (B, n_classes), sum of output spikes over time
    activity: dict[str, float]  # layer -> emitted-spike fraction
    trace: Optional[ForwardTrace] = None


def network_forward(
    spike_train: np.ndarray,
    weights: dict[str, np.ndarray],
    config: NetworkConfig,
    mode: str = "spike",
    record: bool = False,
) -> ForwardResult:
    """Simulate the full network over T steps for a batch of spike trains.

    spike_train: (B, T, 8, 16); membranes start at zero. Returns per-class
    output spike counts and per-layer spiking activity (emitted spikes per
    neuron-timestep, the energy model's S_A).
    """
    if spike_train.ndim != 4 or spike_train.shape[2:] != GRID_SHAPE:
        raise ValueError(f"expected (B, T, {GRID_SHAPE[0]}, {GRID_SHAPE[1]}) spike train")
    if not np.all(np.isfinite(spike_train)):
        raise ValueError("non-finite spike train")
    batch, steps = spike_train.shape[:2]
    dtype = weights["fc_w"].dtype
    lif = config.lif

    shapes = {
        "conv": (batch, config.conv_channels) + GRID_SHAPE,
        "hidden": (batch, config.hidden),
        "output": (batch, config.n_classes),
    }
    v = {name: np.zeros(shape, dtype=dtype) for name, shape in shapes.items()}
    s = {name: np.zeros(shape, dtype=dtype) for name, shape in shapes.items()}
    hist_v = {name: np.zeros((steps,) + shape, dtype=dtype) for name, shape in shapes.items()}
    hist_s = {name: np.zeros((steps,) + shape, dtype=dtype) for name, shape in shapes.items()}

    counts = np.zeros((batch, config.n_classes), dtype=dtype)
    for t in range(steps):
        x = spike_train[:, t][:, None].astype(dtype)  # (B, 1, 8, 16)
        i_conv = conv_forward(x, weights["conv_w"], weights["conv_b"])
        v["conv"], s["conv"] = lif_step(v["conv"], i_conv, s["conv"], lif, mode)

        flat = s["conv"].reshape(batch, -1)
        i_fc = flat @ weights["fc_w"].T + weights["fc_b"]
        v["hidden"], s["hidden"] = lif_step(v["hidden"], i_fc, s["hidden"], lif, mode)

        i_out = s["hidden"] @ weights["out_w"].T + weights["out_b"]
        v["output"], s["output"] = lif_step(v["output"], i_out, s["output"], lif, mode)

        counts += s["output"]
        for name in LAYER_NAMES:
            hist_v[name][t] = v[name]
            hist_s[name][t] = s[name]

    activity = {name: float(hist_s[name].mean()) for name in LAYER_NAMES}
    trace = ForwardTrace(inputs=spike_train, v=hist_v, s=hist_s, mode=mode) if record else None
    return ForwardResult(counts=counts, activity=activity, trace=trace)


def _lif_backward_through_time(
    v: np.ndarray, g_spikes_direct: np.ndarray, params: LifParams
) -> np.ndarray:
    """Reverse the LIF recurrence: gradients w.r.t. each step's input current.

    v, g_spikes_direct: (T, B, ...). The spike at t feeds V[t+1] through the
    soft reset (-v_thr) and V[t+1] feeds V[t] through the decay (gamma);
    the threshold itself contributes via the surrogate derivative.
    """
    g_current = np.zeros_like(v)
    g_v_next = np.zeros_like(v[0])
    for t in range(v.shape[0] - 1, -1, -1):
        g_s = g_spikes_direct[t] - params.v_thr * g_v_next
        g_v = g_s * surrogate_grad(v[t] - params.v_thr, params.surrogate_slope)
        g_v += params.gamma * g_v_next
        g_current[t] = g_v
        g_v_next = g_v
    return g_current


def backward(
    trace: ForwardTrace,
    d_counts: np.ndarray,
    weights: dict[str, np.ndarray],
    config: NetworkConfig,
) -> dict[str, np.ndarray]:
    """BPTT over a recorded forward pass.

    d_counts: (B, n_classes) gradient of the loss w.r.t. the output spike
    counts. Returns gradients for every entry of ``weights`` (the sampled
    output weights included; the variational chain rule happens upstream).
    """
    if trace is None:
        raise ValueError("backward requires a recorded forward trace")
    steps, batch = trace.v["output"].shape[:2]
    lif = config.lif

    # counts = sum_t s_out[t], so every step sees the same direct gradient.
    g_out_direct = np.broadcast_to(d_counts, (steps,) + d_counts.shape)
    g_i_out = _lif_backward_through_time(trace.v["output"], g_out_direct, lif)

    s_hidden = trace.s["hidden"]  # (T, B, H)
    grads = {
        "out_w": np.einsum("tbo,tbh->oh", g_i_out, s_hidden),
        "out_b": g_i_out.sum(axis=(0, 1)),
    }

    g_hidden_direct = np.einsum("tbo,oh->tbh", g_i_out, weights["out_w"])
    g_i_fc = _lif_backward_through_time(trace.v["hidden"], g_hidden_direct, lif)

    s_conv_flat = trace.s["conv"].reshape(steps, batch, -1)
    grads["fc_w"] = np.einsum("tbh,tbf->hf", g_i_fc, s_conv_flat)
    grads["fc_b"] = g_i_fc.sum(axis=(0, 1))

    g_conv_direct = np.einsum("tbh,hf->tbf", g_i_fc, weights["fc_w"]).reshape(
        trace.s["conv"].shape
    )
    g_i_conv = _lif_backward_through_time(trace.v["conv"], g_conv_direct, lif)

    x = trace.inputs.swapaxes(0, 1)[:, :, None].astype(g_i_conv.dtype)  # (T, B, 1, 8, 16)
    windows = _conv_windows(x, config.kernel_size)
    grads["conv_w"] = np.einsum("tbohw,tbchwij->ocij", g_i_conv, windows)
    grads["conv_b"] = g_i_conv.sum(axis=(0, 1, 3, 4))
    return grads
