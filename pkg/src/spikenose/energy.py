"""FLOPS and inference-energy model for spiking vs. non-spiking networks.

Per-operation constants are the published 45 nm CMOS figures. An ANN pays a
multiply-accumulate per FLOP; an SNN pays an accumulate per FLOP, gated by
spiking activity and repeated over the T simulation steps:

    E_ANN = sum_l FLOPS_ANN(l) * E_MAC
    E_SNN = sum_l FLOPS_ANN(l) * S_A(l) * E_AC * T
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import bayes, snn
from .dataset import GasSample
from .encoding import encode_batch
from .model import Model
from .training import preprocess

PJ_PER_NJ = 1000.0

# Published totals used for golden-mode reproduction. The SNN FLOPS figure
# is an opaque measured value, not FLOPS_ANN * mean(S_A).
GOLDEN_FLOPS_ANN = 482304
GOLDEN_FLOPS_SNN = 125254
GOLDEN_TIME_STEPS = 50
GOLDEN_ACCURACY = {"ann": 99.0, "snn": 98.0}


@dataclass(frozen=True)
class EnergyConstants:
    """45 nm CMOS per-operation energies in pJ."""

    e_multiply: float = 3.1
    e_add: float = 0.1
    e_mac: float = 3.2
    e_ac: float = 0.1

    def __post_init__(self):
        if abs(self.e_mac - (self.e_multiply + self.e_add)) > 1e-12:
            raise ValueError("E_MAC must equal multiply + add")


@dataclass(frozen=True)
class LayerEnergy:
    """One layer's ANN FLOPS count, spiking activity, and SNN FLOPS."""

    name: str
    flops_ann: int
    spiking_activity: float
    flops_snn: float

    @classmethod
    def from_activity(cls, name: str, flops_ann: int, spiking_activity: float):
        return cls(name, flops_ann, spiking_activity, flops_snn(flops_ann, spiking_activity))


@dataclass(frozen=True)
class EnergyProfile:
    layers: tuple[LayerEnergy, ...]
    time_steps: int
    constants: EnergyConstants
    mode: str  # "golden" or "measured"

    @property
    def total_flops_ann(self) -> float:
        return sum(l.flops_ann for l in self.layers)

    @property
    def total_flops_snn(self) -> float:
        return sum(l.flops_snn for l in self.layers)

    @property
    def e_ann_nj(self) -> float:
        return self.total_flops_ann * self.constants.e_mac / PJ_PER_NJ

    @property
    def e_snn_nj(self) -> float:
        return self.total_flops_snn * self.constants.e_ac * self.time_steps / PJ_PER_NJ

    @property
    def efficiency_ratio(self) -> float:
        return self.e_ann_nj / self.e_snn_nj


def flops_conv(out_h: int, out_w: int, kernel: int, c_in: int, c_out: int) -> int:
    """Conv-layer FLOPS, the published square form generalized to H x W maps."""
    if min(out_h, out_w, kernel, c_in, c_out) <= 0:
        raise ValueError("layer dimensions must be positive")
    return out_h * out_w * kernel**2 * c_in * c_out


def flops_dense(n_in: int, n_out: int) -> int:
    if min(n_in, n_out) <= 0:
        raise ValueError("layer dimensions must be positive")
    return n_in * n_out


def flops_snn(flops_ann: float, spiking_activity: float) -> float:
    """SNN effective FLOPS: the ANN count gated by spiking activity."""
    if not 0.0 <= spiking_activity <= 1.0:
        raise ValueError("spiking activity must lie in [0, 1]")
    return flops_ann * spiking_activity


def network_flops(config: snn.NetworkConfig) -> dict[str, int]:
    """Per-layer ANN FLOPS of the artifact's own architecture."""
    h, w = snn.GRID_SHAPE
    return {
        "conv": flops_conv(h, w, config.kernel_size, 1, config.conv_channels),
        "hidden": flops_dense(config.flat_size, config.hidden),
        "output": flops_dense(config.hidden, config.n_classes),
    }


def energy_report(
    flops_ann_per_layer: Sequence[int],
    activity_per_layer: Sequence[float],
    time_steps: int,
    constants: EnergyConstants = EnergyConstants(),
    names: Optional[Sequence[str]] = None,
    mode: str = "measured",
) -> EnergyProfile:
    """Build an EnergyProfile from aligned FLOPS and activity lists."""
    if len(flops_ann_per_layer) != len(activity_per_layer):
        raise ValueError("flops and activity lists must align")
    if not flops_ann_per_layer:
        raise ValueError("empty network")
    if time_steps < 1:
        raise ValueError("time_steps must be >= 1")
    names = names or [f"layer{i}" for i in range(len(flops_ann_per_layer))]
    layers = tuple(
        LayerEnergy.from_activity(n, f, a)
        for n, f, a in zip(names, flops_ann_per_layer, activity_per_layer)
    )
    return EnergyProfile(layers, time_steps, constants, mode)


def golden_profile(constants: EnergyConstants = EnergyConstants()) -> EnergyProfile:
    """Reproduce the published Table values from their own FLOPS totals."""
    layer = LayerEnergy(
        name="total",
        flops_ann=GOLDEN_FLOPS_ANN,
        spiking_activity=GOLDEN_FLOPS_SNN / GOLDEN_FLOPS_ANN,
        flops_snn=GOLDEN_FLOPS_SNN,
    )
    return EnergyProfile((layer,), GOLDEN_TIME_STEPS, constants, "golden")


def measure_activity(
    model: Model, samples: Sequence[GasSample], time_steps: int, seed: int
) -> dict[str, float]:
    """Mean per-layer emitted-spike fraction over the given samples.

    Uses the posterior-mean output weights so the measurement is a pure
    function of (model, samples, time_steps, seed).
    """
    if not samples:
        raise ValueError("empty sample set")
    if model.stats is None:
        raise ValueError("model has no normalization stats")
    grids, _ = preprocess(samples, model.stats)
    weights = model.sampled_weights(None)
    totals = {name: 0.0 for name in snn.LAYER_NAMES}
    chunk = 256
    for start in range(0, len(grids), chunk):
        idx = np.arange(start, min(start + chunk, len(grids)))
        trains = encode_batch(grids[idx], time_steps, seed, 0, idx)
        result = snn.network_forward(trains, weights, model.config)
        for name in snn.LAYER_NAMES:
            totals[name] += result.activity[name] * len(idx)
    return {name: totals[name] / len(grids) for name in snn.LAYER_NAMES}


def measured_profile(
    model: Model,
    samples: Sequence[GasSample],
    seed: int,
    constants: EnergyConstants = EnergyConstants(),
) -> EnergyProfile:
    """Energy profile of the artifact's own network with measured activity."""
    time_steps = model.config.time_steps
    activity = measure_activity(model, samples, time_steps, seed)
    flops = network_flops(model.config)
    return energy_report(
        [flops[n] for n in snn.LAYER_NAMES],
        [activity[n] for n in snn.LAYER_NAMES],
        time_steps,
        constants,
        names=list(snn.LAYER_NAMES),
        mode="measured",
    )


def energy_csv(profile: EnergyProfile) -> str:
    """CSV schema: layer rows, a TOTAL row, then energy and ratio rows."""
    lines = ["layer,flops_ann,s_a,flops_snn"]
    for l in profile.layers:
        lines.append(f"{l.name},{l.flops_ann},{l.spiking_activity:.6f},{l.flops_snn:.2f}")
    lines.append(
        f"TOTAL,{profile.total_flops_ann:.0f},,{profile.total_flops_snn:.2f}"
    )
    lines.append(f"e_ann_nJ,{profile.e_ann_nj:.2f},,")
    lines.append(f"e_snn_nJ,{profile.e_snn_nj:.2f},,")
    lines.append(f"efficiency_ratio,{profile.efficiency_ratio:.2f},,")
    lines.append(f"mode,{profile.mode},,")
    return "\n".join(lines) + "\n"
