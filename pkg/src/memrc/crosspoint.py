"""Simulated memristor crosspoint column: weight mapping, program-and-verify, MAC.

A pruned positive-weight readout is mapped onto device conductances; the
column computes sum(G_j * x_j) by Ohm's and Kirchhoff's laws and thresholds
the output current.  Devices are programmed by iteratively raising the SET
compliance current until the verify read crosses a threshold just below the
target conductance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .readout import LinearReadout


class ProgrammingError(RuntimeError):
    """Program-and-verify failed to reach the threshold within max_iters."""


class NegativeWeightError(ValueError):
    """Single-column mapping needs strictly positive weights.

    Negative weights would require a differential (G+ - G-) column, which
    this simulator does not implement.
    """


@dataclass(frozen=True)
class DeviceProgramModel:
    """First-order device response: G = alpha * I_cc with relative noise."""

    alpha: float = 1.0  # siemens per ampere of compliance current
    sigma_prog: float = 0.05  # relative programming noise, per SET pulse
    sigma_read: float = 0.01  # relative read noise, per verify read
    g_min: float = 1e-6  # siemens
    g_max: float = 100e-6  # siemens

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.sigma_prog < 0 or self.sigma_read < 0:
            raise ValueError("noise sigmas must be >= 0")
        if not (0 < self.g_min < self.g_max):
            raise ValueError("need 0 < g_min < g_max")


@dataclass(frozen=True)
class PVConfig:
    """Program-and-verify loop settings."""

    i_cc0: float = 5e-6  # initial compliance current, amperes
    delta_icc: float = 1e-6  # per-iteration increment, amperes
    g_th_fraction: float = 0.95  # stop when read G >= fraction * target
    max_iters: int = 1000

    def __post_init__(self):
        if self.i_cc0 <= 0 or self.delta_icc <= 0:
            raise ValueError("i_cc0 and delta_icc must be > 0")
        if not (0 < self.g_th_fraction <= 1):
            raise ValueError("g_th_fraction must be in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class CrosspointColumn:
    """Programmed conductances plus the threshold current of the comparator."""

    conductances: np.ndarray  # siemens, achieved values
    i_th: float  # amperes
    weight_scale: float  # siemens per weight unit

    def __post_init__(self):
        self.conductances = np.asarray(self.conductances, dtype=float)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(
                {
                    "conductances": self.conductances.tolist(),
                    "i_th": self.i_th,
                    "weight_scale": self.weight_scale,
                },
                fh,
                indent=2,
                sort_keys=True,
            )

    @classmethod
    def from_json(cls, path) -> "CrosspointColumn":
        with open(path) as fh:
            doc = json.load(fh)
        return cls(
            conductances=np.asarray(doc["conductances"], dtype=float),
            i_th=float(doc["i_th"]),
            weight_scale=float(doc["weight_scale"]),
        )


def map_weights(readout: LinearReadout, dev: DeviceProgramModel):
    """Scale surviving weights onto [g_min, g_max] conductance targets.

    With scale s = g_max / max(w), targets G_j = s * w_j and threshold
    i_th = -s * b, so sign(sum G_j x_j - i_th) = sign(w.x + b) exactly.
    """
    w = readout.weights[readout.active_mask]
    if len(w) == 0:
        raise ValueError("readout has no surviving features")
    if np.any(w <= 0):
        raise NegativeWeightError(
            "surviving weights must be strictly positive for the single-column "
            "scheme; retrain or use a differential mapping"
        )
    scale = dev.g_max / float(np.max(w))
    targets = scale * w
    if np.any(targets < dev.g_min):
        raise ValueError(
            f"scaled conductance {targets.min():.3e} S falls below g_min = {dev.g_min:.3e} S"
        )
    i_th = -scale * readout.bias
    return targets, i_th, scale


def program_and_verify(
    target_g: float,
    dev: DeviceProgramModel,
    pv: PVConfig,
    seed: int = 0,
    trace: Optional[list] = None,
):
    """Iteratively raise I_cc until the verify read crosses the threshold.

    Each iteration applies one SET pulse (G = alpha * I_cc with fresh
    programming noise) and one noisy verify read.  Returns
    (achieved true conductance, number of increments, relative error).
    ``trace`` collects (iteration, i_cc, read_g) tuples when provided.
    """
    if not (0 < target_g <= dev.g_max):
        raise ValueError(f"target_g must lie in (0, {dev.g_max:g}] S, got {target_g!r}")
    rng = np.random.default_rng(seed)
    i_cc = pv.i_cc0
    threshold = pv.g_th_fraction * target_g
    for k in range(pv.max_iters):
        g_true = dev.alpha * i_cc * (1.0 + rng.normal(0.0, dev.sigma_prog))
        g_true = float(np.clip(g_true, dev.g_min, dev.g_max))
        g_read = g_true * (1.0 + rng.normal(0.0, dev.sigma_read))
        if trace is not None:
            trace.append((k, i_cc, g_read))
        if g_read >= threshold:
            rel_err = abs(g_true - target_g) / target_g
            return g_true, k, rel_err
        i_cc += pv.delta_icc
    raise ProgrammingError(
        f"verify read never reached {threshold:.3e} S within {pv.max_iters} iterations"
    )


def program_column(
    readout: LinearReadout,
    dev: DeviceProgramModel,
    pv: PVConfig,
    seed: int = 0,
):
    """Map and program all devices of a column.

    Returns (column, per-device traces); device j is programmed with the
    sub-seed seed + j, so the column is reproducible.
    """
    targets, i_th, scale = map_weights(readout, dev)
    achieved = np.empty(len(targets))
    traces = []
    for j, tg in enumerate(targets):
        tr: list = []
        achieved[j], _, _ = program_and_verify(tg, dev, pv, seed=seed + j, trace=tr)
        traces.append(tr)
    return CrosspointColumn(conductances=achieved, i_th=i_th, weight_scale=scale), traces


def mac_infer(column: CrosspointColumn, x: Sequence[float]):
    """Column multiply-accumulate: i_out = sum(G_j * x_j); class by threshold."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(column.conductances):
        raise ValueError(
            f"input length {x.shape[-1]} != column size {len(column.conductances)}"
        )
    i_out = x @ column.conductances
    cls = (i_out >= column.i_th).astype(int)
    if np.isscalar(i_out) or i_out.ndim == 0:
        return float(i_out), int(cls)
    return i_out, cls


def column_accuracy(column: CrosspointColumn, readout: LinearReadout, X, y) -> float:
    """Classification accuracy of the column on pruned-feature samples."""
    X = np.asarray(X, dtype=float)
    Xk = X[:, readout.active_mask]
    _, pred = mac_infer(column, Xk)
    y01 = (np.asarray(y) > 0).astype(int)
    return float(np.mean(pred == y01))
