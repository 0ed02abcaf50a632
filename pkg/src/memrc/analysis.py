"""Dynamical characterization: extrema, orbit periodicity, bifurcation, divergence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .circuit import (
    CircuitParams,
    DEFAULT_DT,
    Trajectory,
    drive_step_values,
    initialize_state,
    integrate_steps,
)
from .memristor import MemristorIV
from .waveform import DEFAULT_PERIOD, square_drive

DEFAULT_HYSTERESIS_EPS = 2e-3  # volts, matched to the measurement-noise scale
DEFAULT_CLUSTER_EPS = 2e-3  # volts
MAX_PERIOD = 8  # periodicity search horizon, in drive periods

SWEEP_PERIODS = 40
SWEEP_DISCARD = 15


@dataclass(frozen=True)
class Extremum:
    t: float
    v: float
    kind: str  # "max" | "min"


@dataclass(frozen=True)
class ExtremaSet:
    points: tuple
    hysteresis_eps: float

    def __post_init__(self):
        kinds = [p.kind for p in self.points]
        for a, b in zip(kinds, kinds[1:]):
            if a == b:
                raise ValueError("extrema kinds must alternate")

    def maxima(self) -> List[Extremum]:
        return [p for p in self.points if p.kind == "max"]

    def minima(self) -> List[Extremum]:
        return [p for p in self.points if p.kind == "min"]


@dataclass(frozen=True)
class OrbitClass:
    """Period(n) when the per-period extrema pattern repeats, else aperiodic."""

    period: Optional[int]  # None = aperiodic
    cluster_eps: float

    @property
    def is_periodic(self) -> bool:
        return self.period is not None


@dataclass(frozen=True)
class BifurcationPoint:
    amplitude: float  # drive amplitude, volts
    v: float  # extremum value, volts
    kind: str


def local_extrema(
    traj: Trajectory,
    discard_periods: int,
    hysteresis_eps: float = DEFAULT_HYSTERESIS_EPS,
    drive_period: float = DEFAULT_PERIOD,
    start_time: float = 0.0,
) -> ExtremaSet:
    """Direction-reversal extrema of v after discarding initial drive periods.

    A reversal is registered only once the signal retreats from the running
    candidate by more than hysteresis_eps, which suppresses noise-induced
    micro-extrema.  ``start_time`` offsets the discard window (e.g. to the
    beginning of the data segment).
    """
    t0 = start_time + discard_periods * drive_period
    if t0 >= traj.t[-1]:
        raise ValueError("trajectory does not span the discard window")
    sel = traj.t >= t0 - 1e-12 * traj.t[-1]
    t = traj.t[sel]
    v = traj.v[sel]

    points: List[Extremum] = []
    direction = 0  # +1 climbing, -1 descending, 0 undetermined
    cand_v = v[0]
    cand_t = t[0]
    for k in range(1, len(v)):
        if direction >= 0:
            if v[k] >= cand_v:
                cand_v, cand_t = v[k], t[k]
            elif cand_v - v[k] > hysteresis_eps:
                # An undetermined-direction candidate still at the first
                # sample is a window edge, not an interior maximum.
                if direction > 0 or cand_t > t[0]:
                    points.append(Extremum(t=cand_t, v=cand_v, kind="max"))
                direction = -1
                cand_v, cand_t = v[k], t[k]
        if direction < 0:
            if v[k] <= cand_v:
                cand_v, cand_t = v[k], t[k]
            elif v[k] - cand_v > hysteresis_eps:
                points.append(Extremum(t=cand_t, v=cand_v, kind="min"))
                direction = 1
                cand_v, cand_t = v[k], t[k]
    return ExtremaSet(points=tuple(points), hysteresis_eps=hysteresis_eps)


def _cluster_ids(values: np.ndarray, eps: float) -> np.ndarray:
    """Greedy 1-D clustering: ids in ascending value order, gap > eps splits."""
    if len(values) == 0:
        return np.empty(0, dtype=int)
    order = np.argsort(values)
    ids = np.empty(len(values), dtype=int)
    current = 0
    anchor = values[order[0]]
    for pos in order:
        if values[pos] - anchor > eps:
            current += 1
            anchor = values[pos]
        ids[pos] = current
    return ids


def cluster_count(values, eps: float = DEFAULT_CLUSTER_EPS) -> int:
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return 0
    return int(_cluster_ids(values, eps).max()) + 1


def classify_orbit(
    ext: ExtremaSet,
    drive_period: float,
    cluster_eps: float = DEFAULT_CLUSTER_EPS,
) -> OrbitClass:
    """Classify the orbit from the per-drive-period pattern of maxima.

    Maxima are clustered by value; each drive period gets the tuple of
    cluster ids of its maxima in time order.  The smallest n <= 8 under
    which the period signatures repeat exactly (with at least two full
    repetitions) is reported; none qualifies -> aperiodic.
    """
    maxima = ext.maxima()
    if len(ext.points) < 6:
        raise ValueError("need at least 6 extrema to classify an orbit")
    values = np.array([p.v for p in maxima])
    times = np.array([p.t for p in maxima])
    ids = _cluster_ids(values, cluster_eps)
    t_start = times[0]
    period_index = np.floor((times - t_start) / drive_period + 1e-9).astype(int)
    n_periods = period_index.max() + 1
    signatures = [tuple() for _ in range(n_periods)]
    for pid, cid in zip(period_index, ids):
        signatures[pid] = signatures[pid] + (int(cid),)
    # Drop possibly-partial edge periods.
    signatures = signatures[1:-1]
    for n in range(1, MAX_PERIOD + 1):
        if len(signatures) < 2 * n + 1:
            break
        if all(signatures[k] == signatures[k + n] for k in range(len(signatures) - n)):
            return OrbitClass(period=n, cluster_eps=cluster_eps)
    return OrbitClass(period=None, cluster_eps=cluster_eps)


def bifurcation_sweep(
    amplitudes: Sequence[float],
    params: CircuitParams,
    model: MemristorIV,
    n_periods: int = SWEEP_PERIODS,
    discard: int = SWEEP_DISCARD,
    hysteresis_eps: float = DEFAULT_HYSTERESIS_EPS,
    drive_period: float = DEFAULT_PERIOD,
    offset: float = 0.0,
    dt: float = DEFAULT_DT,
) -> List[BifurcationPoint]:
    """Steady-state extrema versus drive amplitude, one batched integration.

    Every amplitude starts from the +1 initialization state; the first
    ``discard`` drive periods are dropped before extrema collection.
    Results are ordered by amplitude, then time.
    """
    amplitudes = list(amplitudes)
    if not amplitudes:
        raise ValueError("empty amplitude list")
    init = initialize_state(+1, params, model, dt=dt)
    drives = [square_drive(a, n_periods, period=drive_period, offset=offset)
              for a in amplitudes]
    u_steps = np.stack([drive_step_values(d, dt) for d in drives], axis=1)
    v_hist, i_hist = integrate_steps(u_steps, init.v, init.i, params, model, dt)
    n_steps = u_steps.shape[0]
    t = np.arange(n_steps + 1) * dt
    points: List[BifurcationPoint] = []
    for j, amp in enumerate(amplitudes):
        traj = Trajectory(t=t, u=u_steps[np.minimum(np.arange(n_steps + 1), n_steps - 1), j],
                          v=v_hist[:, j], i=i_hist[:, j])
        ext = local_extrema(traj, discard, hysteresis_eps, drive_period)
        for p in ext.points:
            points.append(BifurcationPoint(amplitude=amp, v=p.v, kind=p.kind))
    return points


def divergence_time(a: Trajectory, b: Trajectory, threshold: float) -> Optional[float]:
    """First time |v_a - v_b| exceeds the threshold; None if never."""
    if len(a.t) != len(b.t) or np.any(np.abs(a.t - b.t) > 1e-12 * max(a.t[-1], 1e-30)):
        raise ValueError("trajectories must share the time grid")
    sep = np.abs(a.v - b.v)
    over = sep > threshold
    if not np.any(over):
        return None
    return float(a.t[int(np.argmax(over))])
