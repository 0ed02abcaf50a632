"""Drive-waveform construction and input encoding.

A waveform is an ordered list of piecewise segments: constant pulses and
50%-duty square waves (value = offset +/- amplitude/2, switching every
half-period).  Encoders map bit words to square-wave amplitudes (static
tasks) and bit streams to one amplitude-modulated period per bit
(temporal tasks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

# Initialization protocol constants: 0.5 ms pulse of +/-0.2 V, then a
# settling gap at zero drive so the data segment starts from equilibrium.
INIT_PULSE_AMPLITUDE = 0.2
INIT_PULSE_DURATION = 0.5e-3
SETTLE_DURATION = 2.0e-3

# Default drive period.
DEFAULT_PERIOD = 1.134e-3

_REL_TOL = 1e-9


def _is_multiple(duration: float, unit: float) -> bool:
    n = duration / unit
    return abs(n - round(n)) <= _REL_TOL * max(n, 1.0)


@dataclass(frozen=True)
class Segment:
    """One piece of a drive waveform.

    ``pulse``: constant value = amplitude over the whole duration.
    ``square``: value = offset + amplitude/2 on the first half of each
    period and offset - amplitude/2 on the second half.
    """

    kind: str  # "pulse" | "square"
    amplitude: float
    duration: float
    offset: float = 0.0
    period: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("pulse", "square"):
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be positive, got {self.duration!r}")
        if self.kind == "square":
            if self.period is None or not (math.isfinite(self.period) and self.period > 0):
                raise ValueError("square segment requires a positive period")
            if not _is_multiple(self.duration, self.period):
                raise ValueError(
                    f"square duration {self.duration:g} s is not an integer "
                    f"multiple of the period {self.period:g} s"
                )

    def value(self, tau):
        """Segment value at local time tau in [0, duration), vectorized."""
        tau = np.asarray(tau, dtype=float)
        if self.kind == "pulse":
            return np.broadcast_to(np.float64(self.amplitude), tau.shape).copy()
        phase = np.mod(tau / self.period, 1.0)
        half = np.where(phase < 0.5, 0.5, -0.5)
        return self.offset + half * self.amplitude

    def jump_times(self) -> np.ndarray:
        """Internal discontinuity times, local to the segment."""
        if self.kind == "pulse":
            return np.empty(0)
        n_half = int(round(self.duration / (self.period / 2.0)))
        return np.arange(1, n_half) * (self.period / 2.0)


@dataclass(frozen=True)
class Waveform:
    """Ordered segments; u(t) defined for all t in [0, duration]."""

    segments: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def _boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def sample(self, t, side: str = "right"):
        """Evaluate u(t), vectorized.

        ``side`` selects the convention at discontinuities: "right" takes the
        value on [t, ...), "left" the value on (..., t].  At t == duration the
        left limit is always used.  Out-of-range t raises ValueError.
        """
        if not self.segments:
            raise ValueError("empty waveform")
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        t = np.asarray(t, dtype=float)
        total = self.duration
        if np.any(t < -_REL_TOL * total) or np.any(t > total * (1 + _REL_TOL)):
            raise ValueError(f"sample time outside [0, {total:g}] s")
        bounds = self._boundaries()
        # Nudge the query time to resolve discontinuities on the requested
        # side, then evaluate at the nudged time.  t == duration always takes
        # the left limit (there is no segment to the right).
        eps = _REL_TOL * max(total, 1.0)
        tq = t - eps if side == "left" else t + eps
        tq = np.clip(tq, 0.0, total - eps)
        idx = np.clip(np.searchsorted(bounds, tq, side="right") - 1, 0, len(self.segments) - 1)
        tq_flat = np.atleast_1d(tq)
        idx_flat = np.atleast_1d(idx)
        out = np.empty(tq_flat.shape, dtype=float)
        for k, seg in enumerate(self.segments):
            m = idx_flat == k
            if np.any(m):
                out[m] = seg.value(tq_flat[m] - bounds[k])
        return out[0] if t.ndim == 0 else out.reshape(t.shape)

    def jump_times(self) -> np.ndarray:
        """All discontinuity times: segment boundaries plus square switching."""
        bounds = self._boundaries()
        times = [bounds[1:-1]]
        for k, seg in enumerate(self.segments):
            times.append(bounds[k] + seg.jump_times())
        return np.unique(np.concatenate(times)) if times else np.empty(0)

    def concat(self, other: "Waveform") -> "Waveform":
        return Waveform(self.segments + other.segments)

    def to_csv(self, path, dt: float) -> None:
        """Write the sampled waveform as ``t,u`` rows."""
        n = int(round(self.duration / dt))
        t = np.arange(n + 1) * dt
        u = self.sample(t)
        with open(path, "w") as fh:
            fh.write("t,u\n")
            for tk, uk in zip(t, u):
                fh.write(f"{tk:.12g},{uk:.12g}\n")


@dataclass(frozen=True)
class AmplitudeTable:
    """Map from a big-endian bit-word index to a drive amplitude in volts."""

    n_bits: int
    amplitudes: tuple

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        if len(self.amplitudes) != 2**self.n_bits:
            raise ValueError(
                f"need {2**self.n_bits} amplitudes for {self.n_bits} bits, "
                f"got {len(self.amplitudes)}"
            )
        diffs = np.diff(self.amplitudes)
        if len(diffs) and not np.all(diffs > 0):
            raise ValueError("amplitudes must be strictly increasing")


def amplitude_table(
    n_bits: int,
    u_min: Optional[float] = None,
    u_max: Optional[float] = None,
    explicit: Optional[Sequence[float]] = None,
) -> AmplitudeTable:
    """Linear index->amplitude table over [u_min, u_max], or an explicit list."""
    if not (1 <= n_bits <= 8):
        raise ValueError(f"n_bits must be in [1, 8], got {n_bits}")
    if explicit is not None:
        return AmplitudeTable(n_bits, tuple(explicit))
    if u_min is None or u_max is None or not (u_min < u_max):
        raise ValueError("need u_min < u_max when no explicit table is given")
    n = 2**n_bits
    amps = tuple(u_min + k * (u_max - u_min) / (n - 1) for k in range(n))
    return AmplitudeTable(n_bits, amps)


def word_index(word: Sequence[int]) -> int:
    """Big-endian bit list to integer, e.g. [1, 0] -> 2."""
    idx = 0
    for b in word:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {b!r}")
        idx = (idx << 1) | b
    return idx


def encode_word(word: Sequence[int], table: AmplitudeTable) -> float:
    """Amplitude encoding one bit word."""
    if len(word) != table.n_bits:
        raise ValueError(f"word length {len(word)} != table n_bits {table.n_bits}")
    return table.amplitudes[word_index(word)]


def encode_stream(
    bits: Sequence[int],
    u_low: float,
    u_high: float,
    offset: float,
    period: float = DEFAULT_PERIOD,
) -> Waveform:
    """One square period per bit: amplitude u_low / u_high, constant offset."""
    if len(bits) == 0:
        raise ValueError("empty bit stream")
    if period <= 0:
        raise ValueError("period must be positive")
    segments = []
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {b!r}")
        amp = u_high if b else u_low
        segments.append(
            Segment(kind="square", amplitude=amp, duration=period, offset=offset, period=period)
        )
    return Waveform(tuple(segments))


def square_drive(
    amplitude: float,
    n_periods: int,
    period: float = DEFAULT_PERIOD,
    offset: float = 0.0,
) -> Waveform:
    """Constant-amplitude square wave of n_periods periods."""
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    seg = Segment(
        kind="square",
        amplitude=amplitude,
        duration=n_periods * period,
        offset=offset,
        period=period,
    )
    return Waveform((seg,))


def build_drive(init_polarity: int, data: Optional[Waveform]) -> Waveform:
    """Initialization pulse + settling gap + data segment.

    The +/-0.2 V, 0.5 ms pulse parks the circuit at the equilibrium of the
    requested sign; the 2 ms zero-drive gap lets transients die out before
    the data segment starts.
    """
    if init_polarity not in (+1, -1):
        raise ValueError(f"init_polarity must be +1 or -1, got {init_polarity!r}")
    head = (
        Segment(kind="pulse", amplitude=init_polarity * INIT_PULSE_AMPLITUDE,
                duration=INIT_PULSE_DURATION),
        Segment(kind="pulse", amplitude=0.0, duration=SETTLE_DURATION),
    )
    if data is None or not data.segments:
        return Waveform(head)
    return Waveform(head + data.segments)


def data_start_time() -> float:
    """Time at which the data segment of a built drive begins."""
    return INIT_PULSE_DURATION + SETTLE_DURATION
