"""Experiment pipeline: drive the circuit, sample features, attach Boolean targets.

Static tasks encode a whole bit word into one square-wave amplitude and use
the sampled output trace as the feature vector.  Stream tasks encode one bit
per drive period and slice the output into per-period feature blocks with
sliding-window Boolean targets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from itertools import product
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .circuit import CircuitParams, DEFAULT_DT, drive_step_values, integrate_steps
from .memristor import MemristorIV
from .waveform import (
    AmplitudeTable,
    DEFAULT_PERIOD,
    Waveform,
    build_drive,
    data_start_time,
    encode_stream,
    encode_word,
    square_drive,
)

UNDEFINED_LABEL = -1  # sentinel for periods whose sliding window is incomplete


def _parity(bits):
    return int(sum(bits) % 2)


def _check_arity(name, bits, arity):
    if len(bits) != arity:
        raise ValueError(f"{name} takes {arity} inputs, got {len(bits)}")


def boolean_eval(fn: str, bits: Sequence[int]) -> int:
    """Evaluate a named Boolean function on a bit list."""
    bits = list(bits)
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    name = fn.upper()
    n = len(bits)
    if name in ("AND", "OR", "XOR", "NAND", "NOR", "XNOR") and n < 2:
        raise ValueError(f"{name} needs at least 2 inputs, got {n}")
    if name == "AND":
        return int(all(bits))
    if name == "OR":
        return int(any(bits))
    if name == "XOR":
        return _parity(bits)
    if name == "NAND":
        return 1 - int(all(bits))
    if name == "NOR":
        return 1 - int(any(bits))
    if name == "XNOR":
        return 1 - _parity(bits)
    if name == "NOT_A_AND_B":
        _check_arity(name, bits, 2)
        return int(not bits[0] and bits[1])
    if name == "A_AND_NOT_B":
        _check_arity(name, bits, 2)
        return int(bits[0] and not bits[1])
    if name == "MAJ":
        if n < 3 or n % 2 == 0:
            raise ValueError(f"MAJ needs an odd number of inputs >= 3, got {n}")
        return int(sum(bits) > n // 2)
    if name == "MUX":
        _check_arity(name, bits, 3)
        s, a, b = bits
        return a if s == 0 else b
    if name == "XORAND":
        _check_arity(name, bits, 3)
        a, b, c = bits
        return (a ^ b) & c
    if name == "ANDXOR":
        _check_arity(name, bits, 3)
        a, b, c = bits
        return (a & b) ^ c
    raise ValueError(f"unknown Boolean function {fn!r}")


@dataclass(frozen=True)
class AcquisitionConfig:
    """Sampling and noise knobs for dataset acquisition."""

    samples_per_trace: int = 1000
    samples_per_period: int = 50
    periods_per_trace: int = 20
    transient_discard_periods: int = 2
    init_noise_sigma: float = 1e-3  # volts, on the pre-drive state
    meas_noise_sigma: float = 2e-3  # volts, per sample
    repetitions: int = 50
    rng_seed: int = 0
    period: float = DEFAULT_PERIOD
    dt: float = DEFAULT_DT

    def __post_init__(self):
        for name in ("samples_per_trace", "samples_per_period", "periods_per_trace",
                     "repetitions"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.transient_discard_periods < 0:
            raise ValueError("transient_discard_periods must be >= 0")
        if self.init_noise_sigma < 0 or self.meas_noise_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")


@dataclass(frozen=True)
class StreamConfig:
    """Amplitude coding of a bit stream: one square period per bit."""

    u_low: float = 0.1
    u_high: float = 0.25
    offset: float = 0.01
    period: float = DEFAULT_PERIOD


@dataclass
class StaticDataset:
    """Row-per-trial features from repeated word-encoded drives."""

    features: np.ndarray  # (n_trials, samples_per_trace)
    labels: np.ndarray  # 0/1 per trial
    words: np.ndarray  # (n_trials, n_bits)
    r_mem: float  # memristor state tag, ohms

    def __post_init__(self):
        if len(self.features) != len(self.labels) or len(self.labels) != len(self.words):
            raise ValueError("features, labels and words must have equal row counts")

    def to_csv(self, path, sidecar: Optional[dict] = None) -> None:
        n_feat = self.features.shape[1]
        header = ",".join(f"v{k}" for k in range(n_feat)) + ",label"
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row, lab in zip(self.features, self.labels):
                fh.write(",".join(f"{x:.12g}" for x in row) + f",{int(lab)}\n")
        if sidecar is not None:
            with open(str(path) + ".json", "w") as fh:
                json.dump(sidecar, fh, indent=2, sort_keys=True)


@dataclass
class StreamDataset:
    """Per-period feature blocks from one bit-stream drive."""

    features: np.ndarray  # (n_periods, samples_per_period)
    labels: np.ndarray  # 0/1 per period; UNDEFINED_LABEL while the window is short
    bits: np.ndarray  # the input stream

    def __post_init__(self):
        if len(self.features) != len(self.bits) or len(self.labels) != len(self.bits):
            raise ValueError("one feature block and one label per stream bit")

    def to_csv(self, path, sidecar: Optional[dict] = None) -> None:
        n_feat = self.features.shape[1]
        header = ",".join(f"v{k}" for k in range(n_feat)) + ",label"
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row, lab in zip(self.features, self.labels):
                fh.write(",".join(f"{x:.12g}" for x in row) + f",{int(lab)}\n")
        if sidecar is not None:
            with open(str(path) + ".json", "w") as fh:
                json.dump(sidecar, fh, indent=2, sort_keys=True)


def sliding_targets(bits: Sequence[int], fn: str, n: int) -> np.ndarray:
    """Per-period labels of the n-input sliding-window function.

    label[i] = fn(bits[i-n+1 .. i]) for i >= n-1; earlier periods get the
    UNDEFINED_LABEL sentinel.
    """
    bits = list(bits)
    if len(bits) < n:
        raise ValueError(f"stream of {len(bits)} bits is shorter than the window n = {n}")
    labels = np.full(len(bits), UNDEFINED_LABEL, dtype=int)
    for i in range(n - 1, len(bits)):
        labels[i] = boolean_eval(fn, bits[i - n + 1 : i + 1])
    return labels


def _trace_sample_indices(n_start: int, n_span: int, n_samples: int) -> np.ndarray:
    """Uniform decimation of [n_start, n_start + n_span) into n_samples indices."""
    return n_start + (np.arange(n_samples) * n_span) // n_samples


def _word_drive(word, table: AmplitudeTable, acq: AcquisitionConfig) -> Waveform:
    amp = encode_word(word, table)
    return build_drive(+1, square_drive(amp, acq.periods_per_trace, period=acq.period))


def _simulate_trials(u_steps, v0, acq, params, model):
    """Integrate a batch and return the full v history."""
    v_hist, _ = integrate_steps(u_steps, v0, 0.0, params, model, acq.dt)
    return v_hist


def run_static_trial(
    word: Sequence[int],
    table: AmplitudeTable,
    params: CircuitParams,
    model: MemristorIV,
    acq: AcquisitionConfig,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """One word-encoded drive; returns samples_per_trace values of v."""
    rng = np.random.default_rng(acq.rng_seed) if rng is None else rng
    drive = _word_drive(word, table, acq)
    u_steps = drive_step_values(drive, acq.dt)
    v0 = rng.normal(0.0, acq.init_noise_sigma) if acq.init_noise_sigma > 0 else 0.0
    v_hist = _simulate_trials(u_steps, v0, acq, params, model)
    k0 = int(round(data_start_time() / acq.dt))
    n_data = int(round(acq.periods_per_trace * acq.period / acq.dt))
    idx = _trace_sample_indices(k0, n_data, acq.samples_per_trace)
    trace = v_hist[idx]
    if acq.meas_noise_sigma > 0:
        trace = trace + rng.normal(0.0, acq.meas_noise_sigma, size=trace.shape)
    return trace


def build_static_dataset(
    fn: str,
    n_bits: int,
    table: AmplitudeTable,
    params: CircuitParams,
    model: MemristorIV,
    acq: AcquisitionConfig,
) -> StaticDataset:
    """repetitions trials per word, batched integration, deterministic order.

    Rows are ordered word-index-major, repetition-minor; all randomness comes
    from acq.rng_seed.
    """
    if table.n_bits != n_bits:
        raise ValueError("table n_bits does not match the requested word length")
    words = [list(w) for w in product((0, 1), repeat=n_bits)]
    labels_per_word = [boolean_eval(fn, w) for w in words]
    rng = np.random.default_rng(acq.rng_seed)
    n_trials = len(words) * acq.repetitions

    # Per-word drive patterns share the grid; stack trials along the batch axis.
    u_words = np.stack(
        [drive_step_values(_word_drive(w, table, acq), acq.dt) for w in words], axis=1
    )
    trial_word = np.repeat(np.arange(len(words)), acq.repetitions)
    u_steps = u_words[:, trial_word]
    v0 = rng.normal(0.0, acq.init_noise_sigma, size=n_trials) if acq.init_noise_sigma > 0 \
        else np.zeros(n_trials)
    v_hist = _simulate_trials(u_steps, v0, acq, params, model)

    k0 = int(round(data_start_time() / acq.dt))
    n_data = int(round(acq.periods_per_trace * acq.period / acq.dt))
    idx = _trace_sample_indices(k0, n_data, acq.samples_per_trace)
    features = v_hist[idx].T.copy()  # (n_trials, samples_per_trace)
    if acq.meas_noise_sigma > 0:
        features += rng.normal(0.0, acq.meas_noise_sigma, size=features.shape)

    labels = np.array([labels_per_word[k] for k in trial_word], dtype=int)
    word_rows = np.array([words[k] for k in trial_word], dtype=int)
    return StaticDataset(
        features=features, labels=labels, words=word_rows, r_mem=model.state.r_low_voltage
    )


def run_stream_trial(
    bits: Sequence[int],
    params: CircuitParams,
    model: MemristorIV,
    acq: AcquisitionConfig,
    stream_cfg: StreamConfig,
    rng: Optional[np.random.Generator] = None,
    fn: Optional[str] = None,
    n_inputs: Optional[int] = None,
) -> StreamDataset:
    """Drive one bit stream and slice the output into per-period blocks.

    When ``fn``/``n_inputs`` are given, sliding-window labels are attached;
    otherwise all labels are left undefined.
    """
    bits = list(bits)
    rng = np.random.default_rng(acq.rng_seed) if rng is None else rng
    data = encode_stream(bits, stream_cfg.u_low, stream_cfg.u_high,
                         stream_cfg.offset, stream_cfg.period)
    drive = build_drive(+1, data)
    u_steps = drive_step_values(drive, acq.dt)
    v0 = rng.normal(0.0, acq.init_noise_sigma) if acq.init_noise_sigma > 0 else 0.0
    v_hist = _simulate_trials(u_steps, v0, acq, params, model)

    k0 = int(round(data_start_time() / acq.dt))
    steps_per_period = int(round(stream_cfg.period / acq.dt))
    blocks = np.empty((len(bits), acq.samples_per_period))
    for j in range(len(bits)):
        idx = _trace_sample_indices(k0 + j * steps_per_period, steps_per_period,
                                    acq.samples_per_period)
        blocks[j] = v_hist[idx]
    if acq.meas_noise_sigma > 0:
        blocks += rng.normal(0.0, acq.meas_noise_sigma, size=blocks.shape)

    if fn is not None and n_inputs is not None:
        labels = sliding_targets(bits, fn, n_inputs)
    else:
        labels = np.full(len(bits), UNDEFINED_LABEL, dtype=int)
    return StreamDataset(features=blocks, labels=labels, bits=np.asarray(bits, dtype=int))


def build_stream_dataset(
    n_streams: int,
    stream_length: int,
    fn: str,
    n_inputs: int,
    params: CircuitParams,
    model: MemristorIV,
    acq: AcquisitionConfig,
    stream_cfg: StreamConfig,
):
    """Random bit streams, batched integration; returns stacked blocks.

    Returns (features, labels, stream_ids, bit_streams): rows are periods
    with defined labels only, ordered stream-major then period.
    """
    if stream_length < n_inputs:
        raise ValueError("streams shorter than the function window")
    rng = np.random.default_rng(acq.rng_seed)
    streams = rng.integers(0, 2, size=(n_streams, stream_length))

    drives = [
        build_drive(+1, encode_stream(list(s), stream_cfg.u_low, stream_cfg.u_high,
                                      stream_cfg.offset, stream_cfg.period))
        for s in streams
    ]
    u_steps = np.stack([drive_step_values(d, acq.dt) for d in drives], axis=1)
    v0 = rng.normal(0.0, acq.init_noise_sigma, size=n_streams) if acq.init_noise_sigma > 0 \
        else np.zeros(n_streams)
    v_hist = _simulate_trials(u_steps, v0, acq, params, model)

    k0 = int(round(data_start_time() / acq.dt))
    steps_per_period = int(round(stream_cfg.period / acq.dt))
    feats, labs, sids = [], [], []
    for s_idx in range(n_streams):
        labels = sliding_targets(list(streams[s_idx]), fn, n_inputs)
        blocks = np.empty((stream_length, acq.samples_per_period))
        for j in range(stream_length):
            idx = _trace_sample_indices(k0 + j * steps_per_period, steps_per_period,
                                        acq.samples_per_period)
            blocks[j] = v_hist[idx, s_idx]
        if acq.meas_noise_sigma > 0:
            blocks += rng.normal(0.0, acq.meas_noise_sigma, size=blocks.shape)
        defined = labels != UNDEFINED_LABEL
        discard = max(acq.transient_discard_periods, n_inputs - 1)
        defined[:discard] = False
        feats.append(blocks[defined])
        labs.append(labels[defined])
        sids.append(np.full(defined.sum(), s_idx))
    return (
        np.concatenate(feats, axis=0),
        np.concatenate(labs, axis=0),
        np.concatenate(sids, axis=0),
        streams,
    )


class CircuitReservoir(BaseEstimator, TransformerMixin):
    """sklearn-style featurizer: bit words in, sampled output traces out.

    ``transform`` drives one trial per input row (a bit word) and returns the
    samples_per_trace feature matrix, so the reservoir composes with sklearn
    pipelines and the readout estimators.  Stateless apart from the RNG seed;
    ``fit`` only validates the inputs.
    """

    def __init__(self, table=None, params=None, model=None, acq=None):
        self.table = table
        self.params = params
        self.model = model
        self.acq = acq

    def _check_ready(self):
        if any(x is None for x in (self.table, self.params, self.model, self.acq)):
            raise ValueError("table, params, model and acq must all be set")

    def fit(self, X, y=None):
        self._check_ready()
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.table.n_bits:
            raise ValueError(f"X must be (n_words, {self.table.n_bits}) bit rows")
        return self

    def transform(self, X):
        self._check_ready()
        X = np.asarray(X, dtype=int)
        if X.ndim != 2 or X.shape[1] != self.table.n_bits:
            raise ValueError(f"X must be (n_words, {self.table.n_bits}) bit rows")
        rng = np.random.default_rng(self.acq.rng_seed)
        rows = [
            run_static_trial(list(w), self.table, self.params, self.model, self.acq, rng)
            for w in X
        ]
        return np.stack(rows, axis=0)
