"""Experiment configuration: YAML/JSON schema, strict validation, hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import yaml

from .circuit import CircuitParams, size_circuit
from .memristor import MemristorState, build_model
from .readout import TrainConfig
from .reservoir import AcquisitionConfig, StreamConfig
from .crosspoint import DeviceProgramModel, PVConfig
from .waveform import AmplitudeTable, amplitude_table


class ConfigError(ValueError):
    """Malformed or invalid experiment configuration."""


def _require_keys(section: dict, name: str, allowed: set, required: set = frozenset()):
    if not isinstance(section, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"missing keys in {name!r}: {sorted(missing)}")


@dataclass
class ExperimentConfig:
    """Parsed and validated experiment file."""

    raw: Dict[str, Any]
    seed: int
    out_dir: str
    r_low_voltage: float
    rho: float
    circuit: CircuitParams
    acquisition: AcquisitionConfig
    train: TrainConfig
    table: Optional[AmplitudeTable]
    stream: Optional[StreamConfig]
    n_streams: int
    stream_length: int
    amplitudes: List[float]
    memristor_states: List[float]
    functions: List[str]
    stream_functions: List[dict]
    keep_m: Optional[int]
    ablation_amplitude_only: bool
    device: DeviceProgramModel
    pv: PVConfig

    def memristor_model(self, r: Optional[float] = None):
        return build_model(MemristorState(r if r is not None else self.r_low_voltage),
                           self.rho)

    def sha256(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


_TOP_KEYS = {
    "seed", "out_dir", "memristor", "circuit", "acquisition", "train", "table",
    "stream", "sweep", "functions", "stream_functions", "prune",
    "ablation_amplitude_only", "crosspoint",
}


def _parse_circuit(section: dict) -> CircuitParams:
    keys = set(section)
    if {"R", "L", "G_N"} <= keys:
        _require_keys(section, "circuit", {"C", "R", "L", "G_N"}, {"C", "R", "L", "G_N"})
        return CircuitParams(C=float(section["C"]), R=float(section["R"]),
                             L=float(section["L"]), G_N=float(section["G_N"]))
    _require_keys(section, "circuit", {"C", "k", "g_max"}, {"C", "k", "g_max"})
    return size_circuit(float(section["g_max"]), float(section["k"]), float(section["C"]))


def _parse_table(section: Optional[dict]) -> Optional[AmplitudeTable]:
    if section is None:
        return None
    _require_keys(section, "table", {"n_bits", "u_min", "u_max", "explicit"}, {"n_bits"})
    return amplitude_table(
        int(section["n_bits"]),
        u_min=section.get("u_min"),
        u_max=section.get("u_max"),
        explicit=section.get("explicit"),
    )


def load_config(path) -> ExperimentConfig:
    """Read a YAML (or JSON, a YAML subset) config file and validate it."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return parse_config(raw)


def parse_config(raw: Dict[str, Any]) -> ExperimentConfig:
    _require_keys(raw, "<root>", _TOP_KEYS, {"memristor", "circuit"})

    mem = raw["memristor"]
    _require_keys(mem, "memristor", {"r_low_voltage", "rho"}, {"r_low_voltage"})
    r_low = float(mem["r_low_voltage"])
    rho = float(mem.get("rho", 0.5))

    circuit = _parse_circuit(raw["circuit"])

    acq_raw = dict(raw.get("acquisition") or {})
    _require_keys(acq_raw, "acquisition", {
        "samples_per_trace", "samples_per_period", "periods_per_trace",
        "transient_discard_periods", "init_noise_sigma", "meas_noise_sigma",
        "repetitions", "rng_seed", "period", "dt",
    })
    seed = int(raw.get("seed", 0))
    acq_raw.setdefault("rng_seed", seed)
    try:
        acquisition = AcquisitionConfig(**acq_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    train_raw = dict(raw.get("train") or {})
    _require_keys(train_raw, "train", {
        "method", "ridge_lambda", "svm_c", "svm_epochs", "split", "split_seed",
    })
    try:
        train = TrainConfig(**train_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    table = _parse_table(raw.get("table"))

    stream_raw = raw.get("stream")
    stream = None
    n_streams, stream_length = 20, 30
    if stream_raw is not None:
        _require_keys(stream_raw, "stream", {
            "u_low", "u_high", "offset", "period", "n_streams", "stream_length",
        })
        sr = dict(stream_raw)
        n_streams = int(sr.pop("n_streams", 20))
        stream_length = int(sr.pop("stream_length", 30))
        stream = StreamConfig(**{k: float(v) for k, v in sr.items()})

    sweep = raw.get("sweep") or {}
    _require_keys(sweep, "sweep", {"amplitudes", "memristor_states"})
    amplitudes = [float(a) for a in sweep.get("amplitudes", [])]
    states = [float(r) for r in sweep.get("memristor_states", [r_low])]

    functions = list(raw.get("functions", []))
    stream_functions = list(raw.get("stream_functions", []))
    for sf in stream_functions:
        _require_keys(sf, "stream_functions[]", {"name", "n"}, {"name", "n"})

    prune = raw.get("prune") or {}
    _require_keys(prune, "prune", {"keep_m"})
    keep_m = int(prune["keep_m"]) if "keep_m" in prune else None

    cp = raw.get("crosspoint") or {}
    _require_keys(cp, "crosspoint", {"device", "pv"})
    dev_raw = cp.get("device") or {}
    _require_keys(dev_raw, "crosspoint.device",
                  {"alpha", "sigma_prog", "sigma_read", "g_min", "g_max"})
    pv_raw = cp.get("pv") or {}
    _require_keys(pv_raw, "crosspoint.pv",
                  {"i_cc0", "delta_icc", "g_th_fraction", "max_iters"})
    try:
        device = DeviceProgramModel(**{k: float(v) for k, v in dev_raw.items()})
        pv_kwargs = {k: (int(v) if k == "max_iters" else float(v)) for k, v in pv_raw.items()}
        pv = PVConfig(**pv_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    try:
        cfg = ExperimentConfig(
            raw=raw,
            seed=seed,
            out_dir=str(raw.get("out_dir", "results")),
            r_low_voltage=r_low,
            rho=rho,
            circuit=circuit,
            acquisition=acquisition,
            train=train,
            table=table,
            stream=stream,
            n_streams=n_streams,
            stream_length=stream_length,
            amplitudes=amplitudes,
            memristor_states=states,
            functions=functions,
            stream_functions=stream_functions,
            keep_m=keep_m,
            ablation_amplitude_only=bool(raw.get("ablation_amplitude_only", False)),
            device=device,
            pv=pv,
        )
        # Construct once to surface invariant violations early.
        cfg.memristor_model()
        for r in states:
            build_model(MemristorState(r), rho)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg
