"""Command-line front end: sweep orchestration and CSV/JSON artifact emission.

Exit codes: 0 success, 2 config/user error, 3 numerical failure,
4 degenerate data, 5 unsupported weight mapping.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import bifurcation_sweep
from .circuit import IntegrationError
from .config import ConfigError, ExperimentConfig, load_config
from .crosspoint import NegativeWeightError, column_accuracy, program_column
from .readout import (
    LinearReadout,
    evaluate,
    prune_retrain,
    train_ridge,
    train_svm,
    train_val_split,
)
from .reservoir import boolean_eval, build_static_dataset, build_stream_dataset
from .waveform import word_index

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DEGENERATE = 4
EXIT_MAPPING = 5

MANIFEST_SCHEMA_VERSION = 1


class DegenerateDataError(RuntimeError):
    """Dataset ended up single-class; nothing to train."""


def _resolve_out(cfg: ExperimentConfig, out: str | None) -> Path:
    out_dir = out or os.environ.get("MEMRC_OUT") or cfg.out_dir
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _apply_seed(cfg: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    if seed is None:
        return cfg
    raw = dict(cfg.raw)
    raw["seed"] = int(seed)
    acq = dict(raw.get("acquisition") or {})
    acq["rng_seed"] = int(seed)
    raw["acquisition"] = acq
    from .config import parse_config

    return parse_config(raw)


def _write_manifest(out: Path, command: str, cfg: ExperimentConfig, outputs: list) -> None:
    doc = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "command": command,
        "package_version": __version__,
        "config": cfg.raw,
        "config_sha256": cfg.sha256(),
        "seed": cfg.seed,
        "outputs": sorted(outputs),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def _trainers(cfg: ExperimentConfig):
    tc = cfg.train
    if tc.method == "ridge":
        return [("ridge", lambda X, y: train_ridge(X, y, tc.ridge_lambda))]
    return [("svm", lambda X, y: train_svm(X, y, tc.svm_c, tc.svm_epochs, tc.split_seed))]


def cmd_bifurcate(config_path: str, out: str | None, seed: int | None,
                  threads: int) -> int:
    cfg = _apply_seed(load_config(config_path), seed)
    if not cfg.amplitudes:
        raise ConfigError("bifurcate needs a non-empty sweep.amplitudes list")
    out_dir = _resolve_out(cfg, out)
    try:
        points = bifurcation_sweep(
            cfg.amplitudes, cfg.circuit, cfg.memristor_model(),
            drive_period=cfg.acquisition.period, dt=cfg.acquisition.dt,
        )
    except IntegrationError as exc:
        raise IntegrationError(
            f"bifurcation sweep diverged: {exc}", time=exc.time
        ) from exc
    with open(out_dir / "bifurcation.csv", "w") as fh:
        fh.write("U,v,kind\n")
        for p in points:
            fh.write(f"{p.amplitude:.12g},{p.v:.12g},{p.kind}\n")
    _write_manifest(out_dir, "bifurcate", cfg, ["bifurcation.csv"])
    click.echo(f"wrote {out_dir / 'bifurcation.csv'} ({len(points)} points)")
    return EXIT_OK


def _static_rows_for_state(cfg: ExperimentConfig, fn: str, r: float):
    if cfg.table is None:
        raise ConfigError("static task needs a 'table' section")
    model = cfg.memristor_model(r)
    ds = build_static_dataset(fn, cfg.table.n_bits, cfg.table, cfg.circuit, model,
                              cfg.acquisition)
    if len(np.unique(ds.labels)) < 2:
        raise DegenerateDataError(f"function {fn} yields a single class")
    if cfg.ablation_amplitude_only:
        amps = np.array([cfg.table.amplitudes[word_index(list(w))] for w in ds.words])
        X = amps[:, None]
    else:
        X = ds.features
    groups = ds.words @ (1 << np.arange(cfg.table.n_bits)[::-1])
    tr, va = train_val_split(groups, cfg.train.split, cfg.train.split_seed)
    rows = []
    for method, trainer in _trainers(cfg):
        readout = trainer(X[tr], ds.labels[tr])
        rows.append((fn, r, method,
                     evaluate(readout, X[tr], ds.labels[tr]),
                     evaluate(readout, X[va], ds.labels[va])))
    return rows, ds, groups


def cmd_static_task(config_path: str, out: str | None, seed: int | None,
                    threads: int) -> int:
    cfg = _apply_seed(load_config(config_path), seed)
    if not cfg.functions:
        raise ConfigError("static task needs a non-empty 'functions' list")
    if cfg.table is None:
        raise ConfigError("static task needs a 'table' section")
    for fn in cfg.functions:
        boolean_eval(fn, [0] * cfg.table.n_bits)  # validates name and arity
    out_dir = _resolve_out(cfg, out)

    jobs = [(fn, r) for fn in cfg.functions for r in cfg.memristor_states]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda j: _static_rows_for_state(cfg, *j), jobs))

    outputs = ["accuracy.csv"]
    with open(out_dir / "accuracy.csv", "w") as fh:
        fh.write("function,state,method,train_acc,val_acc\n")
        for rows, _, _ in results:
            for fn, r, method, tr_acc, va_acc in rows:
                fh.write(f"{fn},{r:.12g},{method},{tr_acc:.6f},{va_acc:.6f}\n")

    if cfg.keep_m is not None:
        # Pruning curve and persisted pruned readout for the first job.
        _, ds, groups = results[0]
        fn0 = cfg.functions[0]
        curve = []
        n_feat = ds.features.shape[1]
        for m in sorted({cfg.keep_m, 4, 8, 16, 32, 64, 128, 256, n_feat}):
            if 1 <= m <= n_feat:
                _, acc = prune_retrain(ds.features, ds.labels, cfg.train, m, groups=groups)
                curve.append((m, acc))
        with open(out_dir / "pruning_curve.csv", "w") as fh:
            fh.write("kept_weights,val_acc\n")
            for m, acc in curve:
                fh.write(f"{m},{acc:.6f}\n")
        pruned, acc = prune_retrain(ds.features, ds.labels, cfg.train, cfg.keep_m,
                                    groups=groups)
        pruned.to_json(out_dir / "readout_pruned.json", extra={
            "function": fn0,
            "n_bits": cfg.table.n_bits,
            "r_mem": cfg.memristor_states[0],
            "method": cfg.train.method,
            "val_acc": acc,
            "config_sha256": cfg.sha256(),
        })
        outputs += ["pruning_curve.csv", "readout_pruned.json"]

    _write_manifest(out_dir, "static-task", cfg, outputs)
    click.echo(f"wrote {out_dir / 'accuracy.csv'}")
    return EXIT_OK


def _stream_rows_for_state(cfg: ExperimentConfig, fn: str, n: int, r: float):
    model = cfg.memristor_model(r)
    X, y, sid, streams = build_stream_dataset(
        cfg.n_streams, cfg.stream_length, fn, n, cfg.circuit, model,
        cfg.acquisition, cfg.stream,
    )
    if len(np.unique(y)) < 2:
        raise DegenerateDataError(f"stream function {fn}{n} yields a single class")
    tr, va = train_val_split(sid, cfg.train.split, cfg.train.split_seed)
    readout = train_ridge(X[tr], y[tr], cfg.train.ridge_lambda)
    acc = evaluate(readout, X[va], y[va])
    preds = readout.predict01(X)
    return (fn, n, r, acc), (sid, y, preds)


def cmd_stream_task(config_path: str, out: str | None, seed: int | None,
                    threads: int) -> int:
    cfg = _apply_seed(load_config(config_path), seed)
    if cfg.stream is None:
        raise ConfigError("stream task needs a 'stream' section")
    if not cfg.stream_functions:
        raise ConfigError("stream task needs a non-empty 'stream_functions' list")
    for sf in cfg.stream_functions:
        if cfg.stream_length < int(sf["n"]):
            raise ConfigError(
                f"stream_length {cfg.stream_length} shorter than {sf['name']}{sf['n']}"
            )
    out_dir = _resolve_out(cfg, out)

    jobs = [(sf["name"], int(sf["n"]), r)
            for sf in cfg.stream_functions for r in cfg.memristor_states]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda j: _stream_rows_for_state(cfg, *j), jobs))

    with open(out_dir / "stream_accuracy.csv", "w") as fh:
        fh.write("function,n_inputs,r_mem,accuracy\n")
        for (fn, n, r, acc), _ in results:
            fh.write(f"{fn},{n},{r:.12g},{acc:.6f}\n")
    with open(out_dir / "stream_predictions.csv", "w") as fh:
        fh.write("function,n_inputs,r_mem,stream,row,target,predicted\n")
        for (fn, n, r, _), (sid, y, preds) in results:
            for k in range(len(y)):
                fh.write(f"{fn},{n},{r:.12g},{sid[k]},{k},{int(y[k])},{int(preds[k])}\n")
    _write_manifest(out_dir, "stream-task", cfg,
                    ["stream_accuracy.csv", "stream_predictions.csv"])
    click.echo(f"wrote {out_dir / 'stream_accuracy.csv'}")
    return EXIT_OK


def cmd_crosspoint(config_path: str, readout_path: str, out: str | None,
                   seed: int | None, threads: int) -> int:
    cfg = _apply_seed(load_config(config_path), seed)
    try:
        with open(readout_path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read readout file {readout_path}: {exc}") from exc
    for key in ("weights", "bias", "active_mask", "function", "n_bits", "r_mem"):
        if key not in doc:
            raise ConfigError(f"readout file is missing {key!r}")
    readout = LinearReadout.from_json(readout_path)
    out_dir = _resolve_out(cfg, out)

    column, traces = program_column(readout, cfg.device, cfg.pv, seed=cfg.seed)

    # Rebuild the validation set the readout was trained against.
    if cfg.table is None:
        raise ConfigError("crosspoint evaluation needs the 'table' section")
    model = cfg.memristor_model(float(doc["r_mem"]))
    ds = build_static_dataset(doc["function"], int(doc["n_bits"]), cfg.table,
                              cfg.circuit, model, cfg.acquisition)
    if len(readout.weights) != ds.features.shape[1]:
        raise ConfigError(
            f"readout has {len(readout.weights)} weights but the configured "
            f"acquisition yields {ds.features.shape[1]} features per trial"
        )
    groups = ds.words @ (1 << np.arange(int(doc["n_bits"]))[::-1])
    _, va = train_val_split(groups, cfg.train.split, cfg.train.split_seed)
    hw_acc = column_accuracy(column, readout, ds.features[va], ds.labels[va])
    sw_acc = evaluate(readout, ds.features[va], ds.labels[va])

    with open(out_dir / "programming_trace.csv", "w") as fh:
        fh.write("device,iteration,i_cc,read_g\n")
        for j, tr in enumerate(traces):
            for it, icc, g in tr:
                fh.write(f"{j},{it},{icc:.12g},{g:.12g}\n")
    with open(out_dir / "crosspoint_accuracy.csv", "w") as fh:
        fh.write("function,n_validation,software_acc,hardware_acc\n")
        fh.write(f"{doc['function']},{len(va)},{sw_acc:.6f},{hw_acc:.6f}\n")
    _write_manifest(out_dir, "crosspoint", cfg,
                    ["programming_trace.csv", "crosspoint_accuracy.csv"])
    click.echo(f"crosspoint accuracy {hw_acc:.3f} (software {sw_acc:.3f})")
    return EXIT_OK


def _run(fn, *args) -> int:
    try:
        return fn(*args)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except IntegrationError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERIC
    except DegenerateDataError as exc:
        click.echo(f"degenerate data: {exc}", err=True)
        return EXIT_DEGENERATE
    except NegativeWeightError as exc:
        click.echo(
            f"unsupported mapping: {exc}\n"
            "hint: retrain with a configuration whose surviving weights are "
            "positive, or reduce keep_m",
            err=True,
        )
        return EXIT_MAPPING
    except ValueError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG


def _common_options(f):
    f = click.option("--config", "config_path", required=True,
                     type=click.Path(), help="experiment config file (YAML/JSON)")(f)
    f = click.option("--out", default=None, help="output directory")(f)
    f = click.option("--seed", default=None, type=int, help="override the config seed")(f)
    f = click.option("--threads", default=1, type=int, help="parallel sweep workers")(f)
    return f


@click.group()
@click.version_option(__version__)
def main():
    """Memristive chaotic-circuit reservoir computing toolkit."""


@main.command("bifurcate")
@_common_options
def bifurcate_cmd(config_path, out, seed, threads):
    """Amplitude sweep; writes bifurcation.csv."""
    sys.exit(_run(cmd_bifurcate, config_path, out, seed, threads))


@main.command("static-task")
@_common_options
def static_task_cmd(config_path, out, seed, threads):
    """Word-encoded Boolean tasks; writes accuracy.csv (+ pruning artifacts)."""
    sys.exit(_run(cmd_static_task, config_path, out, seed, threads))


@main.command("stream-task")
@_common_options
def stream_task_cmd(config_path, out, seed, threads):
    """Sliding-window Boolean tasks; writes stream_accuracy.csv."""
    sys.exit(_run(cmd_stream_task, config_path, out, seed, threads))


@main.command("crosspoint")
@click.option("--readout", "readout_path", required=True, type=click.Path(),
              help="pruned readout JSON from static-task")
@_common_options
def crosspoint_cmd(readout_path, config_path, out, seed, threads):
    """Program a column from a pruned readout and evaluate the MAC inference."""
    sys.exit(_run(cmd_crosspoint, config_path, readout_path, out, seed, threads))


if __name__ == "__main__":
    main()
