"""``ums`` command-line entry point.

Usage: ``ums [--config PATH] [--seed N] [--jobs N] [--out DIR] [--strict]
COMMAND [--key=value ...]``. Config keys may come from a JSON file (or a
previous run's manifest) and from ``--key=value`` flags; flags win.
Values in flags are parsed as JSON when possible, so ``--alphas=[0,0.5,1]``
and ``--mixing=haar`` both work.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .architectures import (
    MZIMesh,
    WaveguideArray,
    balanced_coupling_length,
    coupled_mode_transfer,
    dft_matrix,
    make_variant,
    phase_aligned_residual,
    truncate_layers,
)
from .experiments import (
    LayeredFactory,
    MeshFactory,
    cnot_case_study,
    fidelity_histogram,
    precision_sweep,
    robustness_sweep,
    runtime_bench,
    runtime_ratios,
)
from .io import RunManifest, SchemaError, load_matrix, matrix_to_json, read_json, write_csv, write_json
from .linalg import RngSeed, haar_random_unitary
from .optimizer import OptimizerConfig, synthesize
from . import su3

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_IO = 0, 1, 2, 3

OPTIMIZER_KEYS = {f.name for f in fields(OptimizerConfig)} - {"rng"}

# per command: default parameters (required keys default to None)
COMMANDS: dict[str, dict] = {
    "synthesize": {
        "n": None, "arch": "layered", "variant": "a", "mixing": "haar", "target": None,
        "phase_layers": None, "c_layout": None, "allow_nonunitary": False,
    },
    "histogram": {
        "n": None, "arch": "layered", "variant": "a", "mixing": "haar", "n_targets": 20,
        "layer_counts": [None], "bias_model": None, "range_deg": 20.0,
    },
    "robustness": {"n": 5, "alphas": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0], "r": "identity", "n_targets": 20},
    "precision": {"n": 10, "bits": [4, 6, 8, 10, 12], "n_samples": 100, "arch": "layered", "mixing": "dft"},
    "bench": {"ns": [3, 4, 5, 6, 7, 8], "archs": ["layered", "clements"], "threshold": 1e-5, "n_targets": 10},
    "cnot": {"mode": "verify_tables", "alpha": 0.1},
    "su3-check": {"eps": 1e-3, "n_points": 100},
    "sample-haar": {"n": None, "count": 1},
    "coupled-mode": {"n": 3, "beta": 0.0, "c": 1.0, "z": None},
}
_REQUIRED = {"synthesize": ("n",), "histogram": ("n",), "sample-haar": ("n",)}


class ConfigError(ValueError):
    pass


class NotConverged(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    parameters: dict
    optimizer: OptimizerConfig
    seed: int = 0
    jobs: int = 1
    warnings: list = field(default_factory=list)

    def snapshot(self) -> dict:
        opt = {k: v for k, v in asdict(self.optimizer).items() if k != "rng"}
        return {"command": self.command, "seed": self.seed, "jobs": self.jobs, "optimizer": opt, **self.parameters}


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_overrides(tokens) -> dict:
    out = {}
    for tok in tokens:
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}; use --key=value")
        key, sep, value = tok[2:].partition("=")
        out[key.replace("-", "_")] = _parse_value(value) if sep else True
    return out


def parse_config(file_values: dict | None, flags: dict, command: str | None = None) -> RunConfig:
    """Merge file values and flags (flags win, with a warning) into a validated config."""
    file_values = dict(file_values or {})
    if "config" in file_values and "outputs" in file_values:  # a run manifest
        file_values = dict(file_values["config"])
    warnings = []
    merged = dict(file_values)
    for k, v in flags.items():
        if k in file_values and file_values[k] != v:
            warnings.append(f"--{k}={json.dumps(v)} overrides config value {json.dumps(file_values[k])}")
        merged[k] = v
    if command is not None:
        if merged.get("command", command) != command and "command" in file_values:
            warnings.append(f"command {command!r} overrides config command {file_values['command']!r}")
        merged["command"] = command
    command = merged.pop("command", None)
    if command not in COMMANDS:
        raise ConfigError(f"unknown or missing command {command!r}; choose from {sorted(COMMANDS)}")
    defaults = COMMANDS[command]

    opt_values = dict(merged.pop("optimizer", None) or {})
    for k in list(merged):
        if k in OPTIMIZER_KEYS:
            opt_values[k] = merged.pop(k)
    unknown = sorted(set(opt_values) - OPTIMIZER_KEYS)
    if unknown:
        raise ConfigError(f"unknown optimizer key(s): {', '.join(unknown)}")
    seed = merged.pop("seed", 0)
    jobs = merged.pop("jobs", 1)
    unknown = sorted(set(merged) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) for {command}: {', '.join(unknown)}")
    params = {**defaults, **merged}
    missing = [k for k in _REQUIRED.get(command, ()) if params.get(k) is None]
    if missing:
        raise ConfigError(f"{command} requires: {', '.join(missing)}")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    if isinstance(jobs, bool) or not isinstance(jobs, int) or jobs < 1:
        raise ConfigError("jobs must be a positive integer")
    try:
        opt = OptimizerConfig(rng=RngSeed(seed), **opt_values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid optimizer settings: {exc}") from None
    return RunConfig(command, params, opt, seed, jobs, warnings)


# ---------------------------------------------------------------------------
# commands; each returns (outputs: {filename: ("json"|csv schema, payload)}, converged)


def _cmd_synthesize(cfg: RunConfig, out: Path):
    p = cfg.parameters
    rng = RngSeed(cfg.seed)
    gen = rng.spawn(0).generator()
    n = int(p["n"])
    if p["arch"] == "clements":
        arch = MZIMesh(n)
    elif p["arch"] == "layered":
        arch = make_variant(n, p["variant"], p["mixing"], gen, p["c_layout"])
        if p["phase_layers"] is not None:
            arch = truncate_layers(arch, int(p["phase_layers"]))
    else:
        raise ConfigError(f"unknown arch {p['arch']!r}")
    if p["target"] is None:
        target = haar_random_unitary(n, rng.spawn(1))
    else:
        target = load_matrix(p["target"], bool(p["allow_nonunitary"]))
        if target.shape != (n, n):
            raise ConfigError(f"target is {target.shape[0]}x{target.shape[0]}, config says n={n}")
    res = synthesize(arch, target, cfg.optimizer.with_seed(rng.spawn(2)))
    payload = res.to_json()
    timing = {"wall_time_s": payload.pop("wall_time_s")}
    return {"result.json": ("json", payload)}, res.converged, timing


def _cmd_histogram(cfg: RunConfig, out: Path):
    p = cfg.parameters
    n = int(p["n"])
    if p["arch"] == "clements":
        factory = MeshFactory(n, p["bias_model"], float(p["range_deg"]))
    elif p["arch"] == "layered":
        factory = LayeredFactory(n, p["variant"], p["mixing"])
    else:
        raise ConfigError(f"unknown arch {p['arch']!r}")
    rows = fidelity_histogram(
        factory, int(p["n_targets"]), p["layer_counts"], cfg.optimizer, RngSeed(cfg.seed), cfg.jobs
    )
    return {"histogram.csv": ("histogram", rows)}, all(r.converged for r in rows), {}


def _cmd_robustness(cfg: RunConfig, out: Path):
    p = cfg.parameters
    summary, samples = robustness_sweep(
        int(p["n"]), p["alphas"], int(p["n_targets"]), p["r"], cfg.optimizer, RngSeed(cfg.seed), cfg.jobs
    )
    raw = [asdict(s) for s in samples]
    return {"robustness.csv": ("robustness", summary), "robustness_samples.json": ("json", raw)}, True, {}


def _cmd_precision(cfg: RunConfig, out: Path):
    p = cfg.parameters
    n = int(p["n"])
    rng = RngSeed(cfg.seed)
    if p["arch"] == "clements":
        arch = MZIMesh(n)
    else:
        arch = make_variant(n, "a", p["mixing"], rng.spawn(0).generator())
    rows = precision_sweep(arch, p["bits"], int(p["n_samples"]), rng.spawn(1))
    return {"precision.csv": ("precision", rows)}, True, {}


def _cmd_bench(cfg: RunConfig, out: Path):
    p = cfg.parameters
    rows = runtime_bench(
        p["ns"], tuple(p["archs"]), float(p["threshold"]), int(p["n_targets"]), cfg.optimizer,
        RngSeed(cfg.seed), cfg.jobs,
    )
    rates = {}
    for r in rows:
        rates.setdefault(f"{r.arch}/{r.n}", []).append(r.threshold_met)
    summary = {"convergence_rate": {k: float(np.mean(v)) for k, v in sorted(rates.items())}}
    timing = {"runtime_ratio_layered_over_clements": {str(k): v for k, v in runtime_ratios(rows).items()}}
    converged = all(r.threshold_met for r in rows)
    return {"bench.csv": ("bench", rows), "bench_summary.json": ("json", summary)}, converged, timing


def _cmd_cnot(cfg: RunConfig, out: Path):
    p = cfg.parameters
    report = cnot_case_study(p["mode"], cfg.optimizer, RngSeed(cfg.seed), float(p["alpha"]))
    timing = {}
    res = report.pop("result", None)
    if res is not None:
        payload = res.to_json()
        timing["wall_time_s"] = payload.pop("wall_time_s")
        report["synthesis"] = payload
    converged = report.get("converged", report["infidelity"] <= 1e-6)
    return {"cnot.json": ("json", report)}, converged, timing


def _cmd_su3(cfg: RunConfig, out: Path):
    p = cfg.parameters
    rng = RngSeed(cfg.seed)
    gen = rng.spawn(0).generator()
    points = gen.uniform(0, 2 * np.pi, (int(p["n_points"]), 8))
    ranks = [su3.tangent_rank(x) for x in points]
    g0 = su3.killing_metric(np.zeros(8))
    g1 = su3.killing_metric(points[0])
    flags, residuals = su3.local_solvability(
        np.eye(3), float(p["eps"]), OptimizerConfig(restarts=5, hops=20, rng=rng.spawn(1))
    )
    r7, r8 = su3.conjugation_identities()
    report = {
        "ranks": {"generic": int(min(ranks)), "identity": su3.tangent_rank(np.zeros(8))},
        "killing_det_identity": float(np.linalg.det(g0)),
        "killing_det_generic": float(np.linalg.det(g1)),
        "tritter_fourth_power_residual": float(
            np.max(np.abs(np.linalg.matrix_power(su3.TRITTER, 4) - np.eye(3)))
        ),
        "solvability": {"eps": float(p["eps"]), "solved": [bool(f) for f in flags], "residuals": residuals},
        "conjugation_residuals": {"lambda7": r7, "lambda8": r8},
    }
    return {"su3.json": ("json", report)}, all(flags), {}


def _cmd_sample_haar(cfg: RunConfig, out: Path):
    p = cfg.parameters
    rng = RngSeed(cfg.seed)
    count = int(p["count"])
    if count < 1:
        raise ConfigError("count must be >= 1")
    outputs = {}
    for i in range(count):
        name = "haar.json" if count == 1 else f"haar_{i:04d}.json"
        outputs[name] = ("json", matrix_to_json(haar_random_unitary(int(p["n"]), rng.spawn(i))))
    return outputs, True, {}


def _cmd_coupled_mode(cfg: RunConfig, out: Path):
    p = cfg.parameters
    n = int(p["n"])
    z = balanced_coupling_length(n) / float(p["c"]) if p["z"] is None else float(p["z"])
    u = coupled_mode_transfer(WaveguideArray(n, float(p["beta"]), float(p["c"]), z))
    report = {
        "n": n, "beta": float(p["beta"]), "c": float(p["c"]), "z": z,
        "matrix": matrix_to_json(u),
        "moduli": np.abs(u).tolist(),
        "dft_phase_aligned_residual": phase_aligned_residual(u, dft_matrix(n)),
        "conjugate_dft_phase_aligned_residual": phase_aligned_residual(u, dft_matrix(n).conj()),
    }
    return {"coupled_mode.json": ("json", report)}, True, {}


HANDLERS = {
    "synthesize": _cmd_synthesize,
    "histogram": _cmd_histogram,
    "robustness": _cmd_robustness,
    "precision": _cmd_precision,
    "bench": _cmd_bench,
    "cnot": _cmd_cnot,
    "su3-check": _cmd_su3,
    "sample-haar": _cmd_sample_haar,
    "coupled-mode": _cmd_coupled_mode,
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run(cfg: RunConfig, out_dir, strict: bool = False) -> int:
    """Execute a resolved config; all files land in ``out_dir``."""
    out = Path(out_dir)
    manifest = RunManifest(cfg.snapshot(), __version__, _now())
    t0 = time.perf_counter()
    outputs, converged, timing = HANDLERS[cfg.command](cfg, out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (kind, payload) in outputs.items():
        path = out / name
        if kind == "json":
            write_json(payload, path)
        else:
            write_csv(payload, kind, path)
        manifest.record(path)
    manifest.finished = _now()
    manifest_json = manifest.to_json()
    manifest_json.update(timing=timing, elapsed_s=time.perf_counter() - t0, warnings=cfg.warnings, converged=bool(converged))
    write_json(manifest_json, out / "manifest.json")
    if strict and not converged:
        raise NotConverged(f"{cfg.command}: convergence target not met")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ums", description=__doc__.split("\n")[0], allow_abbrev=False)
    ap.add_argument("--config", type=Path, help="JSON config file or run manifest")
    ap.add_argument("--seed", type=int, help="root seed (default 0)")
    ap.add_argument("--jobs", type=int, help="worker processes (default 1)")
    ap.add_argument("--out", type=Path, help="output directory (default $UMS_OUT_DIR or ./ums_out)")
    ap.add_argument("--strict", action="store_true", help="exit 2 when a synthesis misses its target")
    ap.add_argument("command", nargs="?", choices=sorted(COMMANDS))
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args, rest = ap.parse_known_args(argv)
    try:
        flags = parse_overrides(rest)
        if args.seed is not None:
            flags["seed"] = args.seed
        if args.jobs is not None:
            flags["jobs"] = args.jobs
        file_values = read_json(args.config) if args.config else None
        cfg = parse_config(file_values, flags, args.command)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    out = args.out or Path(os.environ.get("UMS_OUT_DIR", "ums_out"))
    try:
        return run(cfg, out, args.strict)
    except NotConverged as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
