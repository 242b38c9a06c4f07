"""Desk-scale numerical studies: fidelity histograms, robustness and precision
sweeps, runtime benchmarks and the CNOT case study.

Every study takes an :class:`~ums.linalg.RngSeed`; target ``t`` of sweep point
``k`` draws from ``rng.spawn(k).spawn(t)``, so results do not depend on
``jobs`` or on execution order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .architectures import (
    LayeredArchitecture,
    MZIMesh,
    apply_bias_model,
    make_variant,
    perturb_mixing,
    similarity,
    transfer,
    truncate_layers,
)
from .data import CNOT, cnot_block, cnot_phase_vector
from .linalg import RngSeed, fidelity, haar_random_unitary
from .optimizer import OptimizerConfig, synthesize


@dataclass(frozen=True)
class HistogramRecord:
    target_index: int
    n: int
    phase_layers: int
    infidelity: float
    converged: bool
    arch: str


@dataclass(frozen=True)
class SweepRecord:
    parameter: float
    mean_infidelity: float
    best10_mean: float
    worst10_mean: float
    mean_block_dissimilarity: float
    samples: int


@dataclass(frozen=True)
class RobustnessSample:
    alpha: float
    target_index: int
    infidelity: float
    block_dissimilarity: float
    converged: bool


@dataclass(frozen=True)
class PrecisionRecord:
    bits: float
    mean_fid: float
    min_fid: float
    max_fid: float
    std_fid: float
    samples: int


@dataclass(frozen=True)
class BenchRecord:
    n: int
    arch: str
    target_index: int
    runtime_s: float
    threshold_met: bool
    infidelity: float


def tail_means(values, k: int = 10) -> tuple[float, float]:
    """Means of the k smallest and k largest values (all of them if fewer)."""
    v = np.sort(np.asarray(values, dtype=float))
    k = min(k, v.size)
    return float(v[:k].mean()), float(v[-k:].mean())


def _run(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------------------
# architecture factories (picklable, so they can cross process boundaries)


@dataclass(frozen=True)
class LayeredFactory:
    n: int
    variant: str = "a"
    mixing: str = "haar"

    def __call__(self, gen) -> LayeredArchitecture:
        return make_variant(self.n, self.variant, self.mixing, gen)

    def describe(self) -> str:
        return f"layered-{self.variant}-{self.mixing}"


@dataclass(frozen=True)
class MeshFactory:
    n: int
    model: str | None = None
    range_deg: float = 20.0

    def __call__(self, gen) -> MZIMesh:
        if self.model is None:
            return MZIMesh(self.n)
        return apply_bias_model(self.n, self.model, self.range_deg, gen)

    def describe(self) -> str:
        return "clements" if self.model is None else f"clements-{self.model}-{self.range_deg:g}deg"


# ---------------------------------------------------------------------------
# fidelity histograms


def _histogram_task(task):
    factory, t, layer_counts, cfg, rng = task
    sub = rng.spawn(t)
    gen = sub.generator()
    arch = factory(gen)
    target = haar_random_unitary(factory.n, gen)
    out = []
    for layers in layer_counts:
        if isinstance(arch, MZIMesh):
            used, run_arch = None, arch
        else:
            used = len(arch.masks) if layers is None else layers
            run_arch = truncate_layers(arch, used)
        res = synthesize(run_arch, target, cfg.with_seed(sub.spawn(used or 0)))
        out.append(
            HistogramRecord(t, factory.n, used or 0, res.infidelity, res.converged, factory.describe())
        )
    return out


def fidelity_histogram(
    factory,
    n_targets: int,
    layer_counts=(None,),
    cfg: OptimizerConfig | None = None,
    rng: RngSeed = RngSeed(0),
    jobs: int = 1,
) -> list[HistogramRecord]:
    """Synthesize ``n_targets`` Haar targets, each on a fresh architecture.

    ``layer_counts`` lists how many phase layers to keep (``None`` keeps all);
    meshes ignore it and record 0 layers.
    """
    if n_targets < 1:
        raise ValueError("n_targets must be >= 1")
    cfg = cfg or OptimizerConfig()
    tasks = [(factory, t, tuple(layer_counts), cfg, rng) for t in range(n_targets)]
    rows = [r for chunk in _run(_histogram_task, tasks, jobs) for r in chunk]
    return sorted(rows, key=lambda r: (r.phase_layers, r.target_index))


# ---------------------------------------------------------------------------
# robustness to mixer perturbations


def _robustness_task(task):
    n, k, alpha, t, r_choice, cfg, rng = task
    sub = rng.spawn(k).spawn(t)
    gen = sub.generator()
    v0 = [haar_random_unitary(n, gen) for _ in range(n)]
    if r_choice == "identity":
        rs = [np.eye(n)] * n
    elif r_choice == "haar":
        rs = [haar_random_unitary(n, gen) for _ in range(n)]
    else:
        raise ValueError(f"unknown r_choice {r_choice!r}")
    va = [perturb_mixing(v, r, alpha) for v, r in zip(v0, rs)]
    target = haar_random_unitary(n, gen)
    res = synthesize(make_variant(n, "a", va), target, cfg.with_seed(sub.spawn(0)))
    return RobustnessSample(alpha, t, res.infidelity, 1.0 - similarity(v0, va), res.converged)


def summarize_robustness(samples) -> list[SweepRecord]:
    out = []
    for alpha in sorted({s.alpha for s in samples}):
        rows = [s for s in samples if s.alpha == alpha]
        inf = [s.infidelity for s in rows]
        best, worst = tail_means(inf)
        out.append(
            SweepRecord(
                alpha,
                float(np.mean(inf)),
                best,
                worst,
                float(np.mean([s.block_dissimilarity for s in rows])),
                len(rows),
            )
        )
    return out


def robustness_sweep(
    n: int,
    alphas,
    n_targets: int,
    r_choice: str = "identity",
    cfg: OptimizerConfig | None = None,
    rng: RngSeed = RngSeed(0),
    jobs: int = 1,
):
    """Variant-a scheme with Haar mixers pulled towards R by ``alpha``.

    Every (alpha, target) pair gets fresh mixers, perturbations and target.
    Returns ``(summary, samples)``.
    """
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise ValueError("alphas must lie in [0, 1]")
    cfg = cfg or OptimizerConfig()
    tasks = [
        (n, k, float(a), t, r_choice, cfg, rng) for k, a in enumerate(alphas) for t in range(n_targets)
    ]
    samples = _run(_robustness_task, tasks, jobs)
    return summarize_robustness(samples), samples


# ---------------------------------------------------------------------------
# finite phase precision


def precision_half_width(bits: float) -> float:
    return 2 * math.pi / 2 ** (bits + 1)


def precision_sweep(arch, bits, n_samples: int, rng: RngSeed = RngSeed(0)) -> list[PrecisionRecord]:
    """Fidelity of randomly detuned phase settings against the exact setting.

    No re-optimization: phases drawn uniformly define U0, then each setting is
    perturbed by independent uniform errors of half-width 2 pi / 2^(bits+1).
    """
    if not len(bits):
        raise ValueError("bits must be non-empty")
    gen = rng.generator()
    n_phases = arch.n_phases
    phi0 = gen.uniform(0.0, 2 * math.pi, n_phases)
    u0 = transfer(arch, phi0)
    out = []
    for k, b in enumerate(bits):
        g = rng.spawn(k).generator()
        w = precision_half_width(b)
        fids = np.array(
            [fidelity(transfer(arch, phi0 + g.uniform(-w, w, n_phases)), u0) for _ in range(n_samples)]
        )
        out.append(
            PrecisionRecord(
                float(b), float(fids.mean()), float(fids.min()), float(fids.max()),
                float(fids.std(ddof=1)) if n_samples > 1 else 0.0, n_samples,
            )
        )
    return out


# ---------------------------------------------------------------------------
# runtime benchmark


def _bench_task(task):
    n, kind, t, threshold, cfg, rng = task
    sub = rng.spawn(n).spawn(t)
    gen = sub.generator()
    arch = make_variant(n, "a", "haar", gen) if kind == "layered" else MZIMesh(n)
    target = haar_random_unitary(n, gen)
    res = synthesize(arch, target, replace(cfg, target_infidelity=threshold, rng=sub.spawn(1)))
    return BenchRecord(n, kind, t, res.wall_time, res.infidelity < threshold or res.converged, res.infidelity)


def runtime_bench(
    ns,
    architectures=("layered", "clements"),
    threshold: float = 1e-5,
    n_targets: int = 10,
    cfg: OptimizerConfig | None = None,
    rng: RngSeed = RngSeed(0),
    jobs: int = 1,
) -> list[BenchRecord]:
    """Wall time to reach ``1 - F < threshold`` per size, architecture and target.

    Both architectures see the same targets for a given (n, t).
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    unknown = set(architectures) - {"layered", "clements"}
    if unknown:
        raise ValueError(f"unknown architectures {sorted(unknown)}")
    cfg = cfg or OptimizerConfig()
    tasks = [(n, kind, t, threshold, cfg, rng) for n in ns for kind in architectures for t in range(n_targets)]
    return _run(_bench_task, tasks, jobs)


def runtime_ratios(records) -> dict[int, float]:
    """Mean layered runtime over mean mesh runtime, per n."""
    out = {}
    for n in sorted({r.n for r in records}):
        lay = [r.runtime_s for r in records if r.n == n and r.arch == "layered"]
        mesh = [r.runtime_s for r in records if r.n == n and r.arch == "clements"]
        if lay and mesh and np.mean(mesh) > 0:
            out[n] = float(np.mean(lay) / np.mean(mesh))
    return out


# ---------------------------------------------------------------------------
# CNOT case study


def cnot_architecture(mixing=None) -> LayeredArchitecture:
    return make_variant(6, "a", [cnot_block()] if mixing is None else mixing)


def cnot_case_study(mode: str, cfg: OptimizerConfig | None = None, rng: RngSeed = RngSeed(0), alpha: float = 0.1) -> dict:
    """Three checks on the six-mode CNOT transfer matrix.

    verify_tables: tabulated block and phases, no optimization.
    resynthesize: fresh Haar mixers, full synthesis.
    perturbed_blocks: first block tabulated, the other five pulled towards
    independent Haar matrices by ``alpha``, full synthesis.
    """
    cfg = cfg or OptimizerConfig()
    if mode == "verify_tables":
        u = transfer(cnot_architecture(), cnot_phase_vector())
        return {"mode": mode, "infidelity": 1.0 - fidelity(u, CNOT)}
    gen = rng.generator()
    if mode == "resynthesize":
        arch = make_variant(6, "a", "haar", gen)
        extra = {}
    elif mode == "perturbed_blocks":
        v0 = cnot_block()
        blocks = [v0] + [perturb_mixing(v0, haar_random_unitary(6, gen), alpha) for _ in range(5)]
        arch = make_variant(6, "a", blocks)
        extra = {"alpha": alpha, "block_dissimilarity": 1.0 - similarity([v0] * 6, blocks)}
    else:
        raise ValueError(f"unknown mode {mode!r}")
    res = synthesize(arch, CNOT, cfg.with_seed(rng.spawn(0)))
    return {"mode": mode, "infidelity": res.infidelity, "converged": res.converged, **extra, "result": res}
