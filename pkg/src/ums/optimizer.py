"""Phase synthesis: basin-hopping around a quasi-Newton local search.

Every objective used here exposes ``n_params``, ``evaluations`` and
``value_and_grad(x)``; :class:`InfidelityObjective` is the standard one.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .architectures import as_layered, layered_infidelity_and_gradient, transfer
from .linalg import RngSeed

TWO_PI = 2.0 * np.pi


class InvalidStartError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    hops: int = 100
    step_size: float = 0.5
    temperature: float = 1.0
    restarts: int = 10
    local_tol: float = 1e-12
    local_max_iter: int = 10_000
    target_infidelity: float = 1e-10
    rng: RngSeed = field(default_factory=RngSeed)

    def __post_init__(self):
        if self.hops < 0 or self.restarts < 1 or self.local_max_iter < 1:
            raise ValueError("hops >= 0, restarts >= 1 and local_max_iter >= 1 required")
        if min(self.step_size, self.temperature, self.local_tol, self.target_infidelity) <= 0:
            raise ValueError("step_size, temperature and tolerances must be positive")

    def with_seed(self, rng: RngSeed) -> "OptimizerConfig":
        return replace(self, rng=rng)


@dataclass
class SynthesisResult:
    phases: np.ndarray
    infidelity: float
    trace: list
    evaluations: int
    wall_time: float
    converged: bool
    rng_used: RngSeed

    def to_json(self) -> dict:
        return {
            "infidelity": float(self.infidelity),
            "phases": [float(p) for p in self.phases],
            "evaluations": int(self.evaluations),
            "wall_time_s": float(self.wall_time),
            "converged": bool(self.converged),
            "seed": self.rng_used.as_list(),
            "trace": [[int(h), float(f)] for h, f in self.trace],
        }


class InfidelityObjective:
    """1 - F(transfer(arch, x), target) with its analytic gradient."""

    def __init__(self, arch, target):
        self.arch = arch
        self._layered = as_layered(arch)
        self.target = np.asarray(target, dtype=complex)
        if self.target.shape != (self._layered.n, self._layered.n):
            raise ValueError(f"target shape {self.target.shape} does not match n={self._layered.n}")
        self.n_params = self._layered.n_phases
        self.evaluations = 0

    def value_and_grad(self, x):
        self.evaluations += 1
        return layered_infidelity_and_gradient(self._layered, x, self.target)

    def __call__(self, x) -> float:
        return self.value_and_grad(x)[0]

    def transfer(self, x) -> np.ndarray:
        return transfer(self.arch, x)


def objective(arch, target) -> InfidelityObjective:
    return InfidelityObjective(arch, target)


def local_minimize(obj, x0, cfg: OptimizerConfig):
    """BFGS from ``x0``; stops once one iteration lowers the objective by less than ``local_tol``."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (obj.n_params,):
        raise ValueError(f"x0 has shape {x0.shape}, objective takes {obj.n_params} parameters")
    f0, g0 = obj.value_and_grad(x0)
    if not (np.isfinite(f0) and np.all(np.isfinite(g0))):
        raise InvalidStartError(f"objective is not finite at the start point (f={f0})")
    previous = [f0]

    def stop_on_small_decrease(intermediate_result):
        if previous[0] - intermediate_result.fun < cfg.local_tol:
            raise StopIteration
        previous[0] = intermediate_result.fun

    res = minimize(
        obj.value_and_grad,
        x0,
        jac=True,
        method="BFGS",
        callback=stop_on_small_decrease,
        options={"gtol": 1e-12, "maxiter": cfg.local_max_iter},
    )
    if not res.fun <= f0:
        return x0, float(f0)
    return res.x, float(res.fun)


def _metropolis(gen, f_new, f_old, temperature):
    if f_new < f_old:
        return True
    return gen.random() < math.exp(-(f_new - f_old) / temperature)


def _restart_rng(cfg: OptimizerConfig, index: int) -> RngSeed:
    # restart 0 runs on the config stream itself, so a single-restart run
    # seeded with _restart_rng(cfg, i) replays restart i exactly
    return cfg.rng if index == 0 else cfg.rng.spawn(index)


def basin_hopping(obj, cfg: OptimizerConfig) -> SynthesisResult:
    """Restarted basin-hopping; keeps the global best, stops early at the target."""
    t0 = time.perf_counter()
    evals0 = obj.evaluations
    best_x, best_f = None, math.inf
    trace = []
    hop = 0
    for r in range(cfg.restarts):
        gen = _restart_rng(cfg, r).generator()
        x, f = local_minimize(obj, gen.uniform(0.0, TWO_PI, obj.n_params), cfg)
        if f < best_f:
            best_x, best_f = x, f
        trace.append((hop, best_f))
        for _ in range(cfg.hops):
            if best_f <= cfg.target_infidelity:
                break
            hop += 1
            y = x + gen.uniform(-cfg.step_size, cfg.step_size, obj.n_params)
            y, fy = local_minimize(obj, y, cfg)
            if _metropolis(gen, fy, f, cfg.temperature):
                x, f = y, fy
            if fy < best_f:
                best_x, best_f = y, fy
            trace.append((hop, best_f))
        hop += 1
        if best_f <= cfg.target_infidelity:
            break
    return SynthesisResult(
        phases=best_x,
        infidelity=float(best_f),
        trace=trace,
        evaluations=obj.evaluations - evals0,
        wall_time=time.perf_counter() - t0,
        converged=bool(best_f <= cfg.target_infidelity),
        rng_used=cfg.rng,
    )


def synthesize(arch, target, cfg: OptimizerConfig | None = None) -> SynthesisResult:
    cfg = cfg or OptimizerConfig()
    res = basin_hopping(objective(arch, target), cfg)
    res.phases = np.mod(res.phases, TWO_PI)
    return res


def gradient_check(obj, x, h: float = 1e-6, abs_floor: float = 1e-8) -> float:
    """Largest coordinate error of the analytic gradient against central differences.

    Errors are relative to the gradient's max-norm, so near-zero components
    are not judged against their own (noise-level) size. At a stationary
    point (both gradients below ``abs_floor``) the absolute error is returned.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    _, g = obj.value_and_grad(x)
    fd = central_differences(lambda y: obj.value_and_grad(y)[0], x, h)
    err = float(np.max(np.abs(g - fd)))
    scale = max(float(np.max(np.abs(g))), float(np.max(np.abs(fd))))
    return err if scale < abs_floor else err / scale


def central_differences(f, x, h: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        out[j] = (f(x + e) - f(x - e)) / (2 * h)
    return out


__all__ = [
    "InfidelityObjective",
    "InvalidStartError",
    "OptimizerConfig",
    "SynthesisResult",
    "basin_hopping",
    "central_differences",
    "gradient_check",
    "local_minimize",
    "objective",
    "synthesize",
]
