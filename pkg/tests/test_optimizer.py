import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ums.architectures import make_variant, transfer, truncate_layers
from ums.data import CNOT, cnot_block, cnot_phase_vector
from ums.linalg import RngSeed, fidelity, haar_random_unitary
from ums.optimizer import (
    InfidelityObjective,
    InvalidStartError,
    OptimizerConfig,
    _restart_rng,
    basin_hopping,
    gradient_check,
    local_minimize,
    synthesize,
)

FAST = OptimizerConfig(restarts=2, hops=10)


class Bowl:
    """sum (1 - cos(x - x*)): unique minimum 0 modulo 2 pi, known gradient."""

    def __init__(self, center):
        self.center = np.asarray(center, float)
        self.n_params = self.center.size
        self.evaluations = 0

    def value_and_grad(self, x):
        self.evaluations += 1
        d = x - self.center
        return float(np.sum(1 - np.cos(d))), np.sin(d)


class Quadratic:
    def __init__(self, center):
        self.center = np.asarray(center, float)
        self.n_params = self.center.size
        self.evaluations = 0
        self.scales = np.linspace(1, 3, self.n_params)

    def value_and_grad(self, x):
        self.evaluations += 1
        d = x - self.center
        return float(np.sum(self.scales * d**2)), 2 * self.scales * d


class NanAt0:
    n_params = 2
    evaluations = 0

    def value_and_grad(self, x):
        return float("nan"), np.zeros(2)


def test_config_validation():
    for bad in ({"hops": -1}, {"restarts": 0}, {"step_size": 0}, {"temperature": -1}, {"local_tol": 0}):
        with pytest.raises(ValueError):
            OptimizerConfig(**bad)
    cfg = OptimizerConfig()
    assert (cfg.hops, cfg.step_size, cfg.temperature, cfg.restarts) == (100, 0.5, 1.0, 10)
    assert (cfg.local_tol, cfg.local_max_iter, cfg.target_infidelity) == (1e-12, 10_000, 1e-10)


def test_objective_self_target_and_range():
    gen = RngSeed(0).generator()
    arch = make_variant(4, "a", "haar", gen)
    p = gen.uniform(0, 6, arch.n_phases)
    obj = InfidelityObjective(arch, transfer(arch, p))
    assert obj(p) < 1e-12
    assert 0 <= obj(gen.uniform(0, 6, arch.n_phases)) <= 1
    with pytest.raises(ValueError):
        InfidelityObjective(arch, np.eye(3))


def test_local_minimize_quadratic():
    # the stop rule bounds the objective decrease, so x is resolved to about
    # sqrt(local_tol); ask for 1e-10 in x with a matching tolerance
    obj = Quadratic([0.3, -1.2, 2.0, 0.7])
    x, f = local_minimize(obj, np.zeros(4), OptimizerConfig(local_tol=1e-22))
    assert np.max(np.abs(x - obj.center)) < 1e-10
    assert obj.evaluations < 100


def test_local_minimize_at_optimum_is_unchanged():
    obj = Quadratic([1.0, 2.0])
    x, f = local_minimize(obj, obj.center.copy(), OptimizerConfig())
    assert np.array_equal(x, obj.center) and f == 0.0


def test_local_minimize_rejects_nonfinite_start():
    with pytest.raises(InvalidStartError):
        local_minimize(NanAt0(), np.zeros(2), OptimizerConfig())


def test_local_minimize_reconverges_near_cnot_point():
    arch = make_variant(6, "a", [cnot_block()])
    x0 = cnot_phase_vector() + RngSeed(1).generator().uniform(-1e-3, 1e-3, 35)
    x, f = local_minimize(InfidelityObjective(arch, CNOT), x0, OptimizerConfig())
    assert f < 1e-7


def test_basin_hopping_synthetic_unique_minimum():
    obj = Bowl(np.linspace(0.1, 3.0, 6))
    res = basin_hopping(obj, OptimizerConfig(restarts=1))
    assert res.converged and res.infidelity < 1e-9


def test_hops_zero_is_single_local_search():
    gen = RngSeed(3).generator()
    arch = make_variant(4, "a", "haar", gen)
    target = haar_random_unitary(4, gen)
    cfg = OptimizerConfig(hops=0, restarts=1, rng=RngSeed(5))
    res = basin_hopping(InfidelityObjective(arch, target), cfg)
    x0 = RngSeed(5).generator().uniform(0, 2 * np.pi, arch.n_phases)
    x, f = local_minimize(InfidelityObjective(arch, target), x0, cfg)
    assert res.infidelity == f and len(res.trace) == 1


def test_synthesize_realizable_target():
    gen = RngSeed(4).generator()
    arch = make_variant(4, "a", "haar", gen)
    target = transfer(arch, gen.uniform(0, 6, arch.n_phases))
    res = synthesize(arch, target, OptimizerConfig())
    assert res.converged and res.infidelity < 1e-9
    assert np.all((res.phases >= 0) & (res.phases < 2 * np.pi))


def _small_run(seed, cfg=FAST):
    gen = RngSeed(seed).generator()
    arch = make_variant(3, "a", "haar", gen)
    return arch, haar_random_unitary(3, gen), cfg.with_seed(RngSeed(seed, 1))


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_result_invariants(seed):
    arch, target, cfg = _small_run(seed)
    res = synthesize(arch, target, cfg)
    best = [f for _, f in res.trace]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert res.infidelity >= 0
    assert abs(res.infidelity - (1 - fidelity(transfer(arch, res.phases), target))) < 1e-12
    again = synthesize(arch, target, cfg)
    assert np.array_equal(res.phases, again.phases) and res.trace == again.trace


def test_restart_independence():
    arch, target, cfg = _small_run(17, OptimizerConfig(restarts=3, hops=3, target_infidelity=1e-300))
    full = synthesize(arch, target, cfg)
    singles = [
        synthesize(arch, target, OptimizerConfig(restarts=1, hops=3, target_infidelity=1e-300, rng=_restart_rng(cfg, i)))
        for i in range(3)
    ]
    assert full.infidelity == min(s.infidelity for s in singles)


def test_under_parameterized_stays_away_from_zero():
    gen = RngSeed(8).generator()
    arch = truncate_layers(make_variant(5, "a", "haar", gen), 5)
    res = synthesize(arch, haar_random_unitary(5, gen), FAST)
    assert res.infidelity > 1e-3 and not res.converged


def test_synthesis_result_json():
    arch, target, cfg = _small_run(2)
    d = synthesize(arch, target, cfg).to_json()
    assert set(d) == {"infidelity", "phases", "evaluations", "wall_time_s", "converged", "seed", "trace"}


@pytest.mark.parametrize("n", [3, 5, 8])
def test_gradient_check_random_points(n):
    gen = RngSeed(n).generator()
    for _ in range(5):
        arch = make_variant(n, "a", "haar", gen)
        obj = InfidelityObjective(arch, haar_random_unitary(n, gen))
        assert gradient_check(obj, gen.uniform(0, 6, arch.n_phases)) < 1e-6


def test_gradient_check_step_behaviour():
    obj = Bowl(np.array([0.3, 1.0, -0.4]))
    x = np.array([1.1, -0.5, 0.9])
    errs = [gradient_check(obj, x, h) for h in (1e-5, 1e-4, 1e-3, 1e-2, 1e-1)]
    assert errs[0] < 1e-6
    assert all(b > a for a, b in zip(errs, errs[1:]))


def test_gradient_check_at_stationary_point_is_absolute():
    obj = Bowl(np.array([0.3, 1.0]))
    assert gradient_check(obj, obj.center) < 1e-8
    with pytest.raises(ValueError):
        gradient_check(obj, obj.center, h=0)
