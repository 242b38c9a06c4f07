import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ums.architectures import (
    InvalidConfigurationError,
    LayeredArchitecture,
    MZIMesh,
    WaveguideArray,
    apply_bias_model,
    balanced_coupling_length,
    beam_splitter,
    clements_transfer,
    coupled_mode_transfer,
    dephase,
    dft_matrix,
    layered_gradient,
    layered_infidelity_and_gradient,
    layered_transfer,
    make_variant,
    mzi_columns,
    mzi_matrix,
    perturb_mixing,
    phase_aligned_residual,
    similarity,
    transfer,
    tritter_closed_form,
    truncate_layers,
)
from ums.data import CNOT, cnot_block, cnot_phase_vector
from ums.linalg import DegenerateInputError, InvalidDimensionError, RngSeed, fidelity, haar_random_unitary, is_unitary
from ums.optimizer import central_differences

W = np.exp(2j * np.pi / 3)
seeds = st.integers(0, 2**32)


def test_dft_examples():
    assert np.allclose(dft_matrix(1), [[1]])
    d3 = np.array([[1, 1, 1], [1, W, W**2], [1, W**2, W]]) / np.sqrt(3)
    assert np.max(np.abs(dft_matrix(3) - d3)) < 1e-15
    d4 = np.array([[1, 1, 1, 1], [1, 1j, -1, -1j], [1, -1, 1, -1], [1, -1j, -1, 1j]]) / 2
    assert np.max(np.abs(dft_matrix(4) - d4)) < 1e-15
    with pytest.raises(InvalidDimensionError):
        dft_matrix(0)


def test_tritter_fourth_power():
    t = -1j * dft_matrix(3)
    assert np.max(np.abs(np.linalg.matrix_power(t, 4) - np.eye(3))) < 1e-12


def test_layered_identity_and_dft_squared():
    arch = LayeredArchitecture(3, (np.eye(3),) * 2, (np.ones(3, bool),) * 3)
    assert np.allclose(layered_transfer(arch, np.zeros(9)), np.eye(3))
    # DFT_n^2 is the index reversal j -> -j mod n: identity at n = 2
    for n in (2, 3, 5):
        a = make_variant(n, "a", "dft")
        a = LayeredArchitecture(n, a.mixing[:2], a.masks[:3])
        u = layered_transfer(a, np.zeros(a.n_phases))
        perm = np.eye(n)[(-np.arange(n)) % n]
        assert np.max(np.abs(u - perm)) < 1e-14


def test_layered_length_mismatch():
    arch = make_variant(3, "a", "dft")
    with pytest.raises(ValueError):
        layered_transfer(arch, np.zeros(7))


def test_cnot_tables_forward_model():
    u = layered_transfer(make_variant(6, "a", [cnot_block()]), cnot_phase_vector())
    assert 1 - fidelity(u, CNOT) == pytest.approx(3.33e-8, rel=0.01)
    assert is_unitary(CNOT, 1e-12)


def test_gradient_near_zero_at_cnot_point():
    arch = make_variant(6, "a", [cnot_block()])
    g = layered_gradient(arch, cnot_phase_vector(), CNOT)
    assert np.max(np.abs(g)) <= 1e-4


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 6), seed=seeds)
def test_gradient_zero_at_perfect_fidelity(n, seed):
    gen = RngSeed(seed).generator()
    arch = make_variant(n, "a", "haar", gen)
    x = gen.uniform(0, 2 * np.pi, arch.n_phases)
    value, g = layered_infidelity_and_gradient(arch, x, layered_transfer(arch, x))
    assert value < 1e-14
    assert np.max(np.abs(g)) < 1e-8


@pytest.mark.parametrize("variant", ["a", "b", "c"])
def test_gradient_five_point_oracle(variant):
    gen = RngSeed(21).generator()
    arch = make_variant(4, variant, "haar", gen, c_layout=[2] * 8)
    x = gen.uniform(0, 2 * np.pi, arch.n_phases)
    target = haar_random_unitary(4, gen)
    f = lambda y: layered_infidelity_and_gradient(arch, y, target)[0]  # noqa: E731
    h = 1e-3
    fd = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        fd[j] = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)
    g = layered_gradient(arch, x, target)
    assert np.max(np.abs(g - fd)) / np.max(np.abs(g)) < 1e-6


def test_make_variant_counts():
    a = make_variant(3, "a", "dft")
    assert (a.depth, len(a.masks), a.n_phases) == (3, 4, 8)
    assert all(m.sum() == 2 and not m[-1] for m in a.masks)
    b = make_variant(3, "b", "dft")
    assert (b.depth, b.n_phases) == (7, 8)
    assert [int(np.flatnonzero(m)[0]) for m in b.masks] == [0, 1, 2, 0, 1, 2, 0, 1]
    h = make_variant(2, "a", "haar", RngSeed(0))
    assert h.depth == 2 and not np.allclose(h.mixing[0], h.mixing[1])
    c = make_variant(6, "c", "dft", c_layout=[4] * 9)
    assert c.n_phases == 36


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 9))
def test_variant_a_has_n2_minus_1_phases(n):
    assert make_variant(n, "a", "dft").n_phases == n * n - 1
    assert make_variant(n, "b", "dft").n_phases == n * n - 1


def test_make_variant_errors():
    with pytest.raises(InvalidConfigurationError):
        make_variant(6, "c", "dft", c_layout=[1, 5])
    with pytest.raises(InvalidConfigurationError):
        make_variant(6, "c", "dft", c_layout=[2, 2])
    with pytest.raises(InvalidConfigurationError):
        make_variant(3, "a", "haar")
    with pytest.raises(InvalidConfigurationError):
        make_variant(3, "z", "dft")
    with pytest.raises(InvalidConfigurationError):
        LayeredArchitecture(2, (np.eye(2),), (np.ones(2, bool),))
    with pytest.raises(ValueError):
        LayeredArchitecture(2, (2 * np.eye(2),), (np.ones(2, bool),) * 2)


def test_truncate_layers():
    a = make_variant(4, "a", "dft")
    t = truncate_layers(a, 3)
    assert t.depth == 2 and t.n_phases == 9
    with pytest.raises(InvalidConfigurationError):
        truncate_layers(a, 6)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), seed=seeds)
def test_phase_periodicity(n, seed):
    gen = RngSeed(seed).generator()
    arch = make_variant(n, "a", "haar", gen)
    x = gen.uniform(0, 2 * np.pi, arch.n_phases)
    assert np.max(np.abs(layered_transfer(arch, x) - layered_transfer(arch, x + 2 * np.pi))) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_composition_law_single_mixer(seed, n):
    gen = RngSeed(seed).generator()
    v = haar_random_unitary(n, gen)
    arch = LayeredArchitecture(n, (v,), (np.ones(n, bool),) * 2)
    x = gen.uniform(0, 2 * np.pi, 2 * n)
    direct = np.diag(np.exp(1j * x[n:])) @ v @ np.diag(np.exp(1j * x[:n]))
    assert np.max(np.abs(layered_transfer(arch, x) - direct)) < 1e-14


def test_beam_splitter_examples():
    assert np.allclose(beam_splitter(0), np.eye(2))
    assert np.allclose(beam_splitter(np.pi / 4), np.array([[1, 1j], [1j, 1]]) / np.sqrt(2))
    assert np.allclose(beam_splitter(np.pi / 2), [[0, 1j], [1j, 0]], atol=1e-16)


def test_mzi_bar_and_cross():
    bar = np.abs(mzi_matrix(np.pi, 0))
    cross = np.abs(mzi_matrix(0, 0))
    assert np.allclose(bar, np.eye(2), atol=1e-15)
    assert np.allclose(cross, [[0, 1], [1, 0]], atol=1e-15)
    assert np.allclose(mzi_matrix(0, 0), [[0, 1j], [1j, 0]], atol=1e-15)


def _embed(n, top, block):
    m = np.eye(n, dtype=complex)
    m[top : top + 2, top : top + 2] = block
    return m


def _brute_mesh(mesh, theta, phi, out):
    # multiply MZIs column by column, each as an explicit 2x2 block
    n = mesh.n
    bias = mesh.bias.reshape(-1, 2)
    u = np.eye(n, dtype=complex)
    k = 0
    for tops in mzi_columns(n):
        col = np.eye(n, dtype=complex)
        for t in tops:
            col = _embed(n, t, mzi_matrix(theta[k], phi[k], *bias[k])) @ col
            k += 1
        u = col @ u
    return np.diag(np.exp(1j * out)) @ u


def test_mesh_zero_phases_matches_cross_product():
    mesh = MZIMesh(4)
    direct = _brute_mesh(mesh, np.zeros(6), np.zeros(6), np.zeros(4))
    assert np.max(np.abs(clements_transfer(mesh, np.zeros(16)) - direct)) < 1e-14


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 7), seed=seeds)
def test_mesh_matches_brute_force(n, seed):
    gen = RngSeed(seed).generator()
    mesh = apply_bias_model(n, "II", 20, gen)
    m = mesh.n_mzi
    theta, phi, out = gen.uniform(0, 2 * np.pi, m), gen.uniform(0, 2 * np.pi, m), gen.uniform(0, 2 * np.pi, n)
    got = transfer(mesh, mesh.pack_phases(theta, phi, out))
    assert np.max(np.abs(got - _brute_mesh(mesh, theta, phi, out))) < 1e-13


def test_mesh_counts_and_bar_state():
    mesh = MZIMesh(6)
    assert mesh.n_mzi == 15 and mesh.n_phases == 36
    two = MZIMesh(2)
    u = clements_transfer(two, two.pack_phases([np.pi], [0.0], [0.0, 0.0]))
    assert np.allclose(u, mzi_matrix(np.pi, 0))


def test_bias_models():
    assert np.all(apply_bias_model(6, "I", 0, RngSeed(0)).bias == 0)
    b2 = apply_bias_model(6, "II", 20, RngSeed(1)).bias
    assert b2.shape == (30,) and np.all(np.abs(b2) <= np.deg2rad(20))
    b1 = apply_bias_model(6, "I", 20, RngSeed(2)).bias
    assert np.all(b1 == b1[0])
    b3 = apply_bias_model(6, "III", 20, RngSeed(3)).bias
    assert np.all((b3 >= 0) & (b3 <= np.deg2rad(20)))
    with pytest.raises(InvalidConfigurationError):
        apply_bias_model(6, "IV", 20, RngSeed(0))


def test_coupled_mode_examples():
    assert np.allclose(coupled_mode_transfer(WaveguideArray(3, 0.3, 1.0, 0.0)), np.eye(3))
    u = coupled_mode_transfer(WaveguideArray(3, 0.0, 1.0, 2 * np.pi / 9))
    assert np.max(np.abs(np.abs(u) - 1 / np.sqrt(3))) < 1e-12
    assert np.allclose(tritter_closed_form(0, 1.3, 0), np.eye(3))
    t = tritter_closed_form(0, 1.0, 2 * np.pi / 9)
    assert np.allclose(np.abs(t), 1 / np.sqrt(3))


def test_balanced_tritter_is_conjugate_dft():
    # at c z = 2 pi / 9 the coupler is DFT_3 with outputs 2 and 3 swapped;
    # plain DFT_3 is reached at c z = 4 pi / 9
    u = coupled_mode_transfer(WaveguideArray(3, 0.0, 1.0, 2 * np.pi / 9))
    assert phase_aligned_residual(u, dft_matrix(3).conj()) < 1e-12
    assert phase_aligned_residual(u[[0, 2, 1]], dft_matrix(3)) < 1e-12
    u2 = coupled_mode_transfer(WaveguideArray(3, 0.0, 1.0, 4 * np.pi / 9))
    assert phase_aligned_residual(u2, dft_matrix(3)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(beta=st.floats(-3, 3), k=st.floats(-3, 3), z=st.floats(0, 5))
def test_closed_form_matches_expm(beta, k, z):
    got = tritter_closed_form(beta, k, z)
    ref = coupled_mode_transfer(WaveguideArray(3, beta, k, z))
    assert np.max(np.abs(got - ref)) < 1e-10


def test_balanced_lengths():
    assert balanced_coupling_length(3) == pytest.approx(2 * np.pi / 9)
    assert balanced_coupling_length(4) == pytest.approx(np.pi / 4)
    with pytest.raises(InvalidConfigurationError):
        balanced_coupling_length(5)


def test_quarter_is_real_hadamard_not_dft4():
    u = coupled_mode_transfer(WaveguideArray(4, 0.0, 1.0, balanced_coupling_length(4)))
    assert np.max(np.abs(np.abs(u) - 0.5)) < 1e-12
    d = dephase(u)
    assert np.max(np.abs(d.imag)) < 1e-12
    assert phase_aligned_residual(u, dft_matrix(4)) > 0.5


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 6), seed=seeds)
def test_dephase_removes_diagonal_phases(n, seed):
    gen = RngSeed(seed).generator()
    u = haar_random_unitary(n, gen)
    dl = np.diag(np.exp(1j * gen.uniform(0, 6.3, n)))
    dr = np.diag(np.exp(1j * gen.uniform(0, 6.3, n)))
    assert phase_aligned_residual(u, dl @ u @ dr) < 1e-12


def test_perturb_mixing_endpoints():
    gen = RngSeed(9).generator()
    v0, r = haar_random_unitary(5, gen), haar_random_unitary(5, gen)
    assert np.allclose(perturb_mixing(v0, r, 0.0), v0, atol=1e-13)
    assert np.allclose(perturb_mixing(v0, r, 1.0), r, atol=1e-13)
    assert np.allclose(perturb_mixing(v0, np.eye(5), 1.0), np.eye(5))
    assert is_unitary(perturb_mixing(cnot_block(), haar_random_unitary(6, gen), 0.1), 1e-12)
    with pytest.raises(ValueError):
        perturb_mixing(v0, r, 1.5)
    with pytest.raises(DegenerateInputError):
        perturb_mixing(np.eye(2), -np.eye(2), 0.5)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, alpha=st.sampled_from(np.linspace(0, 1, 11).tolist()))
def test_perturb_mixing_unitary(seed, alpha):
    gen = RngSeed(seed).generator()
    n = int(gen.integers(2, 7))
    v = perturb_mixing(haar_random_unitary(n, gen), haar_random_unitary(n, gen), alpha)
    assert is_unitary(v, 1e-10)


def test_similarity():
    vs = [haar_random_unitary(4, RngSeed(i)) for i in range(3)]
    assert similarity(vs, vs) == pytest.approx(1.0)
    assert similarity(vs, [np.exp(0.4j) * v for v in vs]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        similarity(vs, vs[:2])


def test_dissimilarity_grows_with_alpha_on_average():
    gen = RngSeed(12).generator()
    v0 = [haar_random_unitary(5, gen) for _ in range(200)]
    alphas = np.linspace(0, 1, 6)
    d = [1 - similarity(v0, [perturb_mixing(v, np.eye(5), a) for v in v0]) for a in alphas]
    assert np.all(np.diff(d) > 0)


def test_central_differences_on_quadratic():
    fd = central_differences(lambda x: float(x @ x), np.array([1.0, -2.0]), 1e-4)
    assert np.allclose(fd, [2.0, -4.0])
