"""Forward models for programmable interferometers.

Two families are covered:

* layered schemes ``U = Phi_{K+1} V_K Phi_K ... V_1 Phi_1`` where the ``V_m``
  are fixed multiport mixers and the ``Phi_m`` diagonal phase layers, some of
  whose channels are tunable;
* the rectangular (Clements) MZI mesh, possibly with beam-splitter bias.

The mesh is lowered onto the layered representation (each MZI column becomes
two phase layers and two block-diagonal splitter layers), so a single kernel
evaluates transfer matrices and infidelity gradients for both.

Phase vectors are flat and ordered layer by layer from the input side,
channel-ascending inside a layer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .linalg import (
    InvalidDimensionError,
    RngSeed,
    check_unitary,
    expm,
    fidelity,
    haar_random_unitary,
    nearest_unitary,
)


class InvalidConfigurationError(ValueError):
    pass


def dft_matrix(n: int) -> np.ndarray:
    if n < 1:
        raise InvalidDimensionError("n must be >= 1")
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


# ---------------------------------------------------------------------------
# layered schemes


@dataclass(frozen=True, eq=False)
class LayeredArchitecture:
    """Mixers ``V_1..V_K`` and the K+1 tunable-channel masks around them."""

    n: int
    mixing: tuple
    masks: tuple
    variant: str = "a"

    def __post_init__(self):
        mixing = tuple(check_unitary(v) for v in self.mixing)
        masks = tuple(np.array(m, dtype=bool) for m in self.masks)
        for v in mixing:
            if v.shape != (self.n, self.n):
                raise InvalidDimensionError(f"mixer of shape {v.shape} in an n={self.n} scheme")
        if len(masks) != len(mixing) + 1:
            raise InvalidConfigurationError(
                f"{len(mixing)} mixing layers need {len(mixing) + 1} phase masks, got {len(masks)}"
            )
        for m in masks:
            m.flags.writeable = False
            if m.shape != (self.n,):
                raise InvalidConfigurationError(f"mask of shape {m.shape} in an n={self.n} scheme")
        object.__setattr__(self, "mixing", mixing)
        object.__setattr__(self, "masks", masks)

    @property
    def depth(self) -> int:
        return len(self.mixing)

    @cached_property
    def n_phases(self) -> int:
        return int(sum(m.sum() for m in self.masks))

    @cached_property
    def _slots(self):
        # (layer, channel) of every entry in the flat phase vector
        return [(k, j) for k, m in enumerate(self.masks) for j in np.flatnonzero(m)]

    def phase_layers(self, phases) -> np.ndarray:
        """Full (K+1, n) array of layer phases, zeros in non-tunable slots."""
        x = np.asarray(phases, dtype=float)
        if x.shape != (self.n_phases,):
            raise ValueError(f"expected {self.n_phases} phases, got shape {x.shape}")
        full = np.zeros((len(self.masks), self.n))
        full[np.array(self.masks)] = x
        return full


def _forward(arch: LayeredArchitecture, phases):
    e = np.exp(1j * arch.phase_layers(phases))
    partial = [np.eye(arch.n, dtype=complex)]
    for m, v in enumerate(arch.mixing):
        partial.append(v @ (e[m][:, None] * partial[m]))
    return e, partial


def layered_transfer(arch: LayeredArchitecture, phases) -> np.ndarray:
    e, partial = _forward(arch, phases)
    return e[-1][:, None] * partial[-1]


def layered_infidelity_and_gradient(arch: LayeredArchitecture, phases, target):
    """Return ``(1 - F, d(1 - F)/d phases)`` for the layered scheme.

    Prefix products ``R_m`` (everything acting before layer m) and suffix
    products ``L_m = target^dag (everything after layer m)`` give
    ``dTr(target^dag U)/dphi_mj = i e_mj (R_m L_m)_jj`` in O(K n^3).
    """
    target = np.asarray(target)
    if target.shape != (arch.n, arch.n):
        raise ValueError(f"target shape {target.shape} does not match n={arch.n}")
    e, partial = _forward(arch, phases)
    n2 = arch.n**2
    diag = np.empty((len(arch.masks), arch.n), dtype=complex)
    left = target.conj().T
    for m in range(arch.depth, -1, -1):
        diag[m] = e[m] * np.sum(partial[m] * left.T, axis=1)
        if m:
            left = (left * e[m][None, :]) @ arch.mixing[m - 1]
    g = diag[-1].sum()
    value = max(0.0, 1.0 - abs(g) ** 2 / n2)
    grad_full = 2.0 * np.imag(np.conj(g) * diag) / n2
    return value, grad_full[np.array(arch.masks)]


def layered_gradient(arch: LayeredArchitecture, phases, target) -> np.ndarray:
    return layered_infidelity_and_gradient(arch, phases, target)[1]


def _mixers(n, k, mixing, rng):
    if isinstance(mixing, str):
        if mixing == "dft":
            return [dft_matrix(n)] * k
        if mixing == "haar":
            if rng is None:
                raise InvalidConfigurationError("haar mixing needs an rng")
            gen = rng.generator() if isinstance(rng, RngSeed) else rng
            return [haar_random_unitary(n, gen) for _ in range(k)]
        raise InvalidConfigurationError(f"unknown mixing source {mixing!r}")
    mats = [np.asarray(v, dtype=complex) for v in mixing]
    if len(mats) == 1:
        mats = mats * k
    if len(mats) != k:
        raise InvalidConfigurationError(f"need {k} explicit mixers (or one to repeat), got {len(mats)}")
    return mats


def make_variant(
    n: int,
    variant: str = "a",
    mixing="dft",
    rng: RngSeed | np.random.Generator | None = None,
    c_layout: Sequence[int] | None = None,
) -> LayeredArchitecture:
    """Build one of the three layered scheme families.

    a: K = n mixers, n - 1 tunable phases per layer (channel n fixed).
    b: K = n^2 - 2 mixers, one tunable phase per layer, cycling over channels.
    c: per-layer counts from ``c_layout`` (each in [2, n - 2], total >= n^2 - 1).

    ``mixing`` is ``"dft"``, ``"haar"`` (drawn from ``rng``) or an explicit
    list of matrices; a single explicit matrix is reused for every layer.
    """
    if n < 1:
        raise InvalidDimensionError("n must be >= 1")
    if variant == "a":
        masks = [np.arange(n) < n - 1 for _ in range(n + 1)]
    elif variant == "b":
        masks = [np.arange(n) == (m % n) for m in range(n * n - 1)]
    elif variant == "c":
        if not c_layout:
            raise InvalidConfigurationError("variant c needs c_layout")
        counts = [int(c) for c in c_layout]
        bad = [c for c in counts if not 2 <= c <= n - 2]
        if bad:
            raise InvalidConfigurationError(f"variant c layer counts must lie in [2, {n - 2}], got {bad}")
        if sum(counts) < n * n - 1:
            raise InvalidConfigurationError(f"c_layout provides {sum(counts)} < {n * n - 1} phases")
        masks = [np.arange(n) < c for c in counts]
    else:
        raise InvalidConfigurationError(f"unknown variant {variant!r}")
    return LayeredArchitecture(n, tuple(_mixers(n, len(masks) - 1, mixing, rng)), tuple(masks), variant)


def truncate_layers(arch: LayeredArchitecture, phase_layers: int) -> LayeredArchitecture:
    """Keep the first ``phase_layers`` phase layers (and the mixers between them)."""
    if not 1 <= phase_layers <= len(arch.masks):
        raise InvalidConfigurationError(f"phase_layers must be in [1, {len(arch.masks)}]")
    return LayeredArchitecture(
        arch.n, arch.mixing[: phase_layers - 1], arch.masks[:phase_layers], arch.variant
    )


# ---------------------------------------------------------------------------
# MZI mesh


def beam_splitter(eta: float) -> np.ndarray:
    c, s = np.cos(eta), np.sin(eta)
    return np.array([[c, 1j * s], [1j * s, c]])


def mzi_matrix(theta: float, phi: float, bias1: float = 0.0, bias2: float = 0.0) -> np.ndarray:
    """BS(pi/4 + bias2) . P(theta) . BS(pi/4 + bias1) . P(phi), P acting on the top arm."""
    p_theta = np.diag([np.exp(1j * theta), 1.0])
    p_phi = np.diag([np.exp(1j * phi), 1.0])
    return beam_splitter(np.pi / 4 + bias2) @ p_theta @ beam_splitter(np.pi / 4 + bias1) @ p_phi


def mzi_columns(n: int) -> list[list[int]]:
    """Top channels of the MZIs in each non-empty column of the rectangular mesh."""
    cols = [list(range(c % 2, n - 1, 2)) for c in range(n)]
    return [c for c in cols if c]


@dataclass(frozen=True, eq=False)
class MZIMesh:
    """Rectangular mesh of n(n-1)/2 MZIs plus an output phase column.

    ``bias`` holds one angle per physical splitter in radians, ordered
    MZI by MZI (column-major, top to bottom) as (BS1, BS2). Phase vectors for
    the mesh run column by column: the column's phi values, then its theta
    values, and finally the n output phases.
    """

    n: int
    bias: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.n < 2:
            raise InvalidDimensionError("a mesh needs n >= 2")
        b = np.zeros(self.n * (self.n - 1)) if self.bias is None else np.array(self.bias, dtype=float)
        if b.shape != (self.n * (self.n - 1),):
            raise InvalidConfigurationError(f"expected {self.n * (self.n - 1)} bias angles, got {b.shape}")
        b.flags.writeable = False
        object.__setattr__(self, "bias", b)

    @property
    def n_mzi(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def n_phases(self) -> int:
        return self.n * self.n

    @cached_property
    def layered(self) -> LayeredArchitecture:
        n = self.n
        bias = self.bias.reshape(-1, 2)
        mixing, masks = [], []
        k = 0
        for tops in mzi_columns(n):
            mask = np.zeros(n, dtype=bool)
            mask[tops] = True
            splitters = []
            for stage in range(2):
                v = np.eye(n, dtype=complex)
                for i, t in enumerate(tops):
                    v[t : t + 2, t : t + 2] = beam_splitter(np.pi / 4 + bias[k + i, stage])
                splitters.append(v)
            masks += [mask, mask]
            mixing += splitters
            k += len(tops)
        masks.append(np.ones(n, dtype=bool))
        return LayeredArchitecture(n, tuple(mixing), tuple(masks), "mesh")

    def pack_phases(self, theta, phi, output) -> np.ndarray:
        """Flatten per-MZI (theta, phi) in MZI order plus output phases."""
        theta, phi = np.asarray(theta, float), np.asarray(phi, float)
        parts, k = [], 0
        for tops in mzi_columns(self.n):
            s = slice(k, k + len(tops))
            parts += [phi[s], theta[s]]
            k += len(tops)
        parts.append(np.asarray(output, float))
        return np.concatenate(parts)


def clements_transfer(mesh: MZIMesh, phases) -> np.ndarray:
    return layered_transfer(mesh.layered, phases)


def apply_bias_model(n: int, model: str, range_deg: float, rng: RngSeed | np.random.Generator) -> MZIMesh:
    """Splitter bias error models.

    I: one angle uniform in [0, range] shared by every splitter;
    II: independent angles uniform in [-range, range];
    III: independent angles uniform in [0, range].
    """
    if range_deg < 0:
        raise ValueError("range_deg must be >= 0")
    gen = rng.generator() if isinstance(rng, RngSeed) else rng
    count = n * (n - 1)
    hi = np.deg2rad(range_deg)
    if model == "I":
        bias = np.full(count, gen.uniform(0.0, hi))
    elif model == "II":
        bias = gen.uniform(-hi, hi, count)
    elif model == "III":
        bias = gen.uniform(0.0, hi, count)
    else:
        raise InvalidConfigurationError(f"unknown bias model {model!r}")
    return MZIMesh(n, bias)


def transfer(arch, phases) -> np.ndarray:
    """Transfer matrix of a layered scheme or an MZI mesh."""
    if isinstance(arch, MZIMesh):
        return clements_transfer(arch, phases)
    return layered_transfer(arch, phases)


def as_layered(arch) -> LayeredArchitecture:
    return arch.layered if isinstance(arch, MZIMesh) else arch


# ---------------------------------------------------------------------------
# coupled waveguides


@dataclass(frozen=True)
class WaveguideArray:
    n: int
    beta: float
    c: float
    z: float

    def __post_init__(self):
        if self.n < 2:
            raise InvalidDimensionError("a coupler needs n >= 2")
        if self.z < 0:
            raise ValueError("interaction length must be >= 0")


def coupled_mode_transfer(w: WaveguideArray) -> np.ndarray:
    """expm(-i z (beta I + c (J - I))) for n equally coupled waveguides."""
    h = w.beta * np.eye(w.n) + w.c * (np.ones((w.n, w.n)) - np.eye(w.n))
    return expm(-1j * w.z * h)


def tritter_closed_form(beta: float, k: float, z: float) -> np.ndarray:
    d = np.exp(-2j * k * z) + 2 * np.exp(1j * k * z)
    b = np.exp(-2j * k * z) - np.exp(1j * k * z)
    m = np.full((3, 3), b, dtype=complex)
    np.fill_diagonal(m, d)
    return np.exp(-1j * beta * z) * m / 3


def balanced_coupling_length(n: int) -> float:
    """Value of c*z at which every output modulus of the all-to-all coupler is 1/sqrt(n).

    Only n <= 4 admit one: it needs cos(n c z) = -(n - 2)/2.
    """
    ratio = -(n - 2) / 2
    if n < 2 or ratio < -1:
        raise InvalidConfigurationError(f"no balanced all-to-all coupler exists for n={n}")
    return float(np.arccos(ratio) / n)


def dephase(u) -> np.ndarray:
    """Canonical representative of u under left/right diagonal phase matrices.

    Makes the first row and column real positive (up to the common corner
    phase). Requires those entries to be nonzero.
    """
    a = np.asarray(u, dtype=complex)
    col = a[:, 0] / np.abs(a[:, 0])
    row = a[0, :] / np.abs(a[0, :])
    return a * np.conj(col)[:, None] * np.conj(row)[None, :] * (a[0, 0] / abs(a[0, 0]))


def phase_aligned_residual(u, v) -> float:
    """max |entry| difference once diagonal phase freedom on both sides is removed."""
    return float(np.max(np.abs(dephase(u) - dephase(v))))


# ---------------------------------------------------------------------------
# perturbed mixers


def perturb_mixing(v0, r, alpha: float) -> np.ndarray:
    """Unitary part of (1 - alpha) v0 + alpha r."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    v0, r = np.asarray(v0), np.asarray(r)
    if v0.shape != r.shape:
        raise ValueError(f"shape mismatch {v0.shape} vs {r.shape}")
    return nearest_unitary((1.0 - alpha) * v0 + alpha * r)


def similarity(v0s, vas) -> float:
    """Mean block fidelity between unperturbed and perturbed mixers."""
    if len(v0s) != len(vas) or not len(v0s):
        raise ValueError("need two equal-length, non-empty sequences")
    return float(np.mean([fidelity(a, b) for a, b in zip(v0s, vas)]))
