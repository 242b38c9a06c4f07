"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex128 arrays. Functions that promise a
unitary result validate it against :data:`UNITARY_TOL` before returning.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

UNITARY_TOL = 1e-10
RANK_TOL = 1e-12


class InvalidDimensionError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


@dataclass(frozen=True)
class RngSeed:
    """Reproducible handle on a counter-based (Philox) random stream.

    ``(seed, stream)`` fully determines the draws. :meth:`spawn` derives
    independent child streams without touching the parent, so parallel tasks
    can each own one.
    """

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64 and 0 <= self.stream < 2**64):
            raise ValueError("seed and stream must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(ss))

    def spawn(self, index: int) -> "RngSeed":
        child = np.random.SeedSequence([self.seed, self.stream, index])
        return RngSeed(self.seed, int(child.generate_state(1, np.uint64)[0]))

    def as_list(self) -> list[int]:
        return [self.seed, self.stream]


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def unitarity_error(m) -> float:
    a = _as_square(m)
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    return unitarity_error(m) <= tol


def check_unitary(m, tol: float = UNITARY_TOL) -> np.ndarray:
    """Return ``m`` as a read-only complex array, raising if it is not unitary."""
    a = np.array(_as_square(m), dtype=complex)
    err = unitarity_error(a)
    if err > tol:
        raise NotUnitaryError(f"max |U^dag U - I| = {err:.3e} exceeds {tol:.1e}")
    a.flags.writeable = False
    return a


def haar_random_unitary(n: int, rng: RngSeed | np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary (QR of a Ginibre matrix with phase fix).

    The phases of diag(R) are moved into Q, otherwise the QR convention of
    the LAPACK backend biases the distribution.
    """
    if n < 1:
        raise InvalidDimensionError("n must be >= 1")
    gen = rng.generator() if isinstance(rng, RngSeed) else rng
    z = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def fidelity(u, u_s) -> float:
    """|Tr(u^dag u_s)|^2 / n^2; insensitive to a global phase on either side."""
    a, b = np.asarray(u), np.asarray(u_s)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    n = a.shape[0]
    t = np.vdot(a, b)  # sum conj(a_ij) b_ij == Tr(a^dag b)
    return float(min(1.0, abs(t) ** 2 / n**2))


def nearest_unitary(t) -> np.ndarray:
    """Unitary polar factor W_L W_R of the SVD t = W_L D W_R."""
    a = _as_square(t)
    w_l, s, w_r = np.linalg.svd(a)
    if s[-1] <= RANK_TOL:
        raise DegenerateInputError(f"smallest singular value {s[-1]:.3e} <= {RANK_TOL:.0e}")
    return w_l @ w_r


def expm(a) -> np.ndarray:
    return scipy.linalg.expm(_as_square(a))


def su_normalize(u) -> np.ndarray:
    """Rescale a unitary by a global phase so that det == 1."""
    a = _as_square(u)
    n = a.shape[0]
    return a / np.linalg.det(a) ** (1.0 / n)
