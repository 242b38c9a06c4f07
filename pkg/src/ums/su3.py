"""SU(3) structure of the four-phase-layer tritter circuit.

The circuit is ``U = Phi(p1, p2) T Phi(p3, p4) T Phi(p5, p6) T Phi(p7, p8)``
(optionally with one more T on the left) with
``Phi(a, b) = diag(e^{ia}, e^{ib}, e^{-i(a+b)})``. The Gell-Mann matrices use
the anti-Hermitian convention in which lambda_7, lambda_8 are the diagonal
pair.
"""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .linalg import expm
from .optimizer import OptimizerConfig, basin_hopping

W = np.exp(2j * np.pi / 3)
TRITTER = (-1j / np.sqrt(3)) * np.array([[1, 1, 1], [1, W, W**2], [1, W**2, W]])
TRITTER_GENERATOR_SCALE = np.sqrt(3) * np.pi / 12

# d Phi / d(first, second) parameter, as a multiple of Phi
_DIAG_GENERATORS = (np.diag([1j, 0, -1j]), np.diag([0, 1j, -1j]))


def gellmann() -> np.ndarray:
    """The eight basis matrices, stacked as an (8, 3, 3) array."""
    i = 1j
    return np.array(
        [
            [[0, i, 0], [i, 0, 0], [0, 0, 0]],
            [[0, 0, i], [0, 0, 0], [i, 0, 0]],
            [[0, 0, 0], [0, 0, i], [0, i, 0]],
            [[0, 1, 0], [-1, 0, 0], [0, 0, 0]],
            [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
            [[0, 0, 0], [0, 0, 1], [0, -1, 0]],
            [[-2 * i, 0, 0], [0, i, 0], [0, 0, i]],
            [[0, 0, 0], [0, i, 0], [0, 0, -i]],
        ],
        dtype=complex,
    )


LAMBDA = gellmann()
# real 18 x 8 design matrix: columns are the basis matrices split into (re, im)
_BASIS_REAL = np.vstack([LAMBDA.reshape(8, 9).real.T, LAMBDA.reshape(8, 9).imag.T])


def algebra_coefficients(x) -> tuple[np.ndarray, float]:
    """Real coordinates of a 3x3 matrix in the Gell-Mann basis, and the fit residual."""
    x = np.asarray(x, dtype=complex).reshape(9)
    rhs = np.concatenate([x.real, x.imag])
    coef, *_ = np.linalg.lstsq(_BASIS_REAL, rhs, rcond=None)
    return coef, float(np.max(np.abs(_BASIS_REAL @ coef - rhs)))


def tritter_from_generator() -> np.ndarray:
    l1, l2, l3, _, _, _, l7, _ = LAMBDA
    return expm(TRITTER_GENERATOR_SCALE * (l7 - 2 * l1 - 2 * l2 + l3))


def conjugation_identities(t=None) -> tuple[float, float]:
    """Max residuals of -T l7 T^-1 = l1 + l2 + l3 and -sqrt(3) T l8 T^-1 = l4 - l5 + l6."""
    t = TRITTER if t is None else np.asarray(t)
    t_inv = np.linalg.inv(t)
    l1, l2, l3, l4, l5, l6, l7, l8 = LAMBDA
    r7 = np.max(np.abs(-t @ l7 @ t_inv - (l1 + l2 + l3)))
    r8 = np.max(np.abs(-np.sqrt(3) * t @ l8 @ t_inv - (l4 - l5 + l6)))
    return float(r7), float(r8)


def phase_gate(a: float, b: float) -> np.ndarray:
    return np.diag(np.exp(1j * np.array([a, b, -(a + b)])))


def _layers(p, leading_tritter):
    p = np.asarray(p, dtype=float)
    if p.shape != (8,):
        raise ValueError(f"expected 8 phases, got shape {p.shape}")
    gates = [phase_gate(p[2 * k], p[2 * k + 1]) for k in range(4)]
    return gates, (TRITTER if leading_tritter else np.eye(3))


def su3_circuit(p, leading_tritter: bool = False) -> np.ndarray:
    gates, head = _layers(p, leading_tritter)
    u = gates[0]
    for g in gates[1:]:
        u = u @ TRITTER @ g
    return head @ u


def tangent_vectors(p) -> np.ndarray:
    """X_a = U^-1 dU/dp_a for the eight phases, as an (8, 3, 3) array.

    Differentiating the gate at layer k gives ``U X = A Phi D B`` with B the
    product to its right, hence ``X = B^dag D B``; the optional leading
    tritter drops out.
    """
    gates, _ = _layers(p, False)
    out = np.empty((8, 3, 3), dtype=complex)
    right = np.eye(3, dtype=complex)
    for k in range(3, -1, -1):
        for s, d in enumerate(_DIAG_GENERATORS):
            out[2 * k + s] = right.conj().T @ d @ right
        right = TRITTER @ gates[k] @ right
    return out


def tangent_coefficients(p) -> np.ndarray:
    """8 x 8 real matrix whose row a holds X_a in the Gell-Mann basis."""
    return np.array([algebra_coefficients(x)[0] for x in tangent_vectors(p)])


def tangent_rank(p, tol: float = 1e-8) -> int:
    s = np.linalg.svd(tangent_coefficients(p), compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def killing_metric(p) -> np.ndarray:
    """g_mn = Tr(X_m X_n); real because the X are anti-Hermitian."""
    x = tangent_vectors(p)
    g = np.einsum("mij,nji->mn", x, x).real
    return 0.5 * (g + g.T)


def conjugated_tritter(a_phase: float, b_phase: float) -> np.ndarray:
    """Phi(p1, p2) T Phi(p1, p2)^dag."""
    ph = phase_gate(a_phase, b_phase)
    return ph @ TRITTER @ ph.conj().T


def conjugated_tritter_generator(a_phase: float, b_phase: float) -> np.ndarray:
    """Closed-form log of :func:`conjugated_tritter`.

    With a = p1 - p2 and b = 2 p1 + p2 the (2, 3) entry picks up the phase
    b - a = p1 + 2 p2, which fixes the sign of the lambda_6 term.
    """
    l1, l2, l3, l4, l5, l6, l7, _ = LAMBDA
    a = a_phase - b_phase
    b = 2 * a_phase + b_phase
    return TRITTER_GENERATOR_SCALE * (
        l7
        - 2 * np.cos(a) * l1
        + 2 * np.sin(a) * l4
        - 2 * np.cos(b) * l2
        + 2 * np.sin(b) * l5
        + np.cos(b - a) * l3
        - np.sin(b - a) * l6
    )


def factored_circuit(p) -> np.ndarray:
    """The circuit rebuilt as e^{A1} e^{A2} e^{A3} Phi(sum odd, sum even).

    Each A_k is the generator of the tritter conjugated by the running sum
    of the phase gates to its left.
    """
    p = np.asarray(p, dtype=float)
    cum = np.cumsum(p.reshape(4, 2), axis=0)
    u = np.eye(3, dtype=complex)
    for k in range(3):
        u = u @ expm(conjugated_tritter_generator(*cum[k]))
    return u @ phase_gate(*cum[3])


class FrobeniusObjective:
    """||U(p) - M||_F^2 for the circuit, with gradient via the tangent vectors."""

    def __init__(self, target, leading_tritter: bool = True):
        self.target = np.asarray(target, dtype=complex)
        self.leading_tritter = leading_tritter
        self.n_params = 8
        self.evaluations = 0

    def value_and_grad(self, p):
        self.evaluations += 1
        u = su3_circuit(p, self.leading_tritter)
        diff = u - self.target
        value = float(np.vdot(diff, diff).real)
        du = u[None] @ tangent_vectors(p)
        grad = 2.0 * np.real(np.einsum("ij,aij->a", diff.conj(), du))
        return value, grad


def local_solvability(u0, eps: float, cfg: OptimizerConfig | None = None, slack: float = 10.0):
    """Try to hit U0 (I + eps lambda_i) for every basis direction.

    Direction i counts as solvable when some phase point lands within
    ``slack * eps^2`` of the target in max-entry norm (plus a 1e-8 floor for
    the eps = 0 case). Returns the flags and the residuals.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    cfg = cfg or OptimizerConfig(restarts=5, hops=20)
    u0 = np.asarray(u0, dtype=complex)
    bound = slack * eps**2 + 1e-8
    flags, residuals = [], []
    for i, lam in enumerate(LAMBDA):
        target = u0 @ (np.eye(3) + eps * lam)
        obj = FrobeniusObjective(target)
        run_cfg = replace(
            cfg,
            local_tol=min(cfg.local_tol, 1e-3 * bound**2),
            target_infidelity=(bound / 3) ** 2,
            rng=cfg.rng.spawn(i),
        )
        res = basin_hopping(obj, run_cfg)
        r = float(np.max(np.abs(su3_circuit(res.phases, True) - target)))
        residuals.append(r)
        flags.append(r <= bound)
    return flags, residuals
