"""Exact dense kernels: Pauli (de)composition, spectral exponentials and
logarithms, and the operator norms used throughout.

Everything here works on plain ``numpy`` arrays of shape (2^n, 2^n); the
qubit cap keeps accidental exponential blow-ups from leaving the desk.
"""

from __future__ import annotations

import warnings
from functools import lru_cache

import numpy as np
import scipy.linalg

from .pauli import COEFF_CUTOFF, PauliExpansion, PauliLabel, SparseHamiltonian

DENSE_QUBIT_CAP = 8
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
BRANCH_GAP = 1e-6

_SIGMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
# _BASIS[p, a, b] = sigma_p[b, a]; contracting both indices of a matrix
# against this computes tr(sigma_p M) one qubit at a time.
_BASIS = _SIGMA.transpose(0, 2, 1).copy()


class NotHermitian(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class NotUnitary(ValueError):
    """Input matrix is not unitary within tolerance."""


class BranchAmbiguityWarning(UserWarning):
    """An eigenphase sits close to the branch cut at pi."""


def _qubits(m: np.ndarray) -> int:
    dim = m.shape[0]
    if m.ndim != 2 or m.shape[1] != dim or dim < 2 or dim & (dim - 1):
        raise ValueError(f"expected a square 2^n x 2^n matrix, got shape {m.shape}")
    return dim.bit_length() - 1


def assert_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    gap = np.max(np.abs(m - m.conj().T))
    if gap > tol:
        raise NotHermitian(f"Hermiticity gap {gap:.3e} exceeds {tol:.1e}")


def assert_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> None:
    dim = m.shape[0]
    gap = np.max(np.abs(m.conj().T @ m - np.eye(dim)))
    if gap > tol:
        raise NotUnitary(f"unitarity gap {gap:.3e} exceeds {tol:.1e}")


@lru_cache(maxsize=16384)
def label_matrix(label: PauliLabel) -> np.ndarray:
    """Dense matrix of one Pauli label (qubit 0 = most significant factor)."""
    if label.n > DENSE_QUBIT_CAP:
        raise ValueError(f"n={label.n} exceeds dense cap {DENSE_QUBIT_CAP}")
    out = np.array([[1.0 + 0.0j]])
    for k in range(label.n):
        p = _AXIS_INDEX[(label.a >> k) & 1, (label.b >> k) & 1]
        out = np.kron(out, _SIGMA[p])
    out.setflags(write=False)
    return out


_AXIS_INDEX = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}


def to_dense(op: SparseHamiltonian | PauliExpansion) -> np.ndarray:
    if op.n > DENSE_QUBIT_CAP:
        raise ValueError(f"n={op.n} exceeds dense cap {DENSE_QUBIT_CAP}")
    dim = 2**op.n
    out = np.zeros((dim, dim), dtype=complex)
    for label, coeff in op.items():
        out += coeff * label_matrix(label)
    return out


@lru_cache(maxsize=16)
def _digit_to_code(n: int) -> np.ndarray:
    """Map base-4 digit indices (qubit 0 most significant, I/X/Y/Z order)
    to packed label codes a | (b << n)."""
    codes = np.empty(4**n, dtype=np.int64)
    for idx in range(4**n):
        a = b = 0
        rem = idx
        for k in range(n - 1, -1, -1):
            p = rem % 4
            rem //= 4
            if p in (1, 2):
                a |= 1 << k
            if p in (2, 3):
                b |= 1 << k
        codes[idx] = a | (b << n)
    codes.setflags(write=False)
    return codes


def pauli_coefficient_vector(m: np.ndarray) -> np.ndarray:
    """All 4^n Pauli coefficients tr(P_x M)/2^n, indexed by packed label code."""
    n = _qubits(m)
    t = np.asarray(m, dtype=complex).reshape((2,) * (2 * n))
    for k in range(n):
        t = np.tensordot(_BASIS, t, axes=([1, 2], [0, n - k]))
        t = np.moveaxis(t, 0, -1)
    digits = t.reshape(4**n) / 2**n
    out = np.empty_like(digits)
    out[_digit_to_code(n)] = digits
    return out


def pauli_decompose(m: np.ndarray) -> PauliExpansion:
    """Expand a matrix in the Pauli basis; coefficients below the global
    cutoff are dropped."""
    n = _qubits(m)
    vec = pauli_coefficient_vector(m)
    terms = {
        PauliLabel.from_code(n, int(code)): complex(vec[code])
        for code in np.nonzero(np.abs(vec) >= COEFF_CUTOFF)[0]
    }
    return PauliExpansion(n, terms)


def expm_i(h: np.ndarray, t: float) -> np.ndarray:
    """e^{-iHt} for Hermitian H via spectral decomposition."""
    assert_hermitian(h)
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value (= max |eigenvalue| for normal matrices)."""
    return float(np.linalg.norm(m, 2))


def normalized_frobenius(m: np.ndarray) -> float:
    """sqrt(tr(M^dag M)/2^n); equals the coefficient l2 norm."""
    dim = m.shape[0]
    return float(np.linalg.norm(m, "fro") / np.sqrt(dim))


def unitary_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Normalized Frobenius distance minimized over a global phase.

    Equals sqrt(max(0, 2 - 2|tr(U^dag V)|/2^n)); evaluated as the norm of
    the phase-aligned difference, which is exact near zero where the
    closed form loses half the mantissa to cancellation.
    """
    assert_unitary(u)
    assert_unitary(v)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    overlap = np.trace(u.conj().T @ v)
    phase = np.conj(overlap) / abs(overlap) if abs(overlap) > 0 else 1.0
    return normalized_frobenius(u - phase * v)


def traceless_log(u: np.ndarray) -> tuple[np.ndarray, float]:
    """Traceless Hermitian W and mean phase with e^{-iW} = e^{i phase} U.

    Eigenphases are taken in (-pi, pi] (ties at -pi mapped to +pi) and
    mean-subtracted, which gives ||W|| <= pi ||I - U|| in every unitarily
    invariant norm.  A warning fires when an eigenphase sits within
    ``BRANCH_GAP`` of the cut at pi.
    """
    assert_unitary(u)
    t, q = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    lam = np.diag(t)
    theta = -np.angle(lam)  # in [-pi, pi)
    theta = np.where(theta == -np.pi, np.pi, theta)
    if np.any(np.abs(np.abs(theta) - np.pi) < BRANCH_GAP):
        warnings.warn(
            "eigenphase within 1e-6 of pi; logarithm branch is ambiguous",
            BranchAmbiguityWarning,
            stacklevel=2,
        )
    mean = float(theta.mean())
    w = (q * (theta - mean)) @ q.conj().T
    return 0.5 * (w + w.conj().T), mean
