"""Rewriting short evolution steps as minimum-duration queries plus a
learned correction.

For a current estimate G of the hidden H, the unitary
``e^{iHT} e^{-iGT}`` has a traceless Hermitian generator W (so that the
two agree up to a global phase with e^{iW}), and its adjoint is
implementable from forward evolution alone.  Integer powers of that
adjoint give integer-time access to e^{-iWq}, from which W is learned by
sparse state tomography; the learned correction then turns long queries
into residual evolution under H - G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dense import expm_i, operator_norm, pauli_decompose, to_dense, traceless_log
from .oracle import EvolutionOracle
from .pauli import PauliExpansion, SparseHamiltonian, as_rng
from .tomography import (
    C_HH_DEFAULT,
    C_TOMO_DEFAULT,
    choi_amplitudes,
    sparse_tomo_l2,
)

BCH_DEGREE_CAP = 6


class ConvergenceError(ValueError):
    """Inputs violate the convergence window of the commutator series."""


class RegimeError(RuntimeError):
    """Requested accuracy is too coarse for integer-time learning."""


# -- correction unitary and its exact generator --------------------------------


def correction_unitary(h: SparseHamiltonian, estimate: SparseHamiltonian, min_time: float) -> np.ndarray:
    """e^{iHT} e^{-iGT}: the fixed correction that turns a long query into
    a short product-formula step."""
    return expm_i(to_dense(h), -min_time) @ expm_i(to_dense(estimate), min_time)


def correction_generator(
    h: SparseHamiltonian, estimate: SparseHamiltonian, min_time: float
) -> SparseHamiltonian:
    """Traceless Hermitian W with e^{iW} equal to the correction unitary
    up to a global phase, extracted through the spectral logarithm."""
    g, _ = traceless_log(correction_unitary(h, estimate, min_time))
    return pauli_decompose(-g).to_hamiltonian(tol=1e-9)


# -- Dynkin commutator series ---------------------------------------------------


def bch_degree_constant(r: int) -> float:
    """2^(2r-1) r^r / r!, the degree-r coefficient-norm constant."""
    return 2.0 ** (2 * r - 1) * r**r / math.factorial(r)


def _compositions(total: int, blocks: int):
    """Ordered splits of ``total`` into ``blocks`` parts, each >= 1."""
    if blocks == 1:
        yield (total,)
        return
    for first in range(1, total - blocks + 2):
        for rest in _compositions(total - first, blocks - 1):
            yield (first,) + rest


def bch_term(
    x: SparseHamiltonian | PauliExpansion,
    y: SparseHamiltonian | PauliExpansion,
    r: int,
    degree_cap: int = BCH_DEGREE_CAP,
) -> PauliExpansion:
    """Degree-r homogeneous term of log(e^X e^Y) in Dynkin form.

    The sum runs over words X^{r_1} Y^{s_1} ... X^{r_n} Y^{s_n} of total
    length r, each contributing its left-normed commutator weighted by
    (-1)^(n-1) / (n * r * prod r_i! s_i!).  Brackets are memoized on the
    letter word, so the cost is one sparse commutator per distinct word.
    """
    if not 1 <= r <= degree_cap:
        raise ValueError(f"degree must lie in [1, {degree_cap}], got {r}")
    if isinstance(x, SparseHamiltonian):
        x = x.to_expansion()
    if isinstance(y, SparseHamiltonian):
        y = y.to_expansion()
    if x.n != y.n:
        raise ValueError(f"qubit counts differ: {x.n} vs {y.n}")
    ops = (x, y)
    memo: dict[tuple[int, ...], PauliExpansion] = {}

    def bracket(word: tuple[int, ...]) -> PauliExpansion:
        if word not in memo:
            if len(word) == 1:
                memo[word] = ops[word[0]]
            else:
                memo[word] = ops[word[0]].commutator(bracket(word[1:]))
        return memo[word]

    acc = PauliExpansion.zero(x.n)
    for n_blocks in range(1, r + 1):
        sign = -1.0 if n_blocks % 2 == 0 else 1.0
        for split in _compositions(r, n_blocks):
            for r_parts in _block_letter_counts(split):
                word: tuple[int, ...] = ()
                denom = n_blocks * r
                for d, rx in zip(split, r_parts):
                    word += (0,) * rx + (1,) * (d - rx)
                    denom *= math.factorial(rx) * math.factorial(d - rx)
                term = bracket(word)
                if not term.is_zero:
                    acc = acc + term * (sign / denom)
    return acc


def _block_letter_counts(split: tuple[int, ...]):
    """All ways to choose how many leading X letters each block carries."""
    if not split:
        yield ()
        return
    for rx in range(split[0] + 1):
        for rest in _block_letter_counts(split[1:]):
            yield (rx,) + rest


@dataclass(frozen=True)
class BchTruncation:
    """Truncated correction generator with its certified series tail."""

    generator: SparseHamiltonian
    degree: int
    tail_bound: float


def bch_truncated_generator(
    h: SparseHamiltonian,
    estimate: SparseHamiltonian,
    min_time: float,
    k: int,
    degree_cap: int = BCH_DEGREE_CAP,
) -> BchTruncation:
    """Degree-k truncation of the correction generator.

    Computes i * sum_{r<=k} of the Dynkin terms of
    log(e^{iGT} e^{-iHT}), whose negative exponent reproduces the
    adjoint correction; the certified tail bounds the coefficient-l2 gap
    to the exact generator by the remaining geometric series
    sum_{r>k} (4TeC)^r sqrt(m) eps.
    """
    if not 1 <= k <= degree_cap:
        raise ValueError(f"degree must lie in [1, {degree_cap}], got {k}")
    big_c = max(operator_norm(to_dense(h)), operator_norm(to_dense(estimate)))
    ratio = 4.0 * min_time * math.e * big_c
    if ratio >= 1.0:
        raise ConvergenceError(
            f"4*T*e*max_norm = {ratio:.4f} >= 1; shrink T or the operator norms"
        )
    x = estimate.to_expansion() * (1j * min_time)
    y = h.to_expansion() * (-1j * min_time)
    acc = PauliExpansion.zero(h.n)
    for r in range(1, k + 1):
        acc = acc + bch_term(x, y, r, degree_cap)
    generator = (acc * 1j).to_hamiltonian(tol=1e-9)
    m = max(h.supp, estimate.supp, 1)
    eps = h.linf_distance(estimate)
    tail = math.sqrt(m) * eps * ratio ** (k + 1) / (1.0 - ratio)
    if generator.supp > k * (2 * m) ** k:
        raise AssertionError("truncation exceeded its sparsity budget")
    return BchTruncation(generator=generator, degree=k, tail_bound=tail)


# -- integer-time access and learning --------------------------------------------


class IntegerEvolutionAccess:
    """Callable access q -> e^{-iWq}, defined up to a global phase.

    Each unit of q costs one minimum-duration query to the hidden
    dynamics; ``copies`` repeats the charge for identical preparations.
    """

    def __init__(self, fn: Callable[[int, int], np.ndarray], n: int):
        self._fn = fn
        self.n = n

    def unitary(self, q: int, copies: int = 1) -> np.ndarray:
        if q < 1 or q != int(q):
            raise ValueError(f"integer-time access needs a positive integer, got {q}")
        return self._fn(int(q), int(copies))


def correction_access(oracle: EvolutionOracle, estimate: SparseHamiltonian) -> IntegerEvolutionAccess:
    """Integer-time access to the correction generator of the oracle's
    hidden Hamiltonian against ``estimate``."""

    def fn(q: int, copies: int) -> np.ndarray:
        return oracle.correction_adjoint_power(estimate, q, copies)

    return IntegerEvolutionAccess(fn, oracle.n)


def integer_evol_learn(
    access: IntegerEvolutionAccess,
    s: int,
    c_f: float,
    c_inf: float,
    c: float,
    eps: float,
    delta: float,
    seed: int | np.random.Generator | None = None,
    *,
    mode: str = "exact",
    sigma: float = 0.0,
    c_hh: float = C_HH_DEFAULT,
    c_tomo: float = C_TOMO_DEFAULT,
) -> tuple[SparseHamiltonian, dict]:
    """Learn a generator W from integer powers of e^{-iW}.

    Under the promises ||W||_F <= c_f * eps, ||W||_inf <= c_inf * eps and
    quasi-sparsity s at level c*eps/8, the output satisfies
    ||W - West||_F <= c * eps with probability 1 - delta.  The evolution
    exponent is t = floor(c / (10 c_f c_inf eps)); coarser accuracies
    (t < 1) belong to the standard-quantum-limit path.
    """
    rng = as_rng(seed)
    t = math.floor(c / (10.0 * c_f * c_inf * eps))
    if t < 1:
        raise RegimeError(
            f"accuracy eps={eps} is above the integer-time switch point "
            f"{c / (10 * c_f * c_inf):.3e}; use the standard-quantum-limit learner"
        )
    delta_t = c_f * c_inf * t**2 * eps**2
    tomo_eps = 4.0 * delta_t + c * t * eps / 2.0
    u = access.unitary(t, copies=1)
    state = choi_amplitudes(u, mode=mode, sigma=sigma, seed=rng)
    result = sparse_tomo_l2(state, s, tomo_eps, delta, rng, c_hh=c_hh, c_tomo=c_tomo)
    if result.copies_used > 1:
        access.unitary(t, copies=result.copies_used - 1)
    terms = {
        label: -coeff.imag / t
        for label, coeff in result.coeffs.items()
        if not label.is_identity
    }
    west = SparseHamiltonian(access.n, terms)
    info = {
        "t": t,
        "delta_t": delta_t,
        "tomo_accuracy": tomo_eps,
        "copies": result.copies_used,
    }
    return west, info


def residual_unitary(
    oracle: EvolutionOracle,
    estimate: SparseHamiltonian,
    correction: SparseHamiltonian,
    duration: float,
    segments: int,
    copies: int = 1,
) -> np.ndarray:
    """(e^{-iH(T + t/N)} e^{iWest} e^{iG(T + t/N)})^N ~ e^{-i(H-G)t}.

    Every hidden-dynamics query inside has duration T + t/N >= T; one
    application charges N such queries, ``copies`` applications charge
    N * copies.
    """
    if segments < 1:
        raise ValueError(f"segment count must be >= 1, got {segments}")
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    tau = oracle.T + duration / segments
    u_h = oracle.query_evolution(tau, copies=segments * copies)
    step = u_h @ expm_i(to_dense(correction), -1.0) @ expm_i(to_dense(estimate), -tau)
    return np.linalg.matrix_power(step, segments)
