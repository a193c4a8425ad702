"""Bell-amplitude access to a unitary's Pauli coefficients and two-stage
sparse pure-state tomography (heavy hitters, then interference read-out
on the surviving support).

A unitary U applied to half of a maximally entangled pair, followed by
the Bell-basis decoding, leaves the state sum_x U_x |x> whose amplitudes
are exactly the Pauli coefficients of U.  All routines here work on that
amplitude vector.  In ``exact`` mode amplitudes are read directly and
only the copy count is simulated; in ``sampled`` mode every estimate is
drawn from the measurement distribution it would come from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dense import assert_unitary, pauli_coefficient_vector
from .pauli import PauliLabel, as_rng

C_HH_DEFAULT = 16.0
C_TOMO_DEFAULT = 8.0


@dataclass(frozen=True)
class TomographyResult:
    """Sparse coefficient estimate with its resource accounting.

    ``coeffs`` carries the identity-phase-corrected estimate (identity
    amplitude rotated to the positive real axis and used as reference);
    ``raw_coeffs`` is the same estimate up to one global phase, without
    the reference multiplication.  Labels outside ``support`` are
    implicit zeros.
    """

    coeffs: dict[PauliLabel, complex]
    raw_coeffs: dict[PauliLabel, complex]
    support: tuple[PauliLabel, ...]
    copies_used: int
    delta: float


class StateAccess:
    """Amplitude vector of a decoded Choi state, indexed by Pauli label.

    Modes:
      * ``exact``  - amplitudes are read off directly (sigma > 0 adds one
        complex Gaussian perturbation at construction, renormalized);
      * ``sampled`` - reads happen only through measurement draws.
    """

    def __init__(
        self,
        n: int,
        amplitudes: np.ndarray,
        mode: str = "exact",
        sigma: float = 0.0,
        seed: int | np.random.Generator | None = None,
    ):
        if mode not in ("exact", "sampled"):
            raise ValueError(f"unknown mode {mode!r}")
        if sigma < 0:
            raise ValueError(f"noise scale must be nonnegative, got {sigma}")
        vec = np.asarray(amplitudes, dtype=complex).copy()
        if vec.shape != (4**n,):
            raise ValueError(f"expected 4^n = {4**n} amplitudes, got shape {vec.shape}")
        if sigma > 0:
            rng = as_rng(seed)
            vec = vec + sigma * (
                rng.normal(size=vec.shape) + 1j * rng.normal(size=vec.shape)
            ) / np.sqrt(2)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("zero amplitude vector")
        if sigma > 0:
            vec /= norm
        elif abs(norm - 1.0) > 1e-10:
            raise ValueError(f"amplitude vector not normalized: |norm - 1| = {abs(norm-1):.3e}")
        self.n = int(n)
        self.mode = mode
        self.sigma = float(sigma)
        self._vec = vec

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def amplitude(self, label: PauliLabel) -> complex:
        return complex(self._vec[label.code])

    def amplitudes(self) -> np.ndarray:
        return self._vec.copy()

    def probabilities(self) -> np.ndarray:
        p = np.abs(self._vec) ** 2
        return p / p.sum()

    def sample_counts(self, shots: int, rng: np.random.Generator) -> np.ndarray:
        """Computational-basis measurement of ``shots`` copies."""
        return rng.multinomial(int(shots), self.probabilities())

    def interference_probabilities(self, x: PauliLabel) -> tuple[float, float, float, float]:
        """Outcome probabilities of projecting onto (|0> +- |x>)/sqrt2 and
        (|0> +- i|x>)/sqrt2; their differences expose conj(b0) * bx."""
        b0 = self._vec[0]
        bx = self._vec[x.code]
        p_plus = abs(b0 + bx) ** 2 / 2
        p_minus = abs(b0 - bx) ** 2 / 2
        p_plus_i = abs(b0 - 1j * bx) ** 2 / 2
        p_minus_i = abs(b0 + 1j * bx) ** 2 / 2
        return p_plus, p_minus, p_plus_i, p_minus_i


def choi_amplitudes(
    u: np.ndarray,
    mode: str = "exact",
    sigma: float = 0.0,
    seed: int | np.random.Generator | None = None,
) -> StateAccess:
    """Amplitude access to the decoded Choi state of a unitary.

    The amplitude at label x equals tr(P_x U)/2^n, so this is the Pauli
    decomposition of U presented as a quantum state.
    """
    assert_unitary(u)
    n = u.shape[0].bit_length() - 1
    return StateAccess(n, pauli_coefficient_vector(u), mode=mode, sigma=sigma, seed=seed)


# -- sample-count formulas (shared by execution and ledger accounting) ---------


def heavy_hitter_sample_count(threshold: float, delta: float, c_hh: float = C_HH_DEFAULT) -> int:
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(c_hh / threshold**2 * math.log((1.0 / threshold**2 + 1.0) / delta))


def restricted_shot_count(
    support_size: int, accuracy: float, delta: float, c_tomo: float = C_TOMO_DEFAULT
) -> int:
    """Shots per projective measurement in the restricted read-out."""
    if support_size < 1:
        raise ValueError("support must contain at least the identity label")
    if accuracy <= 0:
        raise ValueError(f"accuracy must be positive, got {accuracy}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(
        c_tomo * support_size * math.log((4 * support_size + 4) / delta) / accuracy**2
    )


def restricted_copies_used(
    support_size: int, accuracy: float, delta: float, c_tomo: float = C_TOMO_DEFAULT
) -> int:
    shots = restricted_shot_count(support_size, accuracy, delta, c_tomo)
    return shots * (4 * (support_size - 1) + 1)


# -- heavy hitters ---------------------------------------------------------------


def heavy_hitters(
    access: StateAccess,
    threshold: float,
    delta: float,
    seed: int | np.random.Generator | None = None,
    c_hh: float = C_HH_DEFAULT,
) -> set[PauliLabel]:
    """Labels whose amplitude magnitude clears ``threshold``.

    With probability at least 1 - delta the result contains every label
    with |amplitude| > threshold and excludes every label with
    |amplitude| < threshold / 2.
    """
    shots = heavy_hitter_sample_count(threshold, delta, c_hh)
    if access.exact:
        mags = np.abs(access.amplitudes())
        codes = np.nonzero(mags >= threshold / 2)[0]
    else:
        rng = as_rng(seed)
        counts = access.sample_counts(shots, rng)
        codes = np.nonzero(counts / shots > threshold**2 / 2)[0]
    return {PauliLabel.from_code(access.n, int(c)) for c in codes}


# -- restricted read-out ----------------------------------------------------------


def restricted_tomography(
    access: StateAccess,
    support: set[PauliLabel] | frozenset[PauliLabel],
    accuracy: float,
    delta: float,
    seed: int | np.random.Generator | None = None,
    c_tomo: float = C_TOMO_DEFAULT,
    budget_size: int | None = None,
) -> dict[PauliLabel, complex]:
    """Estimate the amplitudes on ``support`` up to one global phase.

    Each non-identity amplitude is measured against the identity
    amplitude in four interference bases; the output is normalized so
    the identity entry is real and nonnegative.  The l2 error on the
    support is at most ``accuracy`` with probability 1 - delta (zero in
    exact mode).

    The copy budget is sized for ``budget_size`` support elements
    (default: the actual support) and split evenly over the projections
    actually measured, so callers may budget for a promised sparsity
    bound rather than the discovered support.
    """
    identity = PauliLabel.identity(access.n)
    if identity not in support:
        raise ValueError("support must contain the identity label")
    ordered = sorted(support)
    if access.exact:
        b0 = access.amplitude(identity)
        phase = np.conj(b0) / abs(b0) if abs(b0) > 0 else 1.0
        return {x: phase * access.amplitude(x) for x in ordered}

    rng = as_rng(seed)
    budget = restricted_copies_used(budget_size or len(ordered), accuracy, delta, c_tomo)
    shots = max(1, budget // (4 * (len(ordered) - 1) + 1))
    p0_hat = rng.binomial(shots, min(1.0, abs(access.amplitude(identity)) ** 2)) / shots
    mag0 = math.sqrt(p0_hat)
    out: dict[PauliLabel, complex] = {identity: mag0}
    for x in ordered:
        if x.is_identity:
            continue
        probs = access.interference_probabilities(x)
        p_plus, p_minus, p_plus_i, p_minus_i = (
            rng.binomial(shots, min(1.0, p)) / shots for p in probs
        )
        # differences of the +/- bases give Re and Im of conj(b0)*bx
        z = ((p_plus - p_minus) + 1j * (p_plus_i - p_minus_i)) / 2
        out[x] = z / mag0 if mag0 > 0 else 0.0j
    return out


# -- two-stage sparse tomography ---------------------------------------------------


def _two_stage(
    access: StateAccess,
    s: int,
    eps: float,
    delta: float,
    threshold: float,
    seed: int | np.random.Generator | None,
    c_hh: float,
    c_tomo: float,
) -> TomographyResult:
    if s < 1:
        raise ValueError(f"sparsity bound must be >= 1, got {s}")
    if not 0 < eps:
        raise ValueError(f"accuracy must be positive, got {eps}")
    rng = as_rng(seed)
    threshold = min(threshold, 0.999)
    stage_delta = delta / 3
    support = heavy_hitters(access, threshold, stage_delta, rng, c_hh)
    support.add(PauliLabel.identity(access.n))
    # budget both stages by the promised sparsity bound, not the support found
    budget_size = max(s, 1)
    raw = restricted_tomography(
        access, support, eps / 20, stage_delta, rng, c_tomo, budget_size=budget_size
    )
    identity = PauliLabel.identity(access.n)
    ref = np.conj(raw[identity])
    coeffs = {x: ref * v for x, v in raw.items()}
    copies = heavy_hitter_sample_count(threshold, stage_delta, c_hh) + restricted_copies_used(
        budget_size, eps / 20, stage_delta, c_tomo
    )
    return TomographyResult(
        coeffs=coeffs,
        raw_coeffs=raw,
        support=tuple(sorted(support)),
        copies_used=copies,
        delta=delta,
    )


def sparse_tomo_linf(
    access: StateAccess,
    s: int,
    eps: float,
    delta: float,
    seed: int | np.random.Generator | None = None,
    c_hh: float = C_HH_DEFAULT,
    c_tomo: float = C_TOMO_DEFAULT,
) -> TomographyResult:
    """Sup-norm sparse state tomography.

    Promise: the identity amplitude is within eps/3 of 1 and all but s
    amplitudes are below eps/3 in magnitude.  Output: coefficient-wise
    error at most eps with probability 1 - delta.
    """
    return _two_stage(access, s, eps, delta, 0.75 * eps, seed, c_hh, c_tomo)


def sparse_tomo_l2(
    access: StateAccess,
    s: int,
    eps: float,
    delta: float,
    seed: int | np.random.Generator | None = None,
    c_hh: float = C_HH_DEFAULT,
    c_tomo: float = C_TOMO_DEFAULT,
) -> TomographyResult:
    """l2 sparse state tomography.

    Promise: the identity amplitude is within eps/4 of 1 and the l2 mass
    off a size-s set is at most eps/4.  Output: l2 error at most eps with
    probability 1 - delta.
    """
    return _two_stage(access, s, eps, delta, eps / (2 * math.sqrt(s)), seed, c_hh, c_tomo)


def sample_transcript_csv(
    access: StateAccess, shots: int, seed: int | np.random.Generator | None = None
) -> str:
    """Computational-basis measurement transcript as `label,count` lines.

    Debugging aid; only labels with nonzero counts appear.
    """
    counts = access.sample_counts(shots, as_rng(seed))
    lines = ["label,count"]
    for code in np.nonzero(counts)[0]:
        lines.append(f"{PauliLabel.from_code(access.n, int(code))},{int(counts[code])}")
    return "\n".join(lines) + "\n"
