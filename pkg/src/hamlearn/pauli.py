"""Sparse n-qubit Pauli operators in the symplectic bit-pair encoding.

A label is a pair (a, b) of n-bit integers standing for the operator
``i^(a.b) X^a Z^b``; per qubit this reads I=(0,0), X=(1,0), Y=(1,1),
Z=(0,1).  With this phase fixing every Pauli operator is Hermitian, so
Hermitian operators carry *real* Pauli coefficients and Hamiltonians
stay real-valued end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

COEFF_CUTOFF = 1e-14
"""Coefficients with magnitude below this are dropped on construction."""

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)
_AXIS_FROM_BITS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS_FROM_AXIS = {v: k for k, v in _AXIS_FROM_BITS.items()}


class DimensionMismatch(ValueError):
    """Operands act on different qubit counts."""


def as_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Coerce a seed (or an existing generator) into a ``numpy`` Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, order=True)
class PauliLabel:
    """Symplectic label of one n-qubit Pauli operator.

    Bit k of ``a`` marks an X factor on qubit k, bit k of ``b`` a Z
    factor; both bits set give Y.  Qubit 0 is the leftmost character in
    string form.
    """

    n: int
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")
        mask = (1 << self.n) - 1
        if self.a & ~mask or self.b & ~mask or self.a < 0 or self.b < 0:
            raise ValueError(f"bits out of range for n={self.n}: a={self.a}, b={self.b}")

    @classmethod
    def identity(cls, n: int) -> "PauliLabel":
        return cls(n, 0, 0)

    @classmethod
    def from_string(cls, s: str) -> "PauliLabel":
        a = b = 0
        for k, ch in enumerate(s):
            try:
                xa, xb = _BITS_FROM_AXIS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli axis {ch!r} in {s!r}") from None
            a |= xa << k
            b |= xb << k
        return cls(len(s), a, b)

    @classmethod
    def from_code(cls, n: int, code: int) -> "PauliLabel":
        mask = (1 << n) - 1
        return cls(n, code & mask, code >> n)

    @property
    def code(self) -> int:
        """Packed integer a | (b << n); identity has code 0."""
        return self.a | (self.b << self.n)

    @property
    def is_identity(self) -> bool:
        return self.a == 0 and self.b == 0

    def __str__(self) -> str:
        return "".join(
            _AXIS_FROM_BITS[((self.a >> k) & 1, (self.b >> k) & 1)] for k in range(self.n)
        )

    def __repr__(self) -> str:
        return f"PauliLabel({str(self)!r})"


def pauli_mul(x: PauliLabel, y: PauliLabel) -> tuple[complex, PauliLabel]:
    """Product of two Pauli operators: P_x P_y = phase * P_{x xor y}.

    The phase is one of {1, i, -1, -i} and follows from commuting the Z
    part of x past the X part of y and re-absorbing the i^(a.b) factors.
    """
    if x.n != y.n:
        raise DimensionMismatch(f"qubit counts differ: {x.n} vs {y.n}")
    a = x.a ^ y.a
    b = x.b ^ y.b
    k = (x.a & x.b).bit_count() + (y.a & y.b).bit_count() - (a & b).bit_count()
    k += 2 * (x.b & y.a).bit_count()
    return _PHASES[k % 4], PauliLabel(x.n, a, b)


def _clean_terms(
    n: int,
    terms: Mapping[PauliLabel, complex] | Iterable[tuple[PauliLabel, complex]],
    *,
    real: bool,
    allow_identity: bool,
) -> dict[PauliLabel, complex]:
    items = terms.items() if isinstance(terms, Mapping) else terms
    out: dict[PauliLabel, complex] = {}
    for label, coeff in items:
        if label.n != n:
            raise DimensionMismatch(f"label {label} has n={label.n}, expected {n}")
        if real:
            coeff = float(np.real_if_close(coeff)) if not isinstance(coeff, (int, float)) else float(coeff)
        else:
            coeff = complex(coeff)
        if abs(coeff) < COEFF_CUTOFF:
            continue
        if label.is_identity and not allow_identity:
            raise ValueError("identity term not allowed in a traceless Hamiltonian")
        if label in out:
            raise ValueError(f"duplicate label {label}")
        out[label] = coeff
    return {k: out[k] for k in sorted(out)}


class SparseHamiltonian:
    """Real Pauli polynomial without identity component (traceless)."""

    __slots__ = ("n", "_terms")

    def __init__(
        self,
        n: int,
        terms: Mapping[PauliLabel, float] | Iterable[tuple[PauliLabel, float]] = (),
    ):
        self.n = int(n)
        self._terms: dict[PauliLabel, float] = {
            k: float(v) for k, v in _clean_terms(n, terms, real=True, allow_identity=False).items()
        }

    @classmethod
    def zero(cls, n: int) -> "SparseHamiltonian":
        return cls(n, ())

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]]) -> "SparseHamiltonian":
        pairs = list(pairs)
        if not pairs:
            raise ValueError("empty pair list; use SparseHamiltonian.zero(n)")
        labels = [(PauliLabel.from_string(s), c) for s, c in pairs]
        return cls(labels[0][0].n, labels)

    # -- structure ---------------------------------------------------------

    @property
    def supp(self) -> int:
        """Number of stored Pauli terms."""
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def labels(self) -> tuple[PauliLabel, ...]:
        return tuple(self._terms)

    def support_set(self) -> frozenset[PauliLabel]:
        return frozenset(self._terms)

    def items(self) -> Iterator[tuple[PauliLabel, float]]:
        return iter(self._terms.items())

    def coefficient(self, label: PauliLabel) -> float:
        return self._terms.get(label, 0.0)

    def terms(self) -> dict[PauliLabel, float]:
        return dict(self._terms)

    # -- norms --------------------------------------------------------------

    @property
    def norm_l1(self) -> float:
        return float(sum(abs(c) for c in self._terms.values()))

    @property
    def norm_l2(self) -> float:
        """Coefficient l2 norm; equals the normalized Frobenius norm."""
        return float(np.sqrt(sum(c * c for c in self._terms.values())))

    @property
    def norm_linf(self) -> float:
        return float(max((abs(c) for c in self._terms.values()), default=0.0))

    def linf_distance(self, other: "SparseHamiltonian") -> float:
        if other.n != self.n:
            raise DimensionMismatch(f"qubit counts differ: {self.n} vs {other.n}")
        keys = set(self._terms) | set(other._terms)
        return max((abs(self.coefficient(k) - other.coefficient(k)) for k in keys), default=0.0)

    # -- arithmetic ----------------------------------------------------------

    def _combined(self, other: "SparseHamiltonian", sign: float) -> "SparseHamiltonian":
        if other.n != self.n:
            raise DimensionMismatch(f"qubit counts differ: {self.n} vs {other.n}")
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc.get(k, 0.0) + sign * v
        return SparseHamiltonian(self.n, acc)

    def __add__(self, other: "SparseHamiltonian") -> "SparseHamiltonian":
        return self._combined(other, 1.0)

    def __sub__(self, other: "SparseHamiltonian") -> "SparseHamiltonian":
        return self._combined(other, -1.0)

    def __mul__(self, scalar: float) -> "SparseHamiltonian":
        return SparseHamiltonian(self.n, {k: scalar * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "SparseHamiltonian":
        return self * -1.0

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SparseHamiltonian)
            and self.n == other.n
            and self._terms == other._terms
        )

    def __hash__(self):  # pragma: no cover - mutable-mapping semantics not needed
        return hash((self.n, tuple(self._terms.items())))

    def allclose(self, other: "SparseHamiltonian", tol: float = 1e-12) -> bool:
        return self.n == other.n and self.linf_distance(other) <= tol

    def to_expansion(self) -> "PauliExpansion":
        return PauliExpansion(self.n, {k: complex(v) for k, v in self._terms.items()})

    def __repr__(self) -> str:
        body = " + ".join(f"{c:+.6g}*{lab}" for lab, c in self._terms.items())
        return f"SparseHamiltonian({body or '0'})"


def coefficient_norms(h: SparseHamiltonian) -> tuple[float, float, float]:
    """(l1, l2, linf) coefficient norms of a sparse Hamiltonian."""
    return h.norm_l1, h.norm_l2, h.norm_linf


class PauliExpansion:
    """Complex Pauli polynomial; identity component allowed.

    Used for unitary decompositions (where the coefficient at label x is
    tr(P_x U)/2^n) and for anti-Hermitian intermediates in commutator
    series.
    """

    __slots__ = ("n", "_terms")

    def __init__(
        self,
        n: int,
        terms: Mapping[PauliLabel, complex] | Iterable[tuple[PauliLabel, complex]] = (),
    ):
        self.n = int(n)
        self._terms: dict[PauliLabel, complex] = _clean_terms(
            n, terms, real=False, allow_identity=True
        )

    @classmethod
    def zero(cls, n: int) -> "PauliExpansion":
        return cls(n, ())

    @classmethod
    def from_hamiltonian(cls, h: SparseHamiltonian) -> "PauliExpansion":
        return h.to_expansion()

    @property
    def supp(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def labels(self) -> tuple[PauliLabel, ...]:
        return tuple(self._terms)

    def items(self) -> Iterator[tuple[PauliLabel, complex]]:
        return iter(self._terms.items())

    def coefficient(self, label: PauliLabel) -> complex:
        return self._terms.get(label, 0.0 + 0.0j)

    def terms(self) -> dict[PauliLabel, complex]:
        return dict(self._terms)

    @property
    def norm_l2(self) -> float:
        """Coefficient l2 norm; for a unitary's expansion this is 1."""
        return float(np.sqrt(sum(abs(c) ** 2 for c in self._terms.values())))

    @property
    def norm_linf(self) -> float:
        return float(max((abs(c) for c in self._terms.values()), default=0.0))

    def _combined(self, other: "PauliExpansion", sign: complex) -> "PauliExpansion":
        if other.n != self.n:
            raise DimensionMismatch(f"qubit counts differ: {self.n} vs {other.n}")
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc.get(k, 0.0) + sign * v
        return PauliExpansion(self.n, acc)

    def __add__(self, other: "PauliExpansion") -> "PauliExpansion":
        return self._combined(other, 1.0)

    def __sub__(self, other: "PauliExpansion") -> "PauliExpansion":
        return self._combined(other, -1.0)

    def __mul__(self, scalar: complex) -> "PauliExpansion":
        return PauliExpansion(self.n, {k: scalar * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliExpansion") -> "PauliExpansion":
        """Operator product, carried out term by term via pauli_mul."""
        if other.n != self.n:
            raise DimensionMismatch(f"qubit counts differ: {self.n} vs {other.n}")
        acc: dict[PauliLabel, complex] = {}
        for x, cx in self._terms.items():
            for y, cy in other._terms.items():
                phase, z = pauli_mul(x, y)
                acc[z] = acc.get(z, 0.0) + cx * cy * phase
        return PauliExpansion(self.n, acc)

    def commutator(self, other: "PauliExpansion") -> "PauliExpansion":
        if other.n != self.n:
            raise DimensionMismatch(f"qubit counts differ: {self.n} vs {other.n}")
        acc: dict[PauliLabel, complex] = {}
        for x, cx in self._terms.items():
            for y, cy in other._terms.items():
                phase_xy, z = pauli_mul(x, y)
                phase_yx, _ = pauli_mul(y, x)
                acc[z] = acc.get(z, 0.0) + cx * cy * (phase_xy - phase_yx)
        return PauliExpansion(self.n, acc)

    def dagger(self) -> "PauliExpansion":
        return PauliExpansion(self.n, {k: np.conj(v) for k, v in self._terms.items()})

    def to_hamiltonian(self, tol: float = 1e-10) -> SparseHamiltonian:
        """Cast to a real traceless Hamiltonian.

        Raises if any coefficient has imaginary part above tol or the
        identity coefficient exceeds tol; both are then discarded.
        """
        out: dict[PauliLabel, float] = {}
        for label, coeff in self._terms.items():
            if abs(coeff.imag) > tol:
                raise ValueError(f"coefficient at {label} not real: {coeff}")
            if label.is_identity:
                if abs(coeff) > tol:
                    raise ValueError(f"identity coefficient {coeff} exceeds tolerance")
                continue
            out[label] = coeff.real
        return SparseHamiltonian(self.n, out)

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})*{lab}" for lab, c in self._terms.items())
        return f"PauliExpansion({body or '0'})"


# -- F2 span ------------------------------------------------------------------


@dataclass(frozen=True)
class SpanBasis:
    """Reduced basis of the F2-linear span of a set of symplectic labels."""

    n: int
    vectors: tuple[int, ...]  # packed (a | b << n), reduced row echelon, sorted

    @property
    def rank(self) -> int:
        return len(self.vectors)

    @property
    def size(self) -> int:
        return 1 << self.rank

    def _reduce(self, v: int) -> int:
        for w in self.vectors:
            v = min(v, v ^ w)
        return v

    def contains(self, label: PauliLabel) -> bool:
        if label.n != self.n:
            raise DimensionMismatch(f"label has n={label.n}, span has n={self.n}")
        return self._reduce(label.code) == 0

    def enumerate_labels(self) -> list[PauliLabel]:
        codes = [0]
        for w in self.vectors:
            codes += [c ^ w for c in codes]
        return [PauliLabel.from_code(self.n, c) for c in sorted(codes)]


def f2_span(labels: Iterable[PauliLabel], n: int | None = None) -> SpanBasis:
    """Gaussian elimination over F2 on the packed (a, b) vectors."""
    labels = list(labels)
    if n is None:
        if not labels:
            raise ValueError("empty label set needs an explicit qubit count")
        n = labels[0].n
    basis: list[int] = []
    for label in labels:
        if label.n != n:
            raise DimensionMismatch(f"label {label} has n={label.n}, expected {n}")
        v = label.code
        for w in basis:
            v = min(v, v ^ w)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    # back-substitute into reduced echelon form for a canonical basis
    reduced: list[int] = []
    for i, v in enumerate(basis):
        for w in basis[i + 1 :]:
            v = min(v, v ^ w)
        reduced.append(v)
    return SpanBasis(n, tuple(sorted(reduced, reverse=True)))


# -- truncation and instance generation ---------------------------------------


def truncate_sparse_bounded(h: SparseHamiltonian, k: int, c: float) -> SparseHamiltonian:
    """Project onto Hamiltonians with at most k terms and operator norm <= c.

    The kept support is the k largest coefficients in magnitude; if the
    restriction still exceeds the norm cap, all kept coefficients are
    scaled down uniformly.  With an inactive norm constraint this is the
    exact nearest point in coefficient sup-distance.
    """
    from .dense import operator_norm, to_dense

    if k < 0:
        raise ValueError(f"sparsity bound must be nonnegative, got {k}")
    if c <= 0:
        raise ValueError(f"norm cap must be positive, got {c}")
    if k == 0 or h.is_zero:
        return SparseHamiltonian.zero(h.n)
    ordered = sorted(h.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
    kept = SparseHamiltonian(h.n, ordered[:k])
    norm = operator_norm(to_dense(kept))
    if norm > c:
        kept = kept * (c / norm)
    return kept


def random_sparse_hamiltonian(
    n: int,
    m: int,
    seed: int | np.random.Generator | None,
    norm_cap: float = 1.0,
) -> SparseHamiltonian:
    """Random m-term traceless Hamiltonian with operator norm <= norm_cap.

    Labels are uniform without replacement over the non-identity strings;
    coefficients are uniform on [-1, 1] bounded away from zero, with a
    global rescale when the dense operator norm exceeds the cap.
    """
    from .dense import operator_norm, to_dense

    if not 1 <= m <= 4**n - 1:
        raise ValueError(f"need 1 <= m <= 4^n - 1, got m={m}, n={n}")
    rng = as_rng(seed)
    codes = rng.choice(4**n - 1, size=m, replace=False) + 1
    coeffs = rng.uniform(-1.0, 1.0, size=m)
    while True:
        small = np.abs(coeffs) < 1e-3
        if not small.any():
            break
        coeffs[small] = rng.uniform(-1.0, 1.0, size=int(small.sum()))
    h = SparseHamiltonian(
        n, {PauliLabel.from_code(n, int(c)): float(v) for c, v in zip(codes, coeffs)}
    )
    norm = operator_norm(to_dense(h))
    if norm > norm_cap:
        h = h * (norm_cap / norm)
    return h


# -- text format ----------------------------------------------------------------


def format_hamiltonian_text(h: SparseHamiltonian) -> str:
    """One `<pauli-string> <coefficient>` line per term, label-sorted."""
    lines = [f"{lab} {coeff!r}" for lab, coeff in h.items()]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_hamiltonian_text(text: str) -> SparseHamiltonian:
    """Parse the term-per-line format; '#' starts a comment line.

    Rejects duplicate labels and identity terms.
    """
    pairs: list[tuple[PauliLabel, float]] = []
    n: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"line {lineno}: expected '<pauli-string> <coefficient>'")
        label = PauliLabel.from_string(fields[0])
        if label.is_identity:
            raise ValueError(f"line {lineno}: identity term not allowed")
        try:
            coeff = float(fields[1])
        except ValueError:
            raise ValueError(f"line {lineno}: bad coefficient {fields[1]!r}") from None
        if n is None:
            n = label.n
        elif label.n != n:
            raise ValueError(f"line {lineno}: qubit count {label.n} != {n}")
        if any(label == p for p, _ in pairs):
            raise ValueError(f"line {lineno}: duplicate label {label}")
        pairs.append((label, coeff))
    if n is None:
        raise ValueError("no terms found")
    return SparseHamiltonian(n, pairs)
