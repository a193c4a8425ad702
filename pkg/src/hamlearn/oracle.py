"""Black-box access to the hidden dynamics, gated at a minimum duration.

The oracle owns the hidden Hamiltonian and releases only unitaries and
resource counters.  Every grant is metered: evolutions under the hidden
generator cost their duration, while simulation of caller-supplied
(known) Hamiltonians is free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import operator_norm, to_dense
from .pauli import SparseHamiltonian


class MinimumTimeViolation(RuntimeError):
    """A query asked for evolution shorter than the oracle's floor."""


@dataclass
class QueryLedger:
    """Running totals of granted evolution time.

    ``t_min`` is None until the first query (min over an empty set is
    undefined); it serializes as null.
    """

    t_tot: float = 0.0
    t_min: float | None = None
    queries: int = 0

    def record(self, duration: float, count: int) -> None:
        self.t_tot += duration * count
        self.queries += count
        self.t_min = duration if self.t_min is None else min(self.t_min, duration)

    def copy(self) -> "QueryLedger":
        return QueryLedger(self.t_tot, self.t_min, self.queries)

    def as_dict(self) -> dict:
        return {
            "t_tot": float(self.t_tot),
            "t_min": None if self.t_min is None else float(self.t_min),
            "queries": int(self.queries),
        }


class EvolutionOracle:
    """Grants e^{-iHt} for the hidden H, only for durations t >= T.

    The ``copies`` argument on both query methods amortizes repeated
    identical preparations: the matrix is computed once while the ledger
    is charged for every copy.
    """

    def __init__(self, hidden: SparseHamiltonian, min_time: float):
        if min_time <= 0:
            raise ValueError(f"minimum evolution time must be positive, got {min_time}")
        dense = to_dense(hidden)
        norm = operator_norm(dense)
        if norm > 1.0 + 1e-9:
            raise ValueError(f"hidden Hamiltonian has operator norm {norm:.6f} > 1")
        self.n = hidden.n
        self.T = float(min_time)
        self.violation_attempts = 0
        self._hidden = hidden
        self._evals, self._evecs = np.linalg.eigh(dense)
        self._ledger = QueryLedger()

    # -- learner-facing surface ---------------------------------------------

    def query_evolution(self, t: float, copies: int = 1) -> np.ndarray:
        """Return e^{-iHt}; the ledger gains ``copies`` queries of duration t."""
        if copies < 1:
            raise ValueError(f"copies must be >= 1, got {copies}")
        if t < self.T:
            self.violation_attempts += 1
            raise MinimumTimeViolation(f"requested t={t} below minimum evolution time {self.T}")
        self._ledger.record(float(t), int(copies))
        return self._evolve(t)

    def correction_adjoint_power(
        self, estimate: SparseHamiltonian, q: int, copies: int = 1
    ) -> np.ndarray:
        """Return (e^{i H_est T} e^{-iHT})^q for a caller-known estimate.

        Each power uses one minimum-duration query to the hidden dynamics,
        so the ledger gains q * copies queries of duration T; simulating
        the known estimate costs nothing.
        """
        if q < 1:
            raise ValueError(f"power must be >= 1, got {q}")
        if copies < 1:
            raise ValueError(f"copies must be >= 1, got {copies}")
        if estimate.n != self.n:
            raise ValueError(f"estimate acts on {estimate.n} qubits, oracle on {self.n}")
        from .dense import expm_i

        self._ledger.record(self.T, int(q) * int(copies))
        step = expm_i(to_dense(estimate), -self.T) @ self._evolve(self.T)
        return np.linalg.matrix_power(step, int(q))

    def ledger(self) -> QueryLedger:
        """Snapshot of the resource counters."""
        return self._ledger.copy()

    # -- internal -------------------------------------------------------------

    def _evolve(self, t: float) -> np.ndarray:
        return (self._evecs * np.exp(-1j * self._evals * t)) @ self._evecs.conj().T
