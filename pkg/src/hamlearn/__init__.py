"""Sparse Hamiltonian learning under a minimum evolution time.

Simulates learning an unknown sparse Pauli Hamiltonian from black-box
time evolution that can never be queried for less than a fixed duration,
and numerically certifies every inequality the construction rests on.
"""

from .dense import (
    BranchAmbiguityWarning,
    NotHermitian,
    NotUnitary,
    expm_i,
    normalized_frobenius,
    operator_norm,
    pauli_decompose,
    to_dense,
    traceless_log,
    unitary_distance,
)
from .emulation import (
    BchTruncation,
    ConvergenceError,
    IntegerEvolutionAccess,
    RegimeError,
    bch_degree_constant,
    bch_term,
    bch_truncated_generator,
    correction_access,
    correction_generator,
    correction_unitary,
    integer_evol_learn,
    residual_unitary,
)
from .learner import (
    IterationRecord,
    LearnReport,
    RegimeParams,
    main_learn,
    regime_params,
    sparse_ham_learn,
    sql_learn,
)
from .oracle import EvolutionOracle, MinimumTimeViolation, QueryLedger
from .pauli import (
    DimensionMismatch,
    PauliExpansion,
    PauliLabel,
    SparseHamiltonian,
    SpanBasis,
    coefficient_norms,
    f2_span,
    format_hamiltonian_text,
    parse_hamiltonian_text,
    pauli_mul,
    random_sparse_hamiltonian,
    truncate_sparse_bounded,
)
from .tomography import (
    StateAccess,
    TomographyResult,
    choi_amplitudes,
    heavy_hitters,
    restricted_tomography,
    sparse_tomo_l2,
    sparse_tomo_linf,
)
from .verify import CheckReport, CheckSpec, run_all, run_check

__version__ = "0.1.0"

__all__ = [
    "BchTruncation",
    "BranchAmbiguityWarning",
    "CheckReport",
    "CheckSpec",
    "ConvergenceError",
    "DimensionMismatch",
    "EvolutionOracle",
    "IntegerEvolutionAccess",
    "IterationRecord",
    "LearnReport",
    "MinimumTimeViolation",
    "NotHermitian",
    "NotUnitary",
    "PauliExpansion",
    "PauliLabel",
    "QueryLedger",
    "RegimeError",
    "RegimeParams",
    "SpanBasis",
    "SparseHamiltonian",
    "StateAccess",
    "TomographyResult",
    "bch_degree_constant",
    "bch_term",
    "bch_truncated_generator",
    "choi_amplitudes",
    "coefficient_norms",
    "correction_access",
    "correction_generator",
    "correction_unitary",
    "expm_i",
    "f2_span",
    "format_hamiltonian_text",
    "heavy_hitters",
    "integer_evol_learn",
    "main_learn",
    "normalized_frobenius",
    "operator_norm",
    "parse_hamiltonian_text",
    "pauli_decompose",
    "pauli_mul",
    "random_sparse_hamiltonian",
    "regime_params",
    "residual_unitary",
    "restricted_tomography",
    "run_all",
    "run_check",
    "sparse_ham_learn",
    "sparse_tomo_l2",
    "sparse_tomo_linf",
    "sql_learn",
    "to_dense",
    "traceless_log",
    "truncate_sparse_bounded",
    "unitary_distance",
]
