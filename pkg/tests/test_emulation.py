import math

import numpy as np
import pytest

from hamlearn.dense import (
    expm_i,
    normalized_frobenius,
    operator_norm,
    pauli_coefficient_vector,
    to_dense,
    traceless_log,
    unitary_distance,
)
from hamlearn.emulation import (
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
from hamlearn.oracle import EvolutionOracle
from hamlearn.pauli import (
    PauliExpansion,
    SparseHamiltonian,
    f2_span,
    random_sparse_hamiltonian,
)


def nearby_pair(n, m, seed, scale=0.1):
    rng = np.random.default_rng(seed)
    h = random_sparse_hamiltonian(n, m, rng)
    pert = {lab: scale * float(rng.uniform(-1, 1)) for lab, _ in h.items()}
    return h, h + SparseHamiltonian(n, pert)


class TestBchTerm:
    def test_degree_one_is_sum(self):
        x = random_sparse_hamiltonian(2, 2, 1)
        y = random_sparse_hamiltonian(2, 2, 2)
        assert bch_term(x, y, 1).to_hamiltonian().allclose(x + y, 1e-12)

    def test_degree_two_is_half_commutator(self):
        x = random_sparse_hamiltonian(2, 2, 3)
        y = random_sparse_hamiltonian(2, 2, 4)
        ref = (to_dense(x) @ to_dense(y) - to_dense(y) @ to_dense(x)) / 2
        assert np.allclose(to_dense(bch_term(x, y, 2)), ref, atol=1e-12)

    def test_partial_sums_converge_to_dense_log(self):
        scale = 0.1
        x = random_sparse_hamiltonian(2, 2, 5)
        y = random_sparse_hamiltonian(2, 2, 6)
        target = expm_i(to_dense(x), scale) @ expm_i(to_dense(y), scale)
        xa = x.to_expansion() * (-1j * scale)
        ya = y.to_expansion() * (-1j * scale)
        first = prev = None
        acc = PauliExpansion.zero(2)
        for r in range(1, 5):
            acc = acc + bch_term(xa, ya, r)
            approx = expm_i(to_dense((acc * 1j).to_hamiltonian(tol=1e-9)), 1.0)
            dist = unitary_distance(approx, target)
            if prev is not None:
                # a degree can cancel exactly, so require non-increase only
                assert dist <= prev + 1e-12
            first = dist if first is None else first
            prev = dist
        assert prev < 1e-4 * first

    def test_degree_out_of_range(self):
        x = random_sparse_hamiltonian(1, 1, 0)
        with pytest.raises(ValueError):
            bch_term(x, x, 0)
        with pytest.raises(ValueError):
            bch_term(x, x, 7)

    def test_degreewise_frobenius_bound(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(1, 4))
            t = float(rng.choice([0.05, 0.5, 1.0]))
            h, h_est = nearby_pair(n, m, int(rng.integers(0, 2**31)), scale=0.2)
            x = h_est.to_expansion() * (1j * t)
            y = h.to_expansion() * (-1j * t)
            big_m = t * max(operator_norm(to_dense(h)), operator_norm(to_dense(h_est)))
            eps_f = t * (h - h_est).norm_l2
            for r in range(1, 5):
                lhs = bch_term(x, y, r).norm_l2
                assert lhs <= bch_degree_constant(r) * big_m ** (r - 1) * eps_f + 1e-9


class TestCorrectionGenerator:
    def test_exponentiates_to_correction(self):
        h, h_est = nearby_pair(2, 2, 21)
        w = correction_generator(h, h_est, 0.8)
        c = correction_unitary(h, h_est, 0.8)
        assert unitary_distance(expm_i(to_dense(w), -1.0), c) <= 1e-9

    def test_long_time_step_identity_is_exact(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            n = int(rng.integers(1, 4))
            h = random_sparse_hamiltonian(n, int(rng.integers(1, 4)), rng)
            g = random_sparse_hamiltonian(n, int(rng.integers(1, 4)), rng)
            t_min = float(rng.choice([0.05, 1.0]))
            tau = float(rng.uniform(0.0, 1.5))
            lhs = expm_i(to_dense(h), tau) @ expm_i(to_dense(g), -tau)
            rhs = (
                expm_i(to_dense(h), t_min + tau)
                @ correction_unitary(h, g, t_min)
                @ expm_i(to_dense(g), -(t_min + tau))
            )
            assert normalized_frobenius(lhs - rhs) <= 1e-10

    def test_span_containment(self):
        rng = np.random.default_rng(23)
        checked = 0
        while checked < 30:
            n = int(rng.integers(1, 4))
            m = int(rng.integers(1, 4))
            h = random_sparse_hamiltonian(n, m, rng)
            g = random_sparse_hamiltonian(n, m, rng)
            t = float(rng.choice([0.05, 0.5, 1.0]))
            w_dense, _ = traceless_log(correction_unitary(h, g, t))
            if operator_norm(w_dense) >= math.pi - 1e-6:
                continue
            checked += 1
            span = f2_span(list(h.labels()) + list(g.labels()), n)
            assert span.size <= 4**m
            inside = {lab.code for lab in span.enumerate_labels()}
            coeffs = pauli_coefficient_vector(w_dense)
            off = [abs(coeffs[c]) for c in range(4**n) if c not in inside]
            assert max(off, default=0.0) <= 1e-10

    def test_norm_bounds_scale_with_residual(self):
        rng = np.random.default_rng(24)
        for _ in range(30):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(1, 4))
            h, h_est = nearby_pair(n, m, int(rng.integers(0, 2**31)))
            t = float(rng.choice([0.05, 0.5, 1.0]))
            eps = h.linf_distance(h_est)
            w = correction_generator(h, h_est, t)
            assert w.norm_l2 <= 2 * math.pi * t * math.sqrt(m) * eps + 1e-9
            assert operator_norm(to_dense(w)) <= 2 * math.pi * t * m * eps + 1e-9


class TestBchTruncation:
    def test_equal_inputs_give_zero(self):
        h = random_sparse_hamiltonian(2, 2, 31)
        out = bch_truncated_generator(h, h, 0.04, 2)
        assert out.generator.is_zero
        assert out.tail_bound == 0.0

    def test_commuting_pair_exact_at_degree_one(self):
        h = SparseHamiltonian.from_pairs([("Z", 0.4)])
        g = SparseHamiltonian.from_pairs([("Z", 0.1)])
        out = bch_truncated_generator(h, g, 0.02, 1)
        assert out.generator.allclose((h - g) * 0.02, 1e-12)
        c = correction_unitary(h, g, 0.02)
        assert unitary_distance(expm_i(to_dense(out.generator), -1.0), c) <= 1e-10

    def test_gap_within_certified_tail(self):
        for seed in range(20):
            h, h_est = nearby_pair(2, 2, 100 + seed, scale=0.05)
            out = bch_truncated_generator(h, h_est, 0.05, 3)
            w = correction_generator(h, h_est, 0.05)
            assert (w - out.generator).norm_l2 <= out.tail_bound + 1e-12

    def test_sparsity_budget(self):
        h, h_est = nearby_pair(3, 3, 41, scale=0.05)
        out = bch_truncated_generator(h, h_est, 0.03, 3)
        m = max(h.supp, h_est.supp)
        assert out.generator.supp <= 3 * (2 * m) ** 3

    def test_convergence_precondition(self):
        h = SparseHamiltonian.from_pairs([("Z", 1.0)])
        with pytest.raises(ConvergenceError):
            bch_truncated_generator(h, SparseHamiltonian.zero(1), 1.0, 2)


class TestIntegerAccess:
    def test_group_property_up_to_phase(self):
        h = random_sparse_hamiltonian(2, 2, 51)
        est = random_sparse_hamiltonian(2, 2, 52)
        oracle = EvolutionOracle(h, 1.0)
        access = correction_access(oracle, est)
        u1, u2, u3 = access.unitary(1), access.unitary(2), access.unitary(3)
        assert unitary_distance(u1 @ u2, u3) <= 1e-9

    def test_rejects_non_positive_exponent(self):
        h = random_sparse_hamiltonian(1, 1, 0)
        access = correction_access(EvolutionOracle(h, 1.0), h)
        with pytest.raises(ValueError):
            access.unitary(0)


class TestIntegerEvolLearn:
    def mock_access(self, w: SparseHamiltonian, phase: float = 0.0):
        dense = to_dense(w)
        return IntegerEvolutionAccess(
            lambda q, copies: expm_i(dense, float(q)) * np.exp(1j * phase * q), w.n
        )

    def test_parameter_formulas(self):
        w = SparseHamiltonian.from_pairs([("Z", 0.005)])
        _, info = integer_evol_learn(self.mock_access(w), 4, 1.0, 1.0, 1.0, 0.01, 0.05, 0)
        assert info["t"] == 10
        assert info["delta_t"] == pytest.approx(0.01)

    def test_zero_target(self):
        w = SparseHamiltonian.zero(2)
        est, _ = integer_evol_learn(self.mock_access(w), 4, 1.0, 1.0, 1.0, 0.01, 0.05, 1)
        assert est.norm_l2 <= 0.01

    def test_synthetic_target_recovered(self):
        c_f = c_inf = c = 1.0
        eps = 0.01
        w = SparseHamiltonian.from_pairs([("ZI", 0.8 * c_f * eps)])
        est, _ = integer_evol_learn(
            self.mock_access(w, phase=0.37), 4, c_f, c_inf, c, eps, 0.05, 2
        )
        assert (w - est).norm_l2 <= c * eps

    def test_multi_term_target(self):
        c_f, c_inf, c, eps = 2.0, 2.0, 0.5, 0.01
        w = SparseHamiltonian.from_pairs([("XZ", 0.006), ("ZY", -0.009)])
        est, _ = integer_evol_learn(self.mock_access(w), 16, c_f, c_inf, c, eps, 0.05, 3)
        assert (w - est).norm_l2 <= c * eps

    def test_coarse_accuracy_raises_regime_error(self):
        w = SparseHamiltonian.from_pairs([("Z", 0.01)])
        with pytest.raises(RegimeError):
            integer_evol_learn(self.mock_access(w), 4, 1.0, 1.0, 1.0, 0.5, 0.05, 4)


class TestResidualUnitary:
    def test_zero_residual_for_perfect_estimate(self):
        h = random_sparse_hamiltonian(2, 2, 61)
        oracle = EvolutionOracle(h, 1.0)
        w = correction_generator(h, h, 1.0)
        u = residual_unitary(oracle, h, w, duration=0.5, segments=4)
        assert unitary_distance(u, np.eye(4)) <= 1e-8

    def test_exact_rewriting_matches_product_formula(self):
        h = random_sparse_hamiltonian(2, 2, 62)
        est = random_sparse_hamiltonian(2, 2, 63)
        oracle = EvolutionOracle(h, 1.0)
        w = correction_generator(h, est, 1.0)
        t, segments = 0.5, 4
        u = residual_unitary(oracle, est, w, t, segments)
        step = expm_i(to_dense(h), t / segments) @ expm_i(to_dense(est), -t / segments)
        assert unitary_distance(u, np.linalg.matrix_power(step, segments)) <= 1e-9

    def test_residual_within_product_formula_error(self):
        for seed in range(10):
            h, est = nearby_pair(2, 2, 200 + seed, scale=0.2)
            eta = h.linf_distance(est)
            oracle = EvolutionOracle(h, 1.0)
            w = correction_generator(h, est, 1.0)
            t = 0.7
            segments = math.ceil(1.0 / (2 * math.sqrt(2) * max(eta, 1e-3)))
            u = residual_unitary(oracle, est, w, t, segments)
            target = expm_i(to_dense(h - est), t)
            bound = t**2 / segments * math.sqrt(2) * (h - est).norm_l2
            assert unitary_distance(u, target) <= bound + 1e-9

    def test_ledger_charges_segments_at_long_durations(self):
        h = random_sparse_hamiltonian(2, 2, 64)
        oracle = EvolutionOracle(h, 1.0)
        w = correction_generator(h, h, 1.0)
        residual_unitary(oracle, h, w, duration=0.5, segments=4, copies=3)
        led = oracle.ledger()
        assert led.queries == 12
        assert led.t_min == pytest.approx(1.0 + 0.5 / 4)
        assert led.t_tot == pytest.approx(12 * (1.0 + 0.5 / 4))

    def test_never_queries_below_minimum(self):
        h = random_sparse_hamiltonian(2, 2, 65)
        oracle = EvolutionOracle(h, 1.0)
        w = correction_generator(h, h, 1.0)
        residual_unitary(oracle, h, w, duration=1e-6, segments=1)
        assert oracle.violation_attempts == 0
        assert oracle.ledger().t_min >= 1.0
