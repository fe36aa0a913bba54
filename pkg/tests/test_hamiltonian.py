"""Tests for the cost QUBO, the Ising conversion and the energy diagonal."""

import numpy as np
import pytest

from qmsa.core.config import PenaltyConfig
from qmsa.core.errors import InvalidInputError, ResourceCapError
from qmsa.models.alignment import ALPHABET, AlignmentMatrix, Bitstring, SequenceSet
from qmsa.models.qubo import QuboModel
from qmsa.services.encoding import bit_matrix, build_index_map, decode_bitstring, enumerate_feasible
from qmsa.services.hamiltonian import (
    build_cost_qubo,
    build_energy_diagonal,
    cost_breakdown,
    evaluate_ising,
    evaluate_qubo,
    evaluate_qubo_batch,
    qubo_to_ising,
)
from qmsa.services.scoring import MatrixScoring, build_weight_tensor, sp_score


def random_qubo(rng: np.random.Generator, n: int) -> QuboModel:
    return QuboModel.canonical(rng.normal(size=(n, n)), rng.normal(size=n), float(rng.normal()))


def all_states(n: int) -> np.ndarray:
    return bit_matrix(np.arange(1 << n), n)


class TestQuboModel:
    def test_canonical_folds_diagonal_and_lower_triangle(self):
        Q = np.array([[2.0, 1.0], [3.0, -1.0]])
        model = QuboModel.canonical(Q, np.array([0.5, 0.5]), 1.0)
        assert model.Q.tolist() == [[0.0, 4.0], [0.0, 0.0]]
        assert model.h.tolist() == [2.5, -0.5]
        for bits in ("00", "01", "10", "11"):
            x = np.array([int(c) for c in bits], dtype=float)
            assert evaluate_qubo(model, Bitstring.from_str(bits)) == x @ Q @ x + 0.5 * x.sum() + 1.0

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            QuboModel.canonical(np.zeros((2, 3)), np.zeros(2))

    def test_export_round_trip(self, toy, penalties):
        model = build_cost_qubo(toy, build_weight_tensor(toy), penalties)
        restored = QuboModel.from_dict(model.to_dict())
        np.testing.assert_array_equal(restored.Q, model.Q)
        np.testing.assert_array_equal(restored.h, model.h)
        assert restored.d == model.d

    def test_malformed_document(self):
        with pytest.raises(InvalidInputError):
            QuboModel.from_dict({"n": 2, "linear": [0, 0]})


class TestToyCost:
    @pytest.mark.parametrize(
        "bits, energy",
        [("100101", -1.0), ("100110", 1.0), ("011010", 0.0), ("000000", 30.0)],
    )
    def test_energies(self, toy, penalties, bits, energy):
        model = build_cost_qubo(toy, build_weight_tensor(toy), penalties)
        assert evaluate_qubo(model, Bitstring.from_str(bits)) == energy

    def test_global_minimum_is_gap_first_alignment(self, toy, penalties):
        model = build_cost_qubo(toy, build_weight_tensor(toy), penalties)
        diag = build_energy_diagonal(model)
        assert diag.shape == (64,)
        assert int(np.argmin(diag)) == 0b100101
        assert diag.min() == -1.0
        assert np.sum(diag == -1.0) == 1

    def test_breakdown_matches_qubo_everywhere(self, toy, penalties):
        weights = build_weight_tensor(toy)
        model = build_cost_qubo(toy, weights, penalties)
        X = all_states(6)
        np.testing.assert_allclose(
            cost_breakdown(toy, weights, penalties, X).total,
            evaluate_qubo_batch(model, X),
            rtol=0,
            atol=1e-12,
        )

    def test_raw_constraint_counts(self, toy):
        X = bit_matrix([0b011010, 0b000000], 6)
        raw = cost_breakdown(toy, build_weight_tensor(toy), None, X)
        assert raw.p1_term.tolist() == [0.0, 3.0]
        assert raw.p2_term.tolist() == [0.0, 0.0]
        assert raw.p3_term.tolist() == [1.0, 0.0]
        assert raw.score.tolist() == [-1.0, 0.0]


class TestIsing:
    def test_toy_identity(self, toy, penalties):
        model = build_cost_qubo(toy, build_weight_tensor(toy), penalties)
        ising = qubo_to_ising(model)
        for k in range(64):
            b = Bitstring.from_index(k, 6)
            assert evaluate_ising(ising, b.spins()) == pytest.approx(
                evaluate_qubo(model, b), rel=1e-9, abs=1e-9
            )

    def test_random_qubos(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            n = int(rng.integers(1, 13))
            model = random_qubo(rng, n)
            ising = qubo_to_ising(model)
            X = all_states(n).astype(float)
            S = 1.0 - 2.0 * X
            from_spins = np.einsum("bi,ij,bj->b", S, ising.J, S) + S @ ising.b + ising.c
            np.testing.assert_allclose(
                from_spins, evaluate_qubo_batch(model, X), rtol=1e-9, atol=1e-9
            )
            k = int(rng.integers(0, 1 << n))
            b = Bitstring.from_index(k, n)
            assert evaluate_ising(ising, b.spins()) == pytest.approx(
                evaluate_qubo(model, b), rel=1e-9, abs=1e-9
            )

    def test_spins_must_be_signs(self, toy, penalties):
        ising = qubo_to_ising(build_cost_qubo(toy, build_weight_tensor(toy), penalties))
        with pytest.raises(InvalidInputError):
            evaluate_ising(ising, [0, 1, 1, 1, 1, 1])


class TestPenaltySoundness:
    def check(self, seqs, penalties):
        n = build_index_map(seqs).total_qubits
        X = all_states(n)
        breakdown = cost_breakdown(seqs, build_weight_tensor(seqs), penalties, X)
        feasible = np.zeros(1 << n, dtype=bool)
        feasible[[b.to_index() for b in enumerate_feasible(seqs)]] = True
        assert np.all(breakdown.penalty[feasible] == 0)
        assert np.all(breakdown.penalty[~feasible] >= penalties.minimum)

    def test_toy(self, toy, penalties):
        self.check(toy, penalties)

    def test_random_instances(self, make_instance):
        rng = np.random.default_rng(5)
        for _ in range(5):
            weights = rng.uniform(0.5, 3.0, size=3)
            seqs = make_instance(rng, 16)
            self.check(seqs, PenaltyConfig(p1=weights[0], p2=weights[1], p3=weights[2]))


class TestFaithfulness:
    def check(self, seqs, scheme=None):
        weights = build_weight_tensor(seqs) if scheme is None else build_weight_tensor(seqs, scheme)
        model = build_cost_qubo(seqs, weights, PenaltyConfig())
        for b in enumerate_feasible(seqs):
            alignment = decode_bitstring(b, seqs)
            assert isinstance(alignment, AlignmentMatrix)
            expected = sp_score(alignment) if scheme is None else sp_score(alignment, scheme)
            assert evaluate_qubo(model, b) == expected

    def test_random_instances(self, make_instance):
        rng = np.random.default_rng(9)
        for _ in range(5):
            self.check(make_instance(rng, 16))

    def test_custom_scheme(self):
        table = {(a, b): (-2 if a == b else 1) for a in ALPHABET for b in ALPHABET}
        self.check(SequenceSet(("ACG", "AG", "C")), MatrixScoring(table))


class TestEnergyDiagonal:
    def test_cap(self):
        with pytest.raises(ResourceCapError):
            build_energy_diagonal(QuboModel.zeros(10), max_qubits=8)

    def test_read_only(self, toy, penalties):
        diag = build_energy_diagonal(build_cost_qubo(toy, build_weight_tensor(toy), penalties))
        with pytest.raises(ValueError):
            diag[0] = 0.0

    def test_independent_of_worker_count(self):
        model = random_qubo(np.random.default_rng(3), 17)
        serial = build_energy_diagonal(model, workers=1)
        threaded = build_energy_diagonal(model, workers=4)
        np.testing.assert_array_equal(serial, threaded)
