"""Tests for the statevector simulator against a dense-matrix reference."""

from functools import reduce

import numpy as np
import pytest
from scipy.linalg import expm

from qmsa.core.errors import InvalidInputError, ResourceCapError
from qmsa.models.alignment import Bitstring
from qmsa.models.qaoa import QaoaParams, StateVector
from qmsa.services.simulator import (
    apply_cost_phase,
    apply_mixer,
    expectation,
    init_uniform,
    make_rng,
    sample,
    trial_state,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def mixer_hamiltonian(n: int) -> np.ndarray:
    """sum_j X_j with qubit 0 as the leftmost tensor factor."""
    total = np.zeros((1 << n, 1 << n), dtype=complex)
    for j in range(n):
        factors = [PAULI_X if k == j else np.eye(2) for k in range(n)]
        total += reduce(np.kron, factors)
    return total


def dense_trial_state(diag: np.ndarray, params: QaoaParams) -> np.ndarray:
    n = int(diag.shape[0]).bit_length() - 1
    HM = mixer_hamiltonian(n)
    psi = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
    for beta, gamma in zip(params.betas, params.gammas):
        psi = expm(-1j * gamma * np.diag(diag)) @ psi
        psi = expm(-1j * beta * HM) @ psi
    return psi


class TestInitUniform:
    def test_amplitudes(self):
        psi = init_uniform(3)
        np.testing.assert_allclose(psi.amplitudes, np.full(8, 8 ** -0.5))
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)

    def test_limits(self):
        with pytest.raises(InvalidInputError):
            init_uniform(0)
        with pytest.raises(ResourceCapError):
            init_uniform(5, max_qubits=4)


class TestLayers:
    def test_cost_phase_preserves_moduli(self):
        rng = np.random.default_rng(1)
        psi = init_uniform(4)
        diag = rng.normal(size=16) * 5
        phased = apply_cost_phase(psi, diag, 0.731)
        np.testing.assert_allclose(np.abs(phased.amplitudes), np.abs(psi.amplitudes), atol=1e-10)
        np.testing.assert_allclose(
            phased.amplitudes, psi.amplitudes * np.exp(-1j * 0.731 * diag), atol=1e-12
        )

    def test_mixer_flips_every_qubit_at_half_pi(self):
        psi = apply_mixer(StateVector.basis(Bitstring.from_str("100")), np.pi / 2)
        expected = np.zeros(8, dtype=complex)
        expected[0b011] = 1j  # (-i)^3
        np.testing.assert_allclose(psi.amplitudes, expected, atol=1e-12)

    def test_mixer_at_zero_is_identity(self):
        psi = init_uniform(3)
        np.testing.assert_array_equal(apply_mixer(psi, 0.0).amplitudes, psi.amplitudes)

    def test_energy_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            apply_cost_phase(init_uniform(2), np.zeros(8), 0.1)


class TestDenseReference:
    def test_random_parameters(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            p = int(rng.integers(1, 4))
            diag = rng.normal(size=1 << n) * 3
            params = QaoaParams(
                tuple(rng.uniform(0, np.pi, size=p)), tuple(rng.uniform(0, 2 * np.pi, size=p))
            )
            psi = trial_state(n, diag, params)
            np.testing.assert_allclose(psi.amplitudes, dense_trial_state(diag, params), atol=1e-8)
            assert psi.norm() == pytest.approx(1.0, abs=1e-10)

    def test_expectation_of_uniform_state_is_mean_energy(self):
        diag = np.arange(8, dtype=float)
        assert expectation(init_uniform(3), diag) == pytest.approx(3.5)


class TestSampling:
    def test_counts_sum_to_shots(self):
        psi = trial_state(3, np.arange(8.0), QaoaParams((0.4,), (0.9,)))
        hist = sample(psi, 1000, seed=3)
        assert sum(hist.counts.values()) == 1000
        assert all(len(b) == 3 for b in hist.counts)

    def test_same_seed_same_histogram(self):
        psi = init_uniform(4)
        assert sample(psi, 500, seed=9).counts == sample(psi, 500, seed=9).counts
        assert sample(psi, 500, seed=9).counts != sample(psi, 500, seed=10).counts

    def test_basis_state_always_measured(self):
        hist = sample(StateVector.basis(Bitstring.from_str("0110")), 50, seed=1)
        assert hist.counts == {"0110": 50}
        assert hist.most_common(1) == [("0110", 50)]

    def test_no_shots(self):
        with pytest.raises(InvalidInputError):
            sample(init_uniform(2), 0, seed=1)

    def test_philox_streams_are_reproducible(self):
        assert make_rng(5).integers(1 << 30) == make_rng(5).integers(1 << 30)


class TestUnitarity:
    def test_norm_is_preserved_up_to_twelve_qubits(self):
        rng = np.random.default_rng(11)
        for n in range(5, 13):
            p = int(rng.integers(1, 5))
            diag = rng.normal(size=1 << n) * 10
            params = QaoaParams(
                tuple(rng.uniform(-np.pi, np.pi, size=p)),
                tuple(rng.uniform(-np.pi, np.pi, size=p)),
            )
            assert trial_state(n, diag, params).norm() == pytest.approx(1.0, abs=1e-10)


class TestSamplingStatistics:
    def test_uniform_single_qubit(self):
        hist = sample(init_uniform(1), 10**6, seed=2024)
        assert set(hist.counts) == {"0", "1"}
        for count in hist.counts.values():
            assert abs(count - 500_000) <= 3 * 500

    def test_frequencies_match_probabilities(self):
        shots = 10**5
        psi = trial_state(4, np.arange(16.0) % 5, QaoaParams((0.3, 1.1), (0.8, 0.2)))
        probs = psi.probabilities()
        hist = sample(psi, shots, seed=77)
        for index, prob in enumerate(probs):
            count = hist.counts.get(str(Bitstring.from_index(index, 4)), 0)
            sigma = np.sqrt(shots * prob * (1 - prob))
            assert abs(count - shots * prob) <= 4 * sigma + 1e-9
