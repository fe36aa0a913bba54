"""Exact statevector simulation of the QAOA ansatz.

The problem Hamiltonian is diagonal, so it is applied as a phase vector
(``hamiltonian.build_energy_diagonal``). The mixer is H_M = sum_j X_j, so
U_M(beta) = prod_j exp(-i beta X_j), an R_x(2 beta) on every qubit, applied by
flipping one axis of the ``[2] * n`` reshaped wavefunction at a time. Qubit j
is axis j, which keeps flat index 0 as the most significant bit.
"""

import logging
from typing import Dict

import numpy as np

from qmsa.core.errors import InvalidInputError, ResourceCapError
from qmsa.models.alignment import Bitstring
from qmsa.models.qaoa import QaoaParams, SampleHistogram, StateVector

logger = logging.getLogger(__name__)

DEFAULT_MAX_QUBITS = 24


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; equal seeds give equal streams."""
    return np.random.Generator(np.random.Philox(seed))


def init_uniform(n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    if n < 1:
        raise InvalidInputError(f"Need at least one qubit, got {n}")
    if n > max_qubits:
        raise ResourceCapError(f"{n} qubits exceed the simulation cap of {max_qubits}")
    amplitude = 2.0 ** (-n / 2)
    return StateVector(np.full(1 << n, amplitude, dtype=np.complex128), n)


def _check_diagonal(psi: StateVector, diag: np.ndarray) -> None:
    if diag.shape != psi.amplitudes.shape:
        raise InvalidInputError(
            f"Energy vector has shape {diag.shape}, state has {psi.amplitudes.shape}"
        )


def apply_cost_phase(psi: StateVector, diag: np.ndarray, gamma: float) -> StateVector:
    """amplitude_k <- amplitude_k * exp(-i gamma diag_k)."""
    _check_diagonal(psi, diag)
    return StateVector(psi.amplitudes * np.exp(-1j * gamma * diag), psi.n)


def apply_mixer(psi: StateVector, beta: float) -> StateVector:
    """exp(-i beta X) = [[cos b, -i sin b], [-i sin b, cos b]] on every qubit."""
    c = np.cos(beta)
    s = -1j * np.sin(beta)
    wavefn = psi.amplitudes.reshape([2] * psi.n)
    for axis in range(psi.n):
        wavefn = c * wavefn + s * np.flip(wavefn, axis)
    return StateVector(wavefn.reshape(-1), psi.n)


def trial_state(
    n: int,
    diag: np.ndarray,
    params: QaoaParams,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> StateVector:
    """Layers applied in order 1..p, each as cost phase then mixer."""
    psi = init_uniform(n, max_qubits)
    for beta, gamma in zip(params.betas, params.gammas):
        psi = apply_mixer(apply_cost_phase(psi, diag, gamma), beta)
    return psi


def expectation(psi: StateVector, diag: np.ndarray) -> float:
    _check_diagonal(psi, diag)
    return float(np.sum(psi.probabilities() * diag))


def sample(psi: StateVector, shots: int, seed: int) -> SampleHistogram:
    """Multinomial draw of ``shots`` measurements in the computational basis."""
    if shots < 1:
        raise InvalidInputError(f"shots must be >= 1, got {shots}")
    probs = psi.probabilities()
    probs = probs / probs.sum()
    draws = make_rng(seed).multinomial(shots, probs)
    counts: Dict[str, int] = {}
    for index in np.flatnonzero(draws):
        counts[str(Bitstring.from_index(int(index), psi.n))] = int(draws[index])
    return SampleHistogram(shots=shots, counts=counts, seed=seed)
