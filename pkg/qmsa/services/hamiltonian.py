"""Soft-constrained alignment cost as a QUBO, its Ising form, and exact evaluation.

The cost of x in {0,1}^n is

    score(x) + p1 * sum_{s,n} (sum_i x[s,n,i] - 1)^2
             + p2 * sum_{s,i} sum_{n<n'} x[s,n,i] x[s,n',i]
             + p3 * sum_s sum_{n<n'} sum_{i<i'} x[s,n',i] x[s,n,i']

with score(x) = sum_{s<s'} sum_{n,n'} sum_i omega[s,n,s',n'] x[s,n,i] x[s',n',i].
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence, Union

import numpy as np

from qmsa.core.config import PenaltyConfig
from qmsa.core.errors import InvalidInputError, ResourceCapError
from qmsa.models.alignment import Bitstring, SequenceSet
from qmsa.models.qubo import IsingModel, QuboModel
from qmsa.services.encoding import bit_matrix, build_index_map
from qmsa.services.scoring import WeightTensor

logger = logging.getLogger(__name__)

DEFAULT_MAX_QUBITS = 24
DIAGONAL_CHUNK = 1 << 16

BinaryInput = Union[Bitstring, Sequence[int], np.ndarray]


def _as_vector(x: BinaryInput, n: int) -> np.ndarray:
    vec = np.asarray(x.bits if isinstance(x, Bitstring) else x, dtype=float)
    if vec.shape != (n,):
        raise InvalidInputError(f"Expected a vector of length {n}, got shape {vec.shape}")
    return vec


def build_cost_qubo(
    seqs: SequenceSet, weights: WeightTensor, penalties: PenaltyConfig
) -> QuboModel:
    """Collect the four cost terms into canonical (Q, h, d)."""
    index_map = build_index_map(seqs)
    n = index_map.total_qubits
    L = seqs.width
    Q = np.zeros((n, n))
    h = np.zeros(n)
    d = 0.0

    for (s, s2), block in weights.pairs():
        for a in range(block.shape[0]):
            for b in range(block.shape[1]):
                if block[a, b] == 0:
                    continue
                for i in range(L):
                    Q[index_map.index(s, a, i), index_map.index(s2, b, i)] += block[a, b]

    p1, p2, p3 = penalties.p1, penalties.p2, penalties.p3
    for s, length in enumerate(seqs.lengths):
        for letter in range(length):
            # (sum_i x_i - 1)^2 = -sum_i x_i + 2 sum_{i<i'} x_i x_i' + 1 on binaries
            d += p1
            for i in range(L):
                h[index_map.index(s, letter, i)] -= p1
            for i, i2 in combinations(range(L), 2):
                Q[index_map.index(s, letter, i), index_map.index(s, letter, i2)] += 2 * p1
        for i in range(L):
            for letter, letter2 in combinations(range(length), 2):
                Q[index_map.index(s, letter, i), index_map.index(s, letter2, i)] += p2
        for letter, letter2 in combinations(range(length), 2):
            for i, i2 in combinations(range(L), 2):
                a = index_map.index(s, letter2, i)
                b = index_map.index(s, letter, i2)
                Q[min(a, b), max(a, b)] += p3

    model = QuboModel.canonical(Q, h, d)
    logger.info(
        f"Built cost QUBO: {n} variables, {int(np.count_nonzero(model.Q))} couplings"
    )
    return model


def evaluate_qubo(model: QuboModel, x: BinaryInput) -> float:
    vec = _as_vector(x, model.n)
    return float(vec @ model.Q @ vec + model.h @ vec + model.d)


def qubo_to_ising(model: QuboModel) -> IsingModel:
    """Substitute x = (1 - s) / 2.

    quadratic  (1/4) s^T Q s
    linear    -(1/4) (1^T Q^T + 1^T Q + 2 h^T) s
    constant   (1/4) 1^T Q 1 + (1/2) 1^T h + d
    """
    Q, h = model.Q, model.h
    J = Q / 4.0
    b = -(Q.sum(axis=1) + Q.sum(axis=0) + 2.0 * h) / 4.0
    c = Q.sum() / 4.0 + h.sum() / 2.0 + model.d
    J.setflags(write=False)
    b.setflags(write=False)
    return IsingModel(J=J, b=b, c=float(c))


def evaluate_ising(model: IsingModel, spins: Union[Sequence[int], np.ndarray]) -> float:
    vec = np.asarray(spins, dtype=float)
    if vec.shape != (model.n,):
        raise InvalidInputError(f"Expected {model.n} spins, got shape {vec.shape}")
    if not np.all(np.abs(vec) == 1):
        raise InvalidInputError("Spin entries must be -1 or +1")
    return float(vec @ model.J @ vec + model.b @ vec + model.c)


def evaluate_qubo_batch(model: QuboModel, X: np.ndarray) -> np.ndarray:
    """Energies of the rows of a 0/1 matrix."""
    Xf = np.asarray(X, dtype=float)
    return np.einsum("bi,ij,bj->b", Xf, model.Q, Xf) + Xf @ model.h + model.d


def build_energy_diagonal(
    model: QuboModel,
    max_qubits: int = DEFAULT_MAX_QUBITS,
    workers: int = 1,
) -> np.ndarray:
    """C(bits(k)) for every basis index k; the diagonal of the problem Hamiltonian.

    Chunks are independent and written to disjoint slices, so the result does
    not depend on ``workers``.
    """
    n = model.n
    if n > max_qubits:
        raise ResourceCapError(f"{n} qubits exceed the simulation cap of {max_qubits}")
    size = 1 << n
    diag = np.empty(size)

    def fill(start: int) -> None:
        stop = min(start + DIAGONAL_CHUNK, size)
        X = bit_matrix(np.arange(start, stop), n)
        diag[start:stop] = evaluate_qubo_batch(model, X)

    starts = range(0, size, DIAGONAL_CHUNK)
    if workers > 1 and size > DIAGONAL_CHUNK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)
    diag.setflags(write=False)
    return diag


@dataclass(frozen=True, eq=False)
class CostBreakdown:
    """Per-term cost values for a batch of bitstrings (arrays of equal length)."""

    score: np.ndarray
    p1_term: np.ndarray
    p2_term: np.ndarray
    p3_term: np.ndarray

    @property
    def penalty(self) -> np.ndarray:
        return self.p1_term + self.p2_term + self.p3_term

    @property
    def total(self) -> np.ndarray:
        return self.score + self.penalty


def cost_breakdown(
    seqs: SequenceSet,
    weights: WeightTensor,
    penalties: Optional[PenaltyConfig],
    X: np.ndarray,
) -> CostBreakdown:
    """Evaluate each cost term directly on x[s, n, i], without Q/h/d.

    ``penalties=None`` gives the raw (unweighted) constraint sums.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    index_map = build_index_map(seqs)
    if X.shape[1] != index_map.total_qubits:
        raise InvalidInputError(
            f"Expected {index_map.total_qubits} bits per row, got {X.shape[1]}"
        )
    L = seqs.width
    batch = X.shape[0]
    grids = [
        X[:, off: off + length * L].reshape(batch, length, L)
        for off, length in zip(index_map.offsets, seqs.lengths)
    ]

    score = np.zeros(batch)
    for (s, s2), block in weights.pairs():
        score += np.einsum("bni,nk,bki->b", grids[s], block, grids[s2])

    later = np.triu(np.ones((L, L)), 1)
    p1 = np.zeros(batch)
    p2 = np.zeros(batch)
    p3 = np.zeros(batch)
    for x in grids:
        p1 += ((x.sum(axis=2) - 1.0) ** 2).sum(axis=1)
        occupancy = x.sum(axis=1)
        p2 += (occupancy * (occupancy - 1.0) / 2.0).sum(axis=1)
        for letter, letter2 in combinations(range(x.shape[1]), 2):
            p3 += np.einsum("bi,ij,bj->b", x[:, letter2, :], later, x[:, letter, :])

    w1, w2, w3 = (1.0, 1.0, 1.0) if penalties is None else (
        penalties.p1, penalties.p2, penalties.p3
    )
    return CostBreakdown(score=score, p1_term=w1 * p1, p2_term=w2 * p2, p3_term=w3 * p3)
