"""Quadratic binary (QUBO) and spin (Ising) cost models.

Export format, shared by both models::

    {"kind": "qubo" | "ising", "n": 6,
     "quadratic": [[i, j, value], ...],   # i < j, nonzero entries only
     "linear": [value, ...],              # length n
     "constant": value}
"""

from dataclasses import dataclass
from typing import Any, Dict, List

import numpy as np

from qmsa.core.errors import InvalidInputError


def _upper_entries(matrix: np.ndarray) -> List[List[float]]:
    rows, cols = np.nonzero(matrix)
    return [[int(i), int(j), float(matrix[i, j])] for i, j in zip(rows, cols)]


def _matrix_from_entries(n: int, entries: List[List[float]]) -> np.ndarray:
    matrix = np.zeros((n, n))
    for i, j, value in entries:
        matrix[int(i), int(j)] += float(value)
    return matrix


@dataclass(frozen=True, eq=False)
class QuboModel:
    """C(x) = x^T Q x + h^T x + d over x in {0,1}^n.

    Stored canonically: Q strictly upper-triangular (zero diagonal), since
    x_i^2 = x_i lets any diagonal weight live in h.
    """

    Q: np.ndarray
    h: np.ndarray
    d: float

    @classmethod
    def canonical(cls, Q: np.ndarray, h: np.ndarray, d: float = 0.0) -> "QuboModel":
        Q = np.asarray(Q, dtype=float)
        h = np.asarray(h, dtype=float)
        n = h.shape[0]
        if Q.shape != (n, n):
            raise InvalidInputError(f"Q has shape {Q.shape}, expected {(n, n)}")
        folded_h = h + np.diag(Q)
        upper = np.triu(Q, 1) + np.tril(Q, -1).T
        upper.setflags(write=False)
        folded_h.setflags(write=False)
        return cls(Q=upper, h=folded_h, d=float(d))

    @classmethod
    def zeros(cls, n: int, d: float = 0.0) -> "QuboModel":
        return cls.canonical(np.zeros((n, n)), np.zeros(n), d)

    @property
    def n(self) -> int:
        return int(self.h.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "qubo",
            "n": self.n,
            "quadratic": _upper_entries(self.Q),
            "linear": [float(v) for v in self.h],
            "constant": self.d,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QuboModel":
        try:
            n = int(data["n"])
            Q = _matrix_from_entries(n, data["quadratic"])
            h = np.asarray(data["linear"], dtype=float)
            d = float(data["constant"])
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise InvalidInputError(f"Malformed QUBO document: {e}")
        return cls.canonical(Q, h, d)


@dataclass(frozen=True, eq=False)
class IsingModel:
    """C(s) = s^T J s + b^T s + c over s in {-1,+1}^n, J upper-triangular."""

    J: np.ndarray
    b: np.ndarray
    c: float

    @property
    def n(self) -> int:
        return int(self.b.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "ising",
            "n": self.n,
            "quadratic": _upper_entries(self.J),
            "linear": [float(v) for v in self.b],
            "constant": self.c,
        }
