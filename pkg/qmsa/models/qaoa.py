"""QAOA data models: statevectors, parameters, histograms and run results."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from qmsa.core.errors import InvalidInputError
from qmsa.models.alignment import AlignmentMatrix, Bitstring, InfeasibleReport


@dataclass(frozen=True, eq=False)
class StateVector:
    """2^n complex amplitudes; basis index k is the integer value of the bitstring."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n,):
            raise InvalidInputError(
                f"Statevector of {self.n} qubits needs {1 << self.n} amplitudes, got {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, bitstring: Bitstring) -> "StateVector":
        amps = np.zeros(1 << len(bitstring), dtype=np.complex128)
        amps[bitstring.to_index()] = 1.0
        return cls(amps, len(bitstring))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))


@dataclass(frozen=True)
class QaoaParams:
    """Mixer angles ``betas`` and cost angles ``gammas``, one pair per layer."""

    betas: Tuple[float, ...]
    gammas: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if len(self.betas) != len(self.gammas) or not self.betas:
            raise InvalidInputError(
                f"Need p >= 1 matching angles, got {len(self.betas)} betas "
                f"and {len(self.gammas)} gammas"
            )

    @property
    def p(self) -> int:
        return len(self.betas)

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "QaoaParams":
        """Optimizer layout: all betas, then all gammas."""
        values = [float(v) for v in vector]
        p = len(values) // 2
        return cls(tuple(values[:p]), tuple(values[p:]))

    def to_vector(self) -> np.ndarray:
        return np.array(self.betas + self.gammas, dtype=float)

    def padded(self, p: int) -> "QaoaParams":
        """Append identity layers (beta = gamma = 0) up to ``p`` layers."""
        extra = max(0, p - self.p)
        return QaoaParams(self.betas + (0.0,) * extra, self.gammas + (0.0,) * extra)

    def interpolated(self, p: int) -> "QaoaParams":
        """Stretch the angle schedule to ``p`` layers, one layer at a time.

        Layer i of the deeper schedule is (i/q) x[i-1] + ((q-i)/q) x[i] with
        x[-1] = x[q] = 0, where q is the current depth.
        """
        params = self
        while params.p < p:
            q = params.p
            rows = []
            for angles in (params.betas, params.gammas):
                x = np.concatenate([[0.0], angles, [0.0]])
                i = np.arange(q + 1)
                rows.append(tuple(i / q * x[i] + (q - i) / q * x[i + 1]))
            params = QaoaParams(rows[0], rows[1])
        return params

    @classmethod
    def ramp(cls, p: int, step: float, energy_scale: float = 1.0) -> "QaoaParams":
        """Linear annealing schedule with time step ``step`` per layer.

        The mixer weight falls from 1 to 0 while the cost weight rises; cost
        angles are divided by ``energy_scale``. Mixer angles are negative
        because the uniform state is the top eigenstate of sum_j X_j.
        """
        s = (np.arange(p) + 0.5) / p
        return cls(tuple(-step * (1 - s)), tuple(step * s / energy_scale))

    def to_dict(self) -> Dict[str, Any]:
        two_pi = 2 * math.pi
        return {
            "p": self.p,
            "betas": list(self.betas),
            "gammas": list(self.gammas),
            "betas_mod_2pi": [b % two_pi for b in self.betas],
            "gammas_mod_2pi": [g % two_pi for g in self.gammas],
        }


@dataclass(frozen=True)
class SampleHistogram:
    """Measurement counts keyed by bitstring, in basis-index order."""

    shots: int
    counts: Dict[str, int]
    seed: int

    def most_common(self, k: Optional[int] = None) -> List[Tuple[str, int]]:
        ranked = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked if k is None else ranked[:k]


@dataclass(frozen=True)
class StartTrace:
    """Outcome of one optimizer start."""

    index: int
    kind: str  # zero, warm, interp, ramp, random or polish
    initial: Tuple[float, ...]
    expectation: float
    evaluations: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.index,
            "kind": self.kind,
            "initial": list(self.initial),
            "expectation": self.expectation,
            "evaluations": self.evaluations,
        }


@dataclass(frozen=True)
class Outcome:
    """A measured bitstring with its decoding."""

    bitstring: str
    count: int
    probability: float
    energy: float
    decoded: AlignmentMatrix | InfeasibleReport

    @property
    def feasible(self) -> bool:
        return isinstance(self.decoded, AlignmentMatrix)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "bitstring": self.bitstring,
            "count": self.count,
            "probability": self.probability,
            "energy": self.energy,
            "feasible": self.feasible,
        }
        if isinstance(self.decoded, AlignmentMatrix):
            data["alignment"] = self.decoded.to_list()
            data["violations"] = []
        else:
            data["alignment"] = None
            data["violations"] = [v.to_dict() for v in self.decoded.violations]
        return data


@dataclass(frozen=True, eq=False)
class QaoaResult:
    """Everything one optimized QAOA run produces."""

    p: int
    seed: int
    best_params: QaoaParams
    best_expectation: float
    starts: Tuple[StartTrace, ...]
    histogram: SampleHistogram
    probabilities: np.ndarray
    global_min: Bitstring
    global_min_energy: float
    top: Tuple[Outcome, ...]
    outcomes: Tuple[Outcome, ...] = field(default=())
    # Next-best local minima, seeds for deeper runs; not serialized.
    alternatives: Tuple[QaoaParams, ...] = field(default=(), repr=False)

    def probability_of(self, bitstring: Bitstring | str) -> float:
        b = Bitstring.from_str(bitstring) if isinstance(bitstring, str) else bitstring
        return float(self.probabilities[b.to_index()])

    @property
    def global_min_probability(self) -> float:
        return self.probability_of(self.global_min)

    @property
    def most_probable_sample(self) -> str:
        return self.histogram.most_common(1)[0][0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "seed": self.seed,
            "params": self.best_params.to_dict(),
            "best_expectation": self.best_expectation,
            "starts": [s.to_dict() for s in self.starts],
            "global_minimum": {
                "bitstring": str(self.global_min),
                "energy": self.global_min_energy,
                "probability": self.global_min_probability,
            },
            "histogram": {
                "shots": self.histogram.shots,
                "seed": self.histogram.seed,
                "outcomes": [o.to_dict() for o in self.outcomes],
            },
            "top_outcomes": [o.to_dict() for o in self.top],
        }


@dataclass(frozen=True)
class SweepResult:
    """Independent runs over a list of layer counts."""

    results: Tuple[QaoaResult, ...]

    def series(self) -> List[Dict[str, Any]]:
        return [
            {
                "p": r.p,
                "best_expectation": r.best_expectation,
                "probability_of_global_min": r.global_min_probability,
            }
            for r in self.results
        ]
