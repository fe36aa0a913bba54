"""Brute-force ground truth for the cost model and the alignment problem."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from qmsa.core.config import Config, PenaltyConfig
from qmsa.core.errors import InvalidInputError, ResourceCapError
from qmsa.models.alignment import AlignmentMatrix, Bitstring, SequenceSet
from qmsa.services.encoding import bit_matrix, build_index_map, decode_bitstring, enumerate_feasible
from qmsa.services.hamiltonian import (
    DIAGONAL_CHUNK,
    build_cost_qubo,
    build_energy_diagonal,
    cost_breakdown,
)
from qmsa.services.scoring import ScoringScheme, WeightTensor, build_weight_tensor, sim_sp, sp_score

DEFAULT_MAX_QUBITS = 24


def brute_force_min(diag: np.ndarray, max_qubits: int = DEFAULT_MAX_QUBITS) -> Tuple[Bitstring, float]:
    """Exact argmin; the lowest index wins ties."""
    n = int(diag.shape[0]).bit_length() - 1
    if n > max_qubits:
        raise ResourceCapError(f"{n} qubits exceed the scan cap of {max_qubits}")
    index = int(np.argmin(diag))
    return Bitstring.from_index(index, n), float(diag[index])


def independent_energies(
    seqs: SequenceSet, weights: WeightTensor, penalties: PenaltyConfig
) -> np.ndarray:
    """All 2^n energies from the term-by-term cost, never touching Q/h/d."""
    n = build_index_map(seqs).total_qubits
    size = 1 << n
    energies = np.empty(size)
    for start in range(0, size, DIAGONAL_CHUNK):
        stop = min(start + DIAGONAL_CHUNK, size)
        X = bit_matrix(np.arange(start, stop), n)
        energies[start:stop] = cost_breakdown(seqs, weights, penalties, X).total
    return energies


def feasible_scores(
    seqs: SequenceSet, scheme: ScoringScheme = sim_sp, cap: int = 10**6
) -> List[Tuple[Bitstring, float]]:
    """SP score of every feasible alignment, in enumeration order."""
    scored = []
    for b in enumerate_feasible(seqs, cap):
        alignment = decode_bitstring(b, seqs)
        assert isinstance(alignment, AlignmentMatrix)
        scored.append((b, sp_score(alignment, scheme)))
    return scored


def _lowest(scored: List[Tuple[Bitstring, float]]) -> Tuple[Bitstring, float]:
    return min(scored, key=lambda item: (item[1], item[0].to_index()))


def best_feasible(
    seqs: SequenceSet,
    scheme: ScoringScheme = sim_sp,
    cap: int = 10**6,
) -> Tuple[Bitstring, float]:
    """Lowest SP score over all feasible alignments; ties go to the smaller bitstring."""
    return _lowest(feasible_scores(seqs, scheme, cap))


@dataclass(frozen=True)
class OracleReport:
    global_min_bitstring: Bitstring
    global_min_energy: float
    feasible_min_bitstring: Bitstring
    feasible_min_sp_score: float
    energy_histogram: Tuple[Tuple[str, float], ...]
    top_k: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "global_min": {"bitstring": str(self.global_min_bitstring), "energy": self.global_min_energy},
            "feasible_min": {
                "bitstring": str(self.feasible_min_bitstring),
                "sp_score": self.feasible_min_sp_score,
            },
            "lowest_energies": [{"bitstring": b, "energy": e} for b, e in self.energy_histogram],
            "top_k": self.top_k,
        }


@dataclass(frozen=True)
class CrossValidationReport:
    """Agreement between the full-space minimum and the feasible-only minimum.

    ``penalties_sufficient`` is a sufficient, not necessary, condition:
    min(p1, p2, p3) exceeds the spread of SP scores over feasible alignments.
    """

    global_min_bitstring: Bitstring
    global_min_energy: float
    global_min_feasible: bool
    feasible_min_bitstring: Bitstring
    feasible_min_sp_score: float
    score_spread: float
    min_penalty: float
    penalties_sufficient: bool
    consistent: bool
    findings: Tuple[str, ...] = field(default=())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "global_min": {
                "bitstring": str(self.global_min_bitstring),
                "energy": self.global_min_energy,
                "feasible": self.global_min_feasible,
            },
            "feasible_min": {
                "bitstring": str(self.feasible_min_bitstring),
                "sp_score": self.feasible_min_sp_score,
            },
            "penalty_margin": {
                "score_spread": self.score_spread,
                "min_penalty": self.min_penalty,
                "sufficient": self.penalties_sufficient,
                "rule": "min(p1,p2,p3) > max - min of SP score over feasible alignments "
                "(sufficient, not necessary)",
            },
            "consistent": self.consistent,
            "findings": list(self.findings),
        }


class OracleService:
    """Exhaustive desk-scale checks against the compiled cost model."""

    def __init__(self, config: Config, scheme: ScoringScheme = sim_sp):
        self.config = config
        self.scheme = scheme
        self.logger = logging.getLogger(__name__)

    def _diagonal(self, seqs: SequenceSet, penalties: PenaltyConfig) -> np.ndarray:
        qubo = build_cost_qubo(seqs, build_weight_tensor(seqs, self.scheme), penalties)
        return build_energy_diagonal(
            qubo, self.config.simulation.max_qubits, self.config.simulation.threads
        )

    def report(
        self,
        seqs: SequenceSet,
        penalties: Optional[PenaltyConfig] = None,
        top_k: Optional[int] = None,
    ) -> OracleReport:
        penalties = penalties or self.config.penalties
        top_k = self.config.simulation.top_k if top_k is None else top_k
        if top_k < 1:
            raise InvalidInputError(f"top_k must be >= 1, got {top_k}")
        diag = self._diagonal(seqs, penalties)
        g_bits, g_energy = brute_force_min(diag, self.config.simulation.max_qubits)
        f_bits, f_score = best_feasible(seqs, self.scheme, self.config.simulation.enumeration_cap)
        n = len(g_bits)
        order = np.lexsort((np.arange(diag.shape[0]), diag))[:top_k]
        lowest = tuple((str(Bitstring.from_index(int(k), n)), float(diag[k])) for k in order)
        return OracleReport(
            global_min_bitstring=g_bits,
            global_min_energy=g_energy,
            feasible_min_bitstring=f_bits,
            feasible_min_sp_score=f_score,
            energy_histogram=lowest,
            top_k=top_k,
        )

    def cross_validate(
        self, seqs: SequenceSet, penalties: Optional[PenaltyConfig] = None
    ) -> CrossValidationReport:
        """Compare the unconstrained minimum with the best feasible alignment.

        Disagreements are returned as findings, never raised.
        """
        penalties = penalties or self.config.penalties
        diag = self._diagonal(seqs, penalties)
        g_bits, g_energy = brute_force_min(diag, self.config.simulation.max_qubits)
        g_feasible = isinstance(decode_bitstring(g_bits, seqs), AlignmentMatrix)

        scored = feasible_scores(seqs, self.scheme, self.config.simulation.enumeration_cap)
        scores = [score for _, score in scored]
        spread = max(scores) - min(scores)
        f_bits, f_score = _lowest(scored)
        sufficient = penalties.minimum > spread

        findings = []
        if not g_feasible:
            findings.append(
                f"Global minimum {g_bits} (energy {g_energy:g}) is infeasible: "
                "penalties too small"
            )
        elif g_bits != f_bits:
            findings.append(
                f"Global minimum {g_bits} differs from best feasible alignment {f_bits}"
            )
        if sufficient and findings:
            findings.append("Penalty margin rule held but the minima disagree")
        if not sufficient:
            self.logger.warning(
                f"min penalty {penalties.minimum:g} does not exceed the feasible score "
                f"spread {spread:g}; agreement is not guaranteed"
            )

        return CrossValidationReport(
            global_min_bitstring=g_bits,
            global_min_energy=g_energy,
            global_min_feasible=g_feasible,
            feasible_min_bitstring=f_bits,
            feasible_min_sp_score=f_score,
            score_spread=spread,
            min_penalty=penalties.minimum,
            penalties_sufficient=sufficient,
            consistent=g_feasible and g_bits == f_bits,
            findings=tuple(findings),
        )
