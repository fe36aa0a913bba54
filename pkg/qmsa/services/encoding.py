"""One-hot column encoding of alignments and the three hard constraints."""

import logging
from itertools import combinations, product
from typing import List, Sequence, Union

import numpy as np

from qmsa.core.errors import InvalidInputError, ResourceCapError
from qmsa.models.alignment import (
    GAP,
    AlignmentMatrix,
    Bitstring,
    InfeasibleReport,
    QubitIndexMap,
    SequenceSet,
    Violation,
)
from qmsa.services.combinatorics import feasible_count

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 10**6


def build_index_map(seqs: SequenceSet) -> QubitIndexMap:
    """Index map with n = L * sum(l_i) qubits."""
    return QubitIndexMap(lengths=seqs.lengths, width=seqs.width)


def encode_alignment(alignment: AlignmentMatrix, index_map: QubitIndexMap) -> Bitstring:
    """Set x[s,n,i] = 1 iff letter n of row s sits in column i."""
    if len(alignment.rows) != len(index_map.lengths) or alignment.width != index_map.width:
        raise InvalidInputError(
            f"Alignment is {len(alignment.rows)}x{alignment.width}, index map expects "
            f"{len(index_map.lengths)}x{index_map.width}"
        )
    bits = [0] * index_map.total_qubits
    for s, length in enumerate(index_map.lengths):
        columns = alignment.columns_of(s)
        if len(columns) != length:
            raise InvalidInputError(
                f"Row {s} has {len(columns)} letters, index map expects {length}"
            )
        for n, i in enumerate(columns):
            bits[index_map.index(s, n, i)] = 1
    return Bitstring(tuple(bits))


def _grids(b: Bitstring, seqs: SequenceSet) -> List[List[List[int]]]:
    index_map = build_index_map(seqs)
    if len(b) != index_map.total_qubits:
        raise InvalidInputError(
            f"Bitstring has {len(b)} bits, instance needs {index_map.total_qubits}"
        )
    L = seqs.width
    grids = []
    for s, length in enumerate(seqs.lengths):
        off = index_map.offsets[s]
        grids.append([list(b.bits[off + n * L: off + (n + 1) * L]) for n in range(length)])
    return grids


def find_violations(b: Bitstring, seqs: SequenceSet) -> List[Violation]:
    """Every violated instance of the three hard constraints, in a fixed order."""
    violations: List[Violation] = []
    L = seqs.width
    for s, x in enumerate(_grids(b, seqs)):
        length = len(x)
        for n in range(length):
            cols = tuple(i for i in range(L) if x[n][i])
            if len(cols) != 1:
                violations.append(Violation(1, s, (n,), cols))
        for i in range(L):
            letters = tuple(n for n in range(length) if x[n][i])
            if len(letters) > 1:
                violations.append(Violation(2, s, letters, (i,)))
        for n, n2 in combinations(range(length), 2):
            for i, i2 in combinations(range(L), 2):
                if x[n2][i] and x[n][i2]:
                    violations.append(Violation(3, s, (n, n2), (i2, i)))
    return violations


def is_feasible(b: Bitstring, seqs: SequenceSet) -> bool:
    return not find_violations(b, seqs)


def decode_bitstring(
    b: Bitstring, seqs: SequenceSet
) -> Union[AlignmentMatrix, InfeasibleReport]:
    """Inverse of encode_alignment; infeasible input yields a report, not an error."""
    violations = find_violations(b, seqs)
    if violations:
        return InfeasibleReport(bitstring=b, violations=tuple(violations))
    rows = []
    for s, x in enumerate(_grids(b, seqs)):
        row = [GAP] * seqs.width
        for n, letter in enumerate(seqs.strings[s]):
            row[x[n].index(1)] = letter
        rows.append("".join(row))
    return AlignmentMatrix(tuple(rows))


def reference_alignment(seqs: SequenceSet) -> AlignmentMatrix:
    """Every string left-packed: letter n in column n, gaps at the end."""
    return AlignmentMatrix(tuple(s + GAP * g for s, g in zip(seqs.strings, seqs.gaps)))


def enumerate_feasible(
    seqs: SequenceSet, cap: int = DEFAULT_ENUMERATION_CAP
) -> List[Bitstring]:
    """All feasible bitstrings, generated by choosing letter columns per string."""
    total = feasible_count(seqs)
    if total > cap:
        raise ResourceCapError(
            f"{total} feasible alignments exceed the enumeration cap of {cap}"
        )
    index_map = build_index_map(seqs)
    per_string = [list(combinations(range(seqs.width), length)) for length in seqs.lengths]
    result = []
    for placement in product(*per_string):
        bits = [0] * index_map.total_qubits
        for s, columns in enumerate(placement):
            for n, i in enumerate(columns):
                bits[index_map.index(s, n, i)] = 1
        result.append(Bitstring(tuple(bits)))
    logger.debug(f"Enumerated {len(result)} feasible alignments")
    return result


def bit_matrix(indices: Union[Sequence[int], np.ndarray], n: int) -> np.ndarray:
    """Rows of bits for basis-state indices; column k is flat qubit k."""
    idx = np.asarray(indices, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)
