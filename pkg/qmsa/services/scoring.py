"""Sum-of-Pairs scoring and the pairwise letter weight tensor."""

import json
import logging
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable, Dict, Iterator, Tuple

import numpy as np

from qmsa.core.errors import InvalidInputError
from qmsa.models.alignment import ALPHABET, GAP, AlignmentMatrix, SequenceSet

logger = logging.getLogger(__name__)

ScoringScheme = Callable[[str, str], float]

_SYMBOLS = frozenset(ALPHABET) | {GAP}


def _check_symbol(symbol: str) -> None:
    if symbol not in _SYMBOLS:
        raise InvalidInputError(f"Symbol {symbol!r} is not in the alphabet or the gap")


def sim_sp(a: str, b: str) -> int:
    """-1 for a match, +1 for a mismatch, 0 when either side is a gap."""
    _check_symbol(a)
    _check_symbol(b)
    if a == GAP or b == GAP:
        return 0
    return -1 if a == b else 1


class MatrixScoring:
    """Scoring scheme from an explicit table of letter pairs.

    Lookups are symmetric, and any pair involving a gap scores 0.
    """

    def __init__(self, table: Dict[Tuple[str, str], float]):
        self.table: Dict[Tuple[str, str], float] = {}
        for (a, b), value in table.items():
            _check_symbol(a)
            _check_symbol(b)
            self.table[(a, b)] = float(value)
            self.table.setdefault((b, a), float(value))
        missing = [(a, b) for a in ALPHABET for b in ALPHABET if (a, b) not in self.table]
        if missing:
            raise InvalidInputError(
                f"Scoring matrix is missing pairs: {', '.join(a + b for a, b in missing)}"
            )

    def __call__(self, a: str, b: str) -> float:
        _check_symbol(a)
        _check_symbol(b)
        if a == GAP or b == GAP:
            return 0.0
        return self.table[(a, b)]


def load_scoring_matrix(path: str | Path) -> MatrixScoring:
    """Read a JSON object mapping two-letter keys (``"AC"``) to scores."""
    file_path = Path(path)
    try:
        data = json.loads(file_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"Could not read scoring matrix {path}: {e}")
    if not isinstance(data, dict):
        raise InvalidInputError("Scoring matrix must be a JSON object")
    table = {}
    for key, value in data.items():
        pair = key.replace(",", "").replace(" ", "").upper()
        if len(pair) != 2:
            raise InvalidInputError(f"Scoring matrix key {key!r} is not a letter pair")
        table[(pair[0], pair[1])] = value
    logger.info(f"Loaded scoring matrix with {len(table)} entries from {file_path}")
    return MatrixScoring(table)


@dataclass(frozen=True, eq=False)
class WeightTensor:
    """Scores omega[s, n, s', n'] for s < s', stored as one l_s x l_s' block per pair."""

    blocks: Dict[Tuple[int, int], np.ndarray]

    def entry(self, s: int, n: int, s2: int, n2: int) -> float:
        if s >= s2:
            raise KeyError(f"Weights are stored only for s < s', got ({s}, {s2})")
        return float(self.blocks[(s, s2)][n, n2])

    def pairs(self) -> Iterator[Tuple[Tuple[int, int], np.ndarray]]:
        yield from sorted(self.blocks.items())

    @property
    def size(self) -> int:
        return sum(block.size for block in self.blocks.values())


def build_weight_tensor(seqs: SequenceSet, scheme: ScoringScheme = sim_sp) -> WeightTensor:
    blocks = {}
    for s, s2 in combinations(range(seqs.count), 2):
        block = np.array(
            [[scheme(a, b) for b in seqs.strings[s2]] for a in seqs.strings[s]],
            dtype=float,
        )
        block.setflags(write=False)
        blocks[(s, s2)] = block
    return WeightTensor(blocks=blocks)


def sp_score(alignment: AlignmentMatrix, scheme: ScoringScheme = sim_sp) -> float:
    """Sum over columns of the score of every distinct row pair.

    Integer-valued schemes such as ``sim_sp`` give an ``int``.
    """
    total: float = 0
    rows = alignment.rows
    for i in range(alignment.width):
        for j, j2 in combinations(range(len(rows)), 2):
            total += scheme(rows[j][i], rows[j2][i])
    return total
