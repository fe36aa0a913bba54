"""Alignment data models: input sequences, one-hot index map, alignments and bitstrings.

Indices are 0-based throughout: string ``s``, letter ``n`` (position inside the
string) and column ``i``. Flat qubit indices enumerate ``(s, n, i)``
string-major, then letter, then column, so the printed bitstring of the
two-string example ``AG / G_`` reads ``100110`` left to right.
"""

from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from Bio import SeqIO

from qmsa.core.errors import InvalidInputError

ALPHABET: Tuple[str, ...] = ("A", "C", "G", "T")
GAP = "_"


@dataclass(frozen=True)
class SequenceSet:
    """N >= 2 DNA strings with a unique longest (reference) string."""

    strings: Tuple[str, ...]
    names: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        strings = tuple(self.strings)
        object.__setattr__(self, "strings", strings)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"s{k}" for k in range(len(strings))))
        else:
            object.__setattr__(self, "names", tuple(self.names))

        if len(strings) < 2:
            raise InvalidInputError(f"Need at least 2 sequences, got {len(strings)}")
        if len(self.names) != len(strings):
            raise InvalidInputError("Number of names does not match number of sequences")
        for k, seq in enumerate(strings):
            if not seq:
                raise InvalidInputError(f"Sequence {self.names[k]} is empty")
            bad = sorted(set(seq) - set(ALPHABET))
            if bad:
                raise InvalidInputError(
                    f"Sequence {self.names[k]} has characters outside "
                    f"{{{','.join(ALPHABET)}}}: {''.join(bad)}"
                )
        longest = max(len(s) for s in strings)
        if sum(1 for s in strings if len(s) == longest) != 1:
            raise InvalidInputError(
                f"Exactly one sequence must have the maximal length {longest}"
            )

    @classmethod
    def from_inline(cls, text: str) -> "SequenceSet":
        """Parse the comma-separated CLI form, e.g. ``"AG,G"``."""
        parts = [p.strip().upper() for p in text.split(",")]
        return cls(tuple(p for p in parts if p))

    @classmethod
    def from_fasta(cls, path: str | Path) -> "SequenceSet":
        """Read a FASTA file; sequences are uppercase-normalized."""
        fasta_path = Path(path)
        if not fasta_path.exists():
            raise InvalidInputError(f"FASTA file not found: {path}")
        try:
            records = list(SeqIO.parse(str(fasta_path), "fasta"))
        except ValueError as e:
            raise InvalidInputError(f"Could not parse FASTA file {path}: {e}")
        if not records:
            raise InvalidInputError(f"No FASTA records found in {path}")
        return cls(
            strings=tuple(str(r.seq).upper() for r in records),
            names=tuple(r.id for r in records),
        )

    @property
    def count(self) -> int:
        """N, the number of strings."""
        return len(self.strings)

    @property
    def lengths(self) -> Tuple[int, ...]:
        return tuple(len(s) for s in self.strings)

    @property
    def width(self) -> int:
        """L, the length of the reference string (the number of columns)."""
        return max(self.lengths)

    @property
    def reference_index(self) -> int:
        return self.lengths.index(self.width)

    @property
    def gaps(self) -> Tuple[int, ...]:
        """g_i = L - l_i for every string."""
        return tuple(self.width - length for length in self.lengths)


@dataclass(frozen=True)
class QubitIndexMap:
    """Bijection between valid (s, n, i) triples and flat qubit indices."""

    lengths: Tuple[int, ...]
    width: int
    offsets: Tuple[int, ...] = field(init=False)
    total_qubits: int = field(init=False)

    def __post_init__(self) -> None:
        offsets = []
        running = 0
        for length in self.lengths:
            offsets.append(running)
            running += length * self.width
        object.__setattr__(self, "offsets", tuple(offsets))
        object.__setattr__(self, "total_qubits", running)

    def index(self, s: int, n: int, i: int) -> int:
        if not (0 <= s < len(self.lengths) and 0 <= n < self.lengths[s] and 0 <= i < self.width):
            raise IndexError(f"No qubit for (s={s}, n={n}, i={i})")
        return self.offsets[s] + n * self.width + i

    def triple(self, k: int) -> Tuple[int, int, int]:
        if not 0 <= k < self.total_qubits:
            raise IndexError(f"Qubit index {k} out of range [0, {self.total_qubits})")
        s = max(j for j, off in enumerate(self.offsets) if off <= k)
        local = k - self.offsets[s]
        return s, local // self.width, local % self.width

    def triples(self) -> Iterator[Tuple[int, int, int]]:
        """All (s, n, i) in flat-index order."""
        for s, length in enumerate(self.lengths):
            for n, i in product(range(length), range(self.width)):
                yield s, n, i


@dataclass(frozen=True)
class AlignmentMatrix:
    """N x L grid of letters and gaps; each row is stored as a string."""

    rows: Tuple[str, ...]

    def __post_init__(self) -> None:
        rows = tuple("".join(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise InvalidInputError("Alignment has no rows")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise InvalidInputError(f"Alignment rows have differing widths: {sorted(widths)}")
        allowed = set(ALPHABET) | {GAP}
        for k, row in enumerate(rows):
            bad = sorted(set(row) - allowed)
            if bad:
                raise InvalidInputError(f"Row {k} has invalid symbols: {''.join(bad)}")

    @property
    def width(self) -> int:
        return len(self.rows[0])

    def cell(self, s: int, i: int) -> str:
        return self.rows[s][i]

    def letters(self, s: int) -> str:
        return self.rows[s].replace(GAP, "")

    def columns_of(self, s: int) -> Tuple[int, ...]:
        """Column index of every letter of row s, in order."""
        return tuple(i for i, c in enumerate(self.rows[s]) if c != GAP)

    def matches(self, seqs: SequenceSet) -> bool:
        return (
            len(self.rows) == seqs.count
            and self.width == seqs.width
            and all(self.letters(s) == seqs.strings[s] for s in range(seqs.count))
        )

    def render(self) -> str:
        return "\n".join(" ".join(row) for row in self.rows)

    def to_list(self) -> List[str]:
        return list(self.rows)


@dataclass(frozen=True)
class Bitstring:
    """Ordered binary values; flat index 0 is the leftmost (most significant) bit."""

    bits: Tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise InvalidInputError("Bitstring entries must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_str(cls, text: str) -> "Bitstring":
        if set(text) - {"0", "1"}:
            raise InvalidInputError(f"Not a bitstring: {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_index(cls, index: int, n: int) -> "Bitstring":
        return cls(tuple((index >> (n - 1 - k)) & 1 for k in range(n)))

    def to_index(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    def spins(self) -> Tuple[int, ...]:
        """Spin values s = 1 - 2x."""
        return tuple(1 - 2 * b for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, k: int) -> int:
        return self.bits[k]

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class Violation:
    """One violated constraint instance.

    constraint 1: letter ``letters[0]`` not in exactly one column (``columns`` lists where it is).
    constraint 2: column ``columns[0]`` holds several letters (``letters``).
    constraint 3: letters ``letters = (n, n')`` with n < n' sit in columns
    ``columns = (i', i)`` with i < i' (order reversed).
    """

    constraint: int
    string: int
    letters: Tuple[int, ...]
    columns: Tuple[int, ...]

    def to_dict(self) -> Dict[str, object]:
        return {
            "constraint": self.constraint,
            "string": self.string,
            "letters": list(self.letters),
            "columns": list(self.columns),
        }


@dataclass(frozen=True)
class InfeasibleReport:
    """Decoding result for a bitstring that breaks at least one hard constraint."""

    bitstring: Bitstring
    violations: Tuple[Violation, ...]

    @property
    def constraints(self) -> Tuple[int, ...]:
        return tuple(sorted({v.constraint for v in self.violations}))

    def to_dict(self) -> Dict[str, object]:
        return {
            "bitstring": str(self.bitstring),
            "violations": [v.to_dict() for v in self.violations],
        }


def parse_rows(rows: Sequence[str] | str, separator: Optional[str] = None) -> AlignmentMatrix:
    """Build an AlignmentMatrix from ``["AG", "G_"]`` or ``"AG/G_"``."""
    if isinstance(rows, str):
        rows = rows.split(separator or "/")
    return AlignmentMatrix(tuple(r.strip().upper() for r in rows))
