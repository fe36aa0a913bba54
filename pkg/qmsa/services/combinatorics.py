"""Exact counting of feasible alignments and the feasible-fraction bound.

Counts are exact Python integers; ratios are exact ``Fraction`` values with
log10 computed from the big integers, so nothing overflows at realistic sizes.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence, Tuple

from qmsa.core.errors import InternalCheckError, InvalidInputError
from qmsa.models.alignment import SequenceSet

logger = logging.getLogger(__name__)


def binomial(L: int, g: int) -> int:
    return math.comb(L, g)


def feasible_count_for_lengths(lengths: Sequence[int], width: Optional[int] = None) -> int:
    """prod_i binom(L, L - l_i); L defaults to max(lengths)."""
    L = max(lengths) if width is None else width
    count = 1
    for length in lengths:
        count *= binomial(L, L - length)
    return count


def feasible_count(seqs: SequenceSet) -> int:
    return feasible_count_for_lengths(seqs.lengths)


def log_fraction_upper_bound(N: int, L: int) -> float:
    """Natural log of (1/L!) * exp(-[ln(2) L - ln(L)] [L + N - 1])."""
    if N < 2 or L < 2:
        raise InvalidInputError(f"Bound defined for N, L >= 2, got N={N}, L={L}")
    return -math.lgamma(L + 1) - (math.log(2) * L - math.log(L)) * (L + N - 1)


def fraction_upper_bound(N: int, L: int) -> float:
    return math.exp(log_fraction_upper_bound(N, L))


def log10_int(value: int) -> float:
    return math.log10(value)


# Integers with more digits are reported by magnitude only; int -> str is
# capped at 4300 digits by the interpreter.
MAX_EXACT_DIGITS = 1000

# Orders of magnitude quoted elsewhere for well-known shapes, largest length first.
QUOTED_LOG10_COUNTS: Dict[Tuple[int, ...], float] = {
    (50,) + (43,) * 9: 79.0,
}

# Quoted and computed orders of magnitude closer than this agree.
QUOTE_TOLERANCE = 0.5


def exact_digits(value: int) -> Optional[str]:
    """Decimal form of ``value``, or None when it is too long to print."""
    if value.bit_length() * math.log10(2) > MAX_EXACT_DIGITS:
        return None
    return str(value)


def power_of_two_text(value: int) -> str:
    """``value`` (a power of two) in decimal when short enough, else as 2^k."""
    return exact_digits(value) or f"2^{value.bit_length() - 1}"


@dataclass(frozen=True)
class CountReport:
    """Search-space size against the Hilbert-space size for one instance."""

    lengths: tuple[int, ...]
    width: int
    feasible_count: int
    hilbert_dim: int
    fraction: Fraction
    bound: float
    quoted_log10: Optional[float] = None

    @property
    def count(self) -> int:
        return len(self.lengths)

    @property
    def qubits(self) -> int:
        return self.hilbert_dim.bit_length() - 1

    @property
    def log10_feasible_count(self) -> float:
        return log10_int(self.feasible_count)

    @property
    def log10_fraction(self) -> float:
        return log10_int(self.fraction.numerator) - log10_int(self.fraction.denominator)

    @property
    def log10_bound(self) -> float:
        return log_fraction_upper_bound(self.count, self.width) / math.log(10)

    @property
    def quote_discrepancy(self) -> Optional[str]:
        """Set when a quoted order of magnitude disagrees with the exact count."""
        if self.quoted_log10 is None:
            return None
        if abs(self.quoted_log10 - self.log10_feasible_count) < QUOTE_TOLERANCE:
            return None
        return (
            f"quoted ~10^{self.quoted_log10:g} feasible alignments, "
            f"exact count is 10^{self.log10_feasible_count:.3f}"
        )

    @property
    def fraction_text(self) -> str:
        numerator = exact_digits(self.fraction.numerator)
        if numerator is None:
            numerator = f"10^{log10_int(self.fraction.numerator):.3f}"
        return f"{numerator}/{power_of_two_text(self.fraction.denominator)}"

    def to_dict(self) -> Dict[str, Any]:
        # Floats that underflow at large sizes are left out; the log10 forms always fit.
        fraction_float = float(self.fraction)
        return {
            "lengths": list(self.lengths),
            "width": self.width,
            "qubits": self.qubits,
            "feasible_count": exact_digits(self.feasible_count),
            "log10_feasible_count": self.log10_feasible_count,
            "hilbert_dim": power_of_two_text(self.hilbert_dim),
            "fraction": self.fraction_text,
            "fraction_float": fraction_float or None,
            "log10_fraction": self.log10_fraction,
            "bound": self.bound or None,
            "log10_bound": self.log10_bound,
            "quoted_log10": self.quoted_log10,
            "quote_discrepancy": self.quote_discrepancy,
        }


def count_report_for_lengths(
    lengths: Sequence[int],
    width: Optional[int] = None,
    quoted_log10: Optional[float] = None,
) -> CountReport:
    """Count report from a shape alone.

    When ``width`` is given and exceeds every length, a reference string of
    that length is added to the shape. Without ``quoted_log10`` a known
    quoted magnitude for the shape, if any, is checked.
    """
    lengths = tuple(int(v) for v in lengths)
    if not lengths or any(v < 1 for v in lengths):
        raise InvalidInputError(f"String lengths must be >= 1, got {list(lengths)}")
    if width is not None:
        if width < max(lengths):
            raise InvalidInputError(
                f"Width {width} is smaller than the longest string ({max(lengths)})"
            )
        if width not in lengths:
            lengths = (width,) + lengths
    L = max(lengths)
    if lengths.count(L) != 1:
        raise InvalidInputError(f"Exactly one string must have the maximal length {L}")
    if len(lengths) < 2:
        raise InvalidInputError("Need at least 2 strings")

    count = feasible_count_for_lengths(lengths)
    hilbert = 2 ** (L * sum(lengths))
    fraction = Fraction(count, hilbert)
    if quoted_log10 is None:
        quoted_log10 = QUOTED_LOG10_COUNTS.get(tuple(sorted(lengths, reverse=True)))
    report = CountReport(
        lengths=lengths,
        width=L,
        feasible_count=count,
        hilbert_dim=hilbert,
        fraction=fraction,
        bound=fraction_upper_bound(len(lengths), L),
        quoted_log10=quoted_log10,
    )
    if report.log10_fraction > report.log10_bound + 1e-12:
        raise InternalCheckError(
            f"Feasible fraction 10^{report.log10_fraction:.3f} exceeds its upper bound "
            f"10^{report.log10_bound:.3f}"
        )
    logger.debug(
        f"|S| = 10^{report.log10_feasible_count:.3f}, |S|/|H| = 10^{report.log10_fraction:.3f}"
    )
    if report.quote_discrepancy:
        logger.warning(report.quote_discrepancy)
    return report


def count_report(seqs: SequenceSet, quoted_log10: Optional[float] = None) -> CountReport:
    return count_report_for_lengths(seqs.lengths, quoted_log10=quoted_log10)
