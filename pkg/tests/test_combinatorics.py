"""Tests for exact feasible-alignment counting and the feasible-fraction bound."""

import math
from fractions import Fraction

import numpy as np
import pytest

from qmsa.core.errors import InvalidInputError
from qmsa.services.combinatorics import (
    count_report,
    count_report_for_lengths,
    feasible_count,
    fraction_upper_bound,
    log_fraction_upper_bound,
)
from qmsa.services.encoding import enumerate_feasible


class TestToyCounts:
    def test_exact_values(self, toy):
        report = count_report(toy)
        assert report.feasible_count == 2
        assert report.hilbert_dim == 64
        assert report.qubits == 6
        assert report.fraction == Fraction(1, 32)
        assert report.bound == pytest.approx(1 / 16, rel=1e-12)

    def test_serialized_big_integers_are_strings(self, toy):
        data = count_report(toy).to_dict()
        assert data["feasible_count"] == "2"
        assert data["hilbert_dim"] == "64"
        assert data["fraction"] == "1/32"


class TestAgainstEnumeration:
    def test_random_instances(self, make_instance):
        rng = np.random.default_rng(17)
        for _ in range(10):
            seqs = make_instance(rng, 20)
            assert feasible_count(seqs) == len(enumerate_feasible(seqs))


class TestBound:
    @pytest.mark.parametrize("N", [2, 3, 5, 10])
    @pytest.mark.parametrize("L", [2, 3, 6, 12, 40])
    def test_fraction_below_bound(self, N, L):
        for short in (1, L // 2, L - 1):
            if short < 1:
                continue
            report = count_report_for_lengths([L] + [short] * (N - 1))
            assert report.log10_fraction <= report.log10_bound

    def test_bound_formula(self):
        assert fraction_upper_bound(2, 2) == pytest.approx(1 / 16)
        expected = -math.lgamma(4) - (3 * math.log(2) - math.log(3)) * 5
        assert log_fraction_upper_bound(3, 3) == pytest.approx(expected)

    def test_bound_domain(self):
        with pytest.raises(InvalidInputError):
            log_fraction_upper_bound(1, 5)
        with pytest.raises(InvalidInputError):
            log_fraction_upper_bound(3, 1)


class TestSyntheticShapes:
    def test_fifty_columns_nine_strings(self):
        report = count_report_for_lengths([43] * 9, width=50)
        assert report.lengths == (50,) + (43,) * 9
        assert report.feasible_count == math.comb(50, 7) ** 9
        # the exact count is about 10^72
        assert report.log10_feasible_count == pytest.approx(9 * math.log10(math.comb(50, 7)))
        assert 71.9 < report.log10_feasible_count < 72.1

    def test_fifty_columns_serialize(self):
        data = count_report_for_lengths([43] * 9, width=50).to_dict()
        assert data["qubits"] == 21850
        assert data["hilbert_dim"] == "2^21850"
        assert int(data["feasible_count"]) == math.comb(50, 7) ** 9
        numerator, denominator = data["fraction"].split("/")
        assert denominator.startswith("2^")
        assert Fraction(int(numerator), 2 ** int(denominator[2:])) == Fraction(
            math.comb(50, 7) ** 9, 2**21850
        )
        assert data["fraction_float"] is None
        assert data["bound"] is None
        assert data["log10_fraction"] < data["log10_bound"] < 0

    def test_fifty_columns_flag_the_quoted_magnitude(self):
        report = count_report_for_lengths([43] * 9, width=50)
        assert report.quoted_log10 == 79.0
        assert "10^79" in report.quote_discrepancy
        assert "10^71.995" in report.quote_discrepancy
        assert report.to_dict()["quote_discrepancy"] == report.quote_discrepancy

    def test_quoted_magnitude_that_agrees(self):
        report = count_report_for_lengths([3, 1], quoted_log10=0.4)
        assert report.quote_discrepancy is None
        assert count_report_for_lengths([3, 1]).quoted_log10 is None

    def test_huge_shapes_stay_finite(self):
        report = count_report_for_lengths([30] * 5, width=40)
        assert math.isfinite(report.log10_fraction)
        assert report.log10_fraction < -1000

    @pytest.mark.parametrize(
        "lengths, width",
        [([5, 3], 4), ([3, 3], None), ([4], None), ([0, 2], 3)],
    )
    def test_invalid_shapes(self, lengths, width):
        with pytest.raises(InvalidInputError):
            count_report_for_lengths(lengths, width)
