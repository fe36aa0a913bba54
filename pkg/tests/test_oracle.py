"""Tests for the brute-force oracles."""

import logging

import numpy as np
import pytest

from qmsa.core.config import Config, PenaltyConfig, SimulationConfig
from qmsa.core.errors import InvalidInputError, ResourceCapError
from qmsa.services.encoding import enumerate_feasible
from qmsa.services.hamiltonian import build_cost_qubo, build_energy_diagonal
from qmsa.services.oracle import (
    OracleService,
    best_feasible,
    brute_force_min,
    independent_energies,
)
from qmsa.services.scoring import build_weight_tensor


class TestBruteForce:
    def test_lowest_index_wins_ties(self):
        bits, energy = brute_force_min(np.array([1.0, 0.0, 0.0, 2.0]))
        assert str(bits) == "01"
        assert energy == 0.0

    def test_cap(self):
        with pytest.raises(ResourceCapError):
            brute_force_min(np.zeros(1 << 5), max_qubits=4)

    def test_best_feasible_toy(self, toy):
        bits, score = best_feasible(toy)
        assert str(bits) == "100101"
        assert score == -1.0


class TestIndependentEnergies:
    def test_agree_with_compiled_diagonal(self, make_instance, penalties):
        rng = np.random.default_rng(23)
        for _ in range(3):
            seqs = make_instance(rng, 16)
            weights = build_weight_tensor(seqs)
            compiled = build_energy_diagonal(build_cost_qubo(seqs, weights, penalties))
            np.testing.assert_allclose(
                independent_energies(seqs, weights, penalties), compiled, rtol=0, atol=1e-9
            )

    def test_best_feasible_is_the_feasible_restricted_minimum(self, make_instance):
        no_penalties = PenaltyConfig(p1=0.0, p2=0.0, p3=0.0)
        rng = np.random.default_rng(31)
        for _ in range(5):
            seqs = make_instance(rng, 16)
            diag = build_energy_diagonal(
                build_cost_qubo(seqs, build_weight_tensor(seqs), no_penalties)
            )
            feasible = sorted(b.to_index() for b in enumerate_feasible(seqs))
            restricted = min(feasible, key=lambda k: (diag[k], k))
            bits, score = best_feasible(seqs)
            assert bits.to_index() == restricted
            assert score == pytest.approx(diag[restricted], abs=1e-9)


class TestOracleService:
    def test_toy_report(self, toy):
        report = OracleService(Config()).report(toy, top_k=3)
        assert str(report.global_min_bitstring) == "100101"
        assert report.global_min_energy == -1.0
        assert str(report.feasible_min_bitstring) == "100101"
        assert report.energy_histogram[0] == ("100101", -1.0)
        assert len(report.energy_histogram) == 3
        data = report.to_dict()
        assert data["lowest_energies"][0]["bitstring"] == "100101"
        assert isinstance(data["feasible_min"]["sp_score"], int)

    def test_cross_validation_agrees_with_defaults(self, toy):
        check = OracleService(Config()).cross_validate(toy)
        assert check.consistent
        assert check.global_min_feasible
        assert check.score_spread == 2.0
        # p2 = p3 = 1 does not exceed the spread, yet the minima still agree
        assert not check.penalties_sufficient
        assert check.findings == ()

    def test_margin_rule_with_large_penalties(self, toy):
        strong = PenaltyConfig(p1=10.0, p2=10.0, p3=10.0)
        check = OracleService(Config()).cross_validate(toy, strong)
        assert check.penalties_sufficient
        assert check.consistent

    def test_small_penalties_are_reported_not_raised(self, toy, caplog):
        weak = PenaltyConfig(p1=0.1, p2=0.1, p3=0.1)
        with caplog.at_level(logging.WARNING):
            check = OracleService(Config()).cross_validate(toy, weak)
        assert not check.consistent
        assert not check.global_min_feasible
        assert not check.penalties_sufficient
        assert check.global_min_energy < -1.0
        assert any("infeasible" in f for f in check.findings)
        assert "agreement is not guaranteed" in caplog.text
        assert check.to_dict()["penalty_margin"]["sufficient"] is False

    def test_top_k_must_be_positive(self, toy):
        with pytest.raises(InvalidInputError):
            OracleService(Config()).report(toy, top_k=0)

    def test_scan_cap(self, toy):
        config = Config(simulation=SimulationConfig(max_qubits=5, threads=1))
        with pytest.raises(ResourceCapError):
            OracleService(config).report(toy)
