"""Shared fixtures: the two-string toy instance, small random instances, fast settings."""

from typing import Callable

import numpy as np
import pytest

from qmsa.core.config import Config, OptimizerConfig, PenaltyConfig, SimulationConfig
from qmsa.models.alignment import ALPHABET, SequenceSet

InstanceFactory = Callable[[np.random.Generator, int], SequenceSet]


@pytest.fixture
def toy() -> SequenceSet:
    """AG over G: six qubits, two feasible alignments."""
    return SequenceSet(("AG", "G"))


@pytest.fixture
def penalties() -> PenaltyConfig:
    return PenaltyConfig(p1=10.0, p2=1.0, p3=1.0)


@pytest.fixture
def fast_config() -> Config:
    return Config(
        penalties=PenaltyConfig(p1=10.0, p2=1.0, p3=1.0),
        optimizer=OptimizerConfig(starts=2, max_evaluations=80, seed=7),
        simulation=SimulationConfig(shots=500, threads=1),
    )


@pytest.fixture
def make_instance() -> InstanceFactory:
    """Random instance with a unique reference string and at most ``max_qubits`` qubits."""

    def build(rng: np.random.Generator, max_qubits: int) -> SequenceSet:
        while True:
            L = int(rng.integers(2, 5))
            N = int(rng.integers(2, 4))
            lengths = [L] + [int(rng.integers(1, L)) for _ in range(N - 1)]
            if L * sum(lengths) > max_qubits:
                continue
            strings = tuple(
                "".join(rng.choice(list(ALPHABET), size=length)) for length in lengths
            )
            return SequenceSet(strings)

    return build
