"""Multiple sequence alignment as QUBO/Ising models, solved with simulated QAOA."""

__version__ = "0.1.0"
