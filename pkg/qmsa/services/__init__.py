"""Pipeline stages: encoding, scoring, cost models, simulation, optimization."""
