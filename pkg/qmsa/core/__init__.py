"""Core functionality for qmsa."""
