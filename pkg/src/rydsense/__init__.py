"""Simulation toolkit for a Rydberg-atom differential correlation electrometer."""

__version__ = "0.1.0"
