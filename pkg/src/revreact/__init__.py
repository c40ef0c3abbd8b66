"""Entropy-structured simulation and audit harness for the reversible reaction A1 + A3 <-> A2 + A4."""

__version__ = "0.1.0"
