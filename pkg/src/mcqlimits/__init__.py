"""Quantum and classical Cramér-Rao bounds for multicarrier optomechanical sensors."""

__version__ = "0.1.0"
