"""Quantum signal processing in a Hilbert-space-fragmented pair-hopping chain."""

__version__ = "0.1.0"
