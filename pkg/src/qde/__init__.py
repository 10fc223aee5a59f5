"""Driven quantum-dot-mediated capacitive coupling of resonant-exchange qubits."""

__version__ = "0.1.0"
