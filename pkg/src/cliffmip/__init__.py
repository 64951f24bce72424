"""Simulation and classical compilation of Clifford-restricted multi-prover strategies."""

__version__ = "0.1.0"
