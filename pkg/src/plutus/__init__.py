"""Deterministic backtesting for PLUTUS reference strategies."""

__version__ = "0.1.0"
