"""Deterministic discrete-event simulator for a shared autonomous vehicle fleet."""

__version__ = "0.1.0"
