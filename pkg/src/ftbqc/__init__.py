"""Simulation of fault-tolerant blind quantum computation on Steane-encoded cluster states."""

__version__ = "0.1.0"
