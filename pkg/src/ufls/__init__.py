"""Islanded microgrid simulator for BESS-driven under-frequency load shedding."""

__version__ = "0.1.0"
