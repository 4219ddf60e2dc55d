"""Tracer-particle friction in a free Schroedinger field: kernels, memory
equations, direct simulation and steady-state drag."""

__version__ = "0.1.0"
