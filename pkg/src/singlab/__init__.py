"""Numerical verification laboratory for exact Navier-Stokes solutions,
Hermite spectral ladders, and blow-up rescalings."""

__version__ = "0.1.0"
