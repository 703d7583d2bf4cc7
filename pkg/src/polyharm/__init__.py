"""Riemannian simplicial complexes, Dirichlet energies, discrete harmonic
maps and pseudo-horizontally-weakly-conformal map checkers."""

__version__ = "0.1.0"
