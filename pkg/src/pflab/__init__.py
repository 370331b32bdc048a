"""Numerical toolkit for the one-electron self-energy in non-relativistic QED."""

__version__ = "0.1.0"

from . import binding, coeffs, fock, integrate, kernels  # noqa: E402,F401
