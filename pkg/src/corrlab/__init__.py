"""Numerical toolkit for correlation decay, one-shot entropies and area laws on 1D chains."""

from .tensor import RngSeed

__version__ = "0.1.0"

__all__ = ["RngSeed", "__version__"]
