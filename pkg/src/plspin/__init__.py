"""Poisson-Lie spin Sutherland laboratory on the Heisenberg double of SU(n)."""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
