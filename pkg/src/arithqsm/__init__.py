"""Desk-scale arithmetic equivalence and truncated Bost-Connes type systems."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
