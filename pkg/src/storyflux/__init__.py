"""Cluster news URLs into stories and estimate cross-community influence."""

from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
