"""Dual-rail single-photon Deutsch-Jozsa machine in a truncated Fock space."""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
