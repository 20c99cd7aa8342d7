"""Entanglement entropy of random pure states and fermionic Gaussian states."""
from __future__ import annotations

__version__ = "0.1.0"
