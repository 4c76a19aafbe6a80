"""Syndrome-aware logical error mitigation: Fisher-information analysis of stabilizer codes."""

from .codes import StabilizerCode, catalog, resolve_code
from .noise import NoiseModel, SyndromeTable, enumerate_exact, enumerate_leading, enumerate_truncated
from .pauli import PauliOp

__version__ = "0.1.0"

__all__ = [
    "NoiseModel", "PauliOp", "StabilizerCode", "SyndromeTable", "catalog",
    "enumerate_exact", "enumerate_leading", "enumerate_truncated", "resolve_code",
]
