from . import backend
from .lanczos import SpectrumResult, lowest_eigenpairs
from .operator import BandedFactor, DenseFactor, HamiltonianSpec, Term, WaveFunction, apply

__all__ = [
    "BandedFactor",
    "DenseFactor",
    "HamiltonianSpec",
    "SpectrumResult",
    "Term",
    "WaveFunction",
    "apply",
    "backend",
    "lowest_eigenpairs",
]
