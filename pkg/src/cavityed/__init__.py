"""Exact diagonalization of one-dimensional cavity QED models.

Coupled electron, nucleus and single-mode photon problems on uniform grids in
the length and Coulomb gauges, solved matrix-free with a Lanczos eigensolver.
"""

__version__ = "0.1.0"
