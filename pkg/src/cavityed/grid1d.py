"""Uniform 1D grids, finite-difference stencils and model potentials."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .linop.operator import BandedFactor
from .units import to_bohr


@dataclass(frozen=True)
class Grid1D:
    n_points: int
    spacing: float
    origin: float

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError(f"grid needs at least 3 points, got {self.n_points}")
        if not self.spacing > 0:
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")

    @property
    def coordinates(self) -> np.ndarray:
        return self.origin + np.arange(self.n_points) * self.spacing

    @property
    def center(self) -> float:
        return self.origin + 0.5 * (self.n_points - 1) * self.spacing

    @property
    def length(self) -> float:
        return (self.n_points - 1) * self.spacing

    def shifted(self, mu: float) -> "Grid1D":
        return Grid1D(self.n_points, self.spacing, self.origin + mu)


@dataclass(frozen=True)
class ShinMetiuParams:
    Z: float = 1.0
    Z_plus: float = 1.0
    Z_minus: float = 1.05
    M: float = 1836.0
    L: float = 18.8973
    R_c: float = 2.8346
    R_f: float = 3.7795
    m_e: float = 1.0

    def __post_init__(self):
        for name in ("M", "R_c", "R_f", "m_e", "L"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ScreenedHydrogenParams:
    Z: float = 1.0 / 20.0

    def __post_init__(self):
        if not self.Z > 0:
            raise ValueError("screened charge Z must be positive")


def make_grid(box_length: float, spacing: float, center: float = 0.0, unit: str = "bohr") -> Grid1D:
    """Odd-sized grid centred on ``center`` that fits inside ``box_length``.

    ``box_length`` is given in ``unit``; ``spacing`` and ``center`` in bohr.
    ``floor(box/spacing) + 1`` points, minus one if that count is even.
    """
    box = to_bohr(box_length, unit)
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if not box > 0:
        raise ValueError(f"box length must be positive, got {box_length} {unit}")
    # Tolerate representation error when box is an exact multiple of spacing.
    n = int(math.floor(box / spacing * (1 + 1e-12))) + 1
    if n % 2 == 0:
        n -= 1
    if n < 3:
        raise ValueError(f"box of {box} bohr holds fewer than 3 points at spacing {spacing}")
    origin = center - 0.5 * (n - 1) * spacing
    return Grid1D(n, float(spacing), float(origin))


def kinetic_operator(grid: Grid1D, mass: float = 1.0) -> BandedFactor:
    """-(1/2m) d^2/dx^2 with the 3-point stencil and hard walls."""
    if not mass > 0:
        raise ValueError("mass must be positive")
    n = grid.n_points
    h = 1.0 / (2.0 * mass * grid.spacing ** 2)
    bands = np.empty((3, n))
    bands[0] = -h
    bands[1] = 2.0 * h
    bands[2] = -h
    return BandedFactor((-1, 0, 1), bands)


def momentum_operator(grid: Grid1D) -> BandedFactor:
    """-i d/dx with the central difference and hard walls; Hermitian."""
    n = grid.n_points
    c = 1.0 / (2.0 * grid.spacing)
    bands = np.zeros((2, n), dtype=np.complex128)
    bands[0] = 1j * c   # (i, i-1)
    bands[1] = -1j * c  # (i, i+1)
    return BandedFactor((-1, 1), bands)


def shift_operator(grid: Grid1D) -> BandedFactor:
    """Ones on the superdiagonal: (S psi)_i = psi_{i+1}, zero past the wall."""
    n = grid.n_points
    return BandedFactor((1,), np.ones((1, n)))


def softened_coulomb(u, R):
    """erf(|u|/R)/|u| with the exact limit 2/(sqrt(pi) R) at u = 0."""
    u = np.abs(np.asarray(u, dtype=float))
    out = np.empty_like(u)
    small = u < 1e-8 * R
    big = ~small
    out[big] = erf(u[big] / R) / u[big]
    # erf(t)/t = 2/sqrt(pi) (1 - t^2/3 + ...)
    t2 = (u[small] / R) ** 2
    out[small] = 2.0 / (math.sqrt(math.pi) * R) * (1.0 - t2 / 3.0)
    return out


def shinmetiu_potential(x, X, params: ShinMetiuParams, center: float = 0.0):
    """Shin-Metiu potential V(x, X) in hartree; broadcasts over x and X.

    Fixed nuclei sit at ``center -+ L/2``.  Nuclear repulsions are bare
    Coulomb, electron-nucleus attractions are erf-softened.
    """
    x = np.asarray(x, dtype=float) - center
    X = np.asarray(X, dtype=float) - center
    p = params
    half = 0.5 * p.L
    dm = np.abs(X - half)
    dp = np.abs(X + half)
    if np.any(dm == 0) or np.any(dp == 0):
        raise ValueError("moving nucleus coincides with a fixed nucleus (bare Coulomb singularity)")
    return (
        p.Z * p.Z_minus / dm
        + p.Z * p.Z_plus / dp
        - p.Z_minus * softened_coulomb(x - half, p.R_c)
        - p.Z_plus * softened_coulomb(x + half, p.R_c)
        - p.Z * softened_coulomb(x - X, p.R_f)
    )


def screened_hydrogen_potential(x, params: ScreenedHydrogenParams, center: float = 0.0):
    """Soft-Coulomb well -Z / sqrt((x - center)^2 + 1)."""
    u = np.asarray(x, dtype=float) - center
    return -params.Z / np.sqrt(u * u + 1.0)
