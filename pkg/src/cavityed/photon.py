"""Single cavity mode in a truncated number basis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FockSpace:
    n_fock: int
    omega: float

    def __post_init__(self):
        if self.n_fock < 2:
            raise ValueError(f"n_fock must be at least 2, got {self.n_fock}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")


@dataclass(frozen=True)
class PhotonCoordinates:
    """Displacement coordinate p, its square, and d^2/dp^2, all truncated.

    ``p_coord_sq`` is ``p_coord @ p_coord`` (not the truncation of the exact
    p^2) and ``-d2_dp2`` is the square of the truncated conjugate momentum.
    """

    p_coord: np.ndarray
    p_coord_sq: np.ndarray
    d2_dp2: np.ndarray


def ladder_operators(space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(1, space.n_fock)
    a = np.diag(np.sqrt(n.astype(float)), 1)
    return a, a.T.copy()


def coordinate_operators(space: FockSpace) -> PhotonCoordinates:
    a, ad = ladder_operators(space)
    w = space.omega
    p = (ad + a) / math.sqrt(2.0 * w)
    # -i d/dp = i sqrt(w/2) (a^+ - a), so d^2/dp^2 = (w/2) (a^+ - a)^2
    mom = math.sqrt(w / 2.0) * (ad - a)
    d2 = mom @ mom
    return PhotonCoordinates(p_coord=p, p_coord_sq=p @ p, d2_dp2=d2)


def photon_hamiltonian(space: FockSpace, subtract_vacuum: bool = True) -> np.ndarray:
    n = np.arange(space.n_fock, dtype=float)
    shift = 0.0 if subtract_vacuum else 0.5
    return np.diag((n + shift) * space.omega)


@dataclass(frozen=True)
class PinnedDipoleResult:
    ground_energy: float
    expect_p: float
    expect_N: float
    expect_Nprime: float


def pinned_dipole_oracle(R0: float, omega: float, lam: float, self_polarization: bool = True) -> PinnedDipoleResult:
    """Closed-form ground state of a mode coupled to a fixed classical dipole.

    The mode sees  1/2 [-d^2/dp^2 + w^2 (p - lam R0 / w)^2] - w/2, minus
    (lam R0)^2 / 2 when the self-polarization term is dropped.  The ground
    state is the vacuum displaced to <p> = lam R0 / w.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    shift = lam * R0
    return PinnedDipoleResult(
        ground_energy=0.0 if self_polarization else -0.5 * shift ** 2,
        expect_p=shift / omega,
        expect_N=0.0,
        expect_Nprime=shift ** 2 / (2.0 * omega),
    )


def fock_tail_population(tensor: np.ndarray, axis: int = 0, tail: int = 2) -> float:
    """Total weight of a state in the top ``tail`` number states of ``axis``."""
    t = np.moveaxis(np.asarray(tensor), axis, 0)
    return float(np.sum(np.abs(t[-tail:]) ** 2))


TRUNCATION_THRESHOLD = 1e-8
