"""Expectation values on coupled light-matter states.

Photon operators are the same truncated matrices used to assemble the
length-gauge Hamiltonian: ``p = (a + a^+)/sqrt(2 w)`` and the mode energy
``w a^+ a``.  Hence ``w N_physical`` is exactly the expectation of the
self-polarized photon part of the Hamiltonian, and is non-negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import photon as ph
from .linop import WaveFunction
from .model import ConfigurationError, Gauge, ModelSpec, dipole_array

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class FieldExpectations:
    D_perp: float
    P_perp: float
    E_perp: float


@dataclass(frozen=True)
class PhotonNumbers:
    N_physical: float
    N_naive: float


@dataclass(frozen=True)
class ObservableSet:
    """Everything reported for one eigenstate (atomic units)."""

    dipole_R: float
    expect_p: float
    D_perp: float
    P_perp: float
    E_perp: float
    N_physical: float
    N_naive: float
    electron_density: np.ndarray | None
    nuclear_density: np.ndarray | None


def _tensor(psi, model: ModelSpec) -> np.ndarray:
    if isinstance(psi, WaveFunction):
        if tuple(psi.dims) != tuple(model.dims):
            raise ValueError(f"state dims {tuple(psi.dims)} do not match model dims {model.dims}")
        return psi.tensor
    arr = np.asarray(psi)
    if arr.size != int(np.prod(model.dims)):
        raise ValueError(f"state of size {arr.size} does not match model dims {model.dims}")
    return arr.reshape(model.dims)


def _require_length_gauge(model: ModelSpec, what: str):
    if model.gauge is not Gauge.LENGTH:
        raise ConfigurationError(f"{what} is defined for length-gauge states only")


def _photon_moments(t: np.ndarray, op: np.ndarray) -> np.ndarray:
    """(op acting on the photon index) applied to the tensor ``t``."""
    return np.tensordot(op, t, axes=(1, 0))


def _expect(t: np.ndarray, opt: np.ndarray, weight=None) -> float:
    prod = np.conj(t) * opt
    if weight is not None:
        prod = prod * weight
    return float(np.real(np.sum(prod)))


def dipole_expectation(psi, model: ModelSpec) -> float:
    """<R> with R = -x + Z X (or the pinned value R0)."""
    t = _tensor(psi, model)
    prob = np.abs(t) ** 2
    R = dipole_array(model)
    return float(np.sum(prob * R))


def photon_coordinate_expectation(psi, model: ModelSpec) -> float:
    _require_length_gauge(model, "<p>")
    t = _tensor(psi, model)
    p = ph.coordinate_operators(model.fock).p_coord
    return _expect(t, _photon_moments(t, p))


def field_expectations(psi, model: ModelSpec) -> FieldExpectations:
    """Displacement, polarization and electric field along the mode axis.

    D = w lam <p> / 4 pi, P = lam^2 <R> / 4 pi and E = 4 pi (D - P).
    """
    _require_length_gauge(model, "field expectations")
    c = model.coupling
    D = c.omega * c.lam * photon_coordinate_expectation(psi, model) / FOUR_PI
    P = c.lam ** 2 * dipole_expectation(psi, model) / FOUR_PI
    return FieldExpectations(D_perp=D, P_perp=P, E_perp=FOUR_PI * (D - P))


def photon_numbers(psi, model: ModelSpec) -> PhotonNumbers:
    """Occupation of the mode with and without the dipole shift of p.

    N_naive = <-d^2/dp^2>/2w + (w/2)<p^2> - 1/2 and N_physical is the same with
    p replaced by p - lam R / w.  With the mode energy w a^+ a these are

        N_naive = <a^+ a>,
        N_physical = <a^+ a> - lam <R p> + lam^2 <R^2> / 2w
                   = || (a - lam R / sqrt(2 w)) psi ||^2.
    """
    _require_length_gauge(model, "photon numbers")
    c = model.coupling
    t = _tensor(psi, model)
    prob = np.abs(t) ** 2
    n = np.arange(model.fock.n_fock, dtype=float).reshape((-1,) + (1,) * (t.ndim - 1))
    naive = float(np.sum(prob * n))
    if c.lam == 0.0:
        return PhotonNumbers(N_physical=naive, N_naive=naive)
    R = dipole_array(model)
    p = ph.coordinate_operators(model.fock).p_coord
    Rp = _expect(t, _photon_moments(t, p), R)
    R2 = float(np.sum(prob * R * R))
    physical = naive - c.lam * Rp + c.lam ** 2 * R2 / (2.0 * c.omega)
    return PhotonNumbers(N_physical=physical, N_naive=naive)


def reduced_density(psi, model: ModelSpec, subsystem: str) -> np.ndarray:
    """Marginal probability density of one subsystem.

    Grid densities are normalized so that ``sum(n) * spacing == 1``; the
    photon marginal is the plain number-state distribution.
    """
    axes = model.axes
    if subsystem not in axes:
        raise ConfigurationError(f"{model.kind.value} model has no {subsystem} subsystem")
    t = _tensor(psi, model)
    idx = axes.index(subsystem)
    others = tuple(i for i in range(len(axes)) if i != idx)
    n = np.sum(np.abs(t) ** 2, axis=others)
    spacing = 1.0 if subsystem == "photon" else model.grid(subsystem).spacing
    total = float(np.sum(n)) * spacing
    if not total > 0:
        raise ValueError("state has zero norm")
    return n / total


def evaluate(psi, model: ModelSpec) -> ObservableSet:
    """All observables of one length-gauge state."""
    _require_length_gauge(model, "evaluate")
    fields = field_expectations(psi, model)
    numbers = photon_numbers(psi, model)
    dens = {}
    for axis in ("electron", "nucleus"):
        dens[axis] = reduced_density(psi, model, axis) if axis in model.axes else None
    return ObservableSet(
        dipole_R=dipole_expectation(psi, model),
        expect_p=photon_coordinate_expectation(psi, model),
        D_perp=fields.D_perp,
        P_perp=fields.P_perp,
        E_perp=fields.E_perp,
        N_physical=numbers.N_physical,
        N_naive=numbers.N_naive,
        electron_density=dens["electron"],
        nuclear_density=dens["nucleus"],
    )


__all__ = [
    "FieldExpectations",
    "ObservableSet",
    "PhotonNumbers",
    "dipole_expectation",
    "evaluate",
    "field_expectations",
    "photon_coordinate_expectation",
    "photon_numbers",
    "reduced_density",
]
