"""Coupled light-matter Hamiltonians in the length and Coulomb gauges.

State layout is ``[photon, nucleus (Shin-Metiu only), electron]``.  The total
dipole is ``R = -x + Z X`` for Shin-Metiu, ``R = -x`` for the screened
hydrogen atom and a fixed number ``R0`` for the pinned-dipole model; the
fixed nuclei do not contribute.

Length gauge::

    H = H_matter + 1/2 (-d^2/dp^2) + w^2/2 p^2 - w/2 - w lam R p + s lam^2/2 R^2

with ``s = 1`` when the self-polarization term is kept.  The mode part
``1/2 (-d^2/dp^2) + w^2/2 p^2 - w/2`` is taken as ``w a^+ a`` on the retained
number states and ``p = (a + a^+)/sqrt(2 w)``.

Coulomb gauge: every mobile charge q of mass m sees the vector potential
``lam * q_c`` with ``q_c = (a + a^+)/sqrt(2 w)``; the mode energy is
``w a^+ a``.  Two discretizations of the minimal coupling are available:

``"peierls"`` (default)
    the hopping of the 3-point kinetic stencil acquires the phase
    ``exp(-i q lam dx q_c)``.  This is the exact grid image of
    ``(p - q lam q_c)^2 / 2m`` and is unitarily equivalent to the length
    gauge on the same grid (up to Fock truncation).
``"polynomial"``
    ``T - (q/m) lam q_c p + (q^2/2m) lam^2 q_c^2`` with the central-difference
    ``p``.  It agrees with ``"peierls"`` to second order in the grid spacing.

Without the diamagnetic term both forms reduce to ``T - (q/m) lam q_c p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import photon as ph
from .grid1d import (
    Grid1D,
    ScreenedHydrogenParams,
    ShinMetiuParams,
    kinetic_operator,
    make_grid,
    momentum_operator,
    screened_hydrogen_potential,
    shinmetiu_potential,
)
from .linop import BandedFactor, DenseFactor, HamiltonianSpec, SpectrumResult, Term, lowest_eigenpairs


class ConfigurationError(ValueError):
    pass


class Gauge(str, Enum):
    LENGTH = "length"
    COULOMB = "coulomb"


class ModelKind(str, Enum):
    SHIN_METIU = "shin_metiu"
    SCREENED_HYDROGEN = "screened_hydrogen"
    PINNED_DIPOLE = "pinned_dipole"
    HARMONIC = "harmonic"


@dataclass(frozen=True)
class PinnedDipoleParams:
    R0: float = 1.0


@dataclass(frozen=True)
class HarmonicParams:
    """Test well v(x) = 1/2 k x^2 for a unit-mass electron."""

    k: float = 1.0


@dataclass(frozen=True)
class CavityCoupling:
    omega: float
    lam: float
    self_polarization: bool = True
    diamagnetic: bool = True

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")

    @property
    def g_over_omega(self) -> float:
        return self.lam / math.sqrt(2.0 * self.omega)

    @classmethod
    def from_g_over_omega(cls, omega: float, g_over_omega: float, **flags) -> "CavityCoupling":
        return cls(omega=omega, lam=g_over_omega * math.sqrt(2.0 * omega), **flags)


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    matter: object
    electron: Grid1D | None
    nucleus: Grid1D | None
    fock: ph.FockSpace
    coupling: CavityCoupling
    gauge: Gauge = Gauge.LENGTH
    subtract_vacuum: bool = True
    coulomb_form: str = "peierls"
    origin: float = 0.0

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "gauge", Gauge(self.gauge))
        if kind is ModelKind.SHIN_METIU:
            if self.electron is None or self.nucleus is None:
                raise ConfigurationError("Shin-Metiu model needs electron and nuclear grids")
            if not isinstance(self.matter, ShinMetiuParams):
                raise ConfigurationError("Shin-Metiu model needs ShinMetiuParams")
            half = 0.5 * self.matter.L
            X = self.nucleus.coordinates - self.origin
            if np.any(np.isclose(np.abs(X), half, rtol=0, atol=1e-12)):
                raise ConfigurationError("nuclear grid contains a fixed-nucleus position")
        elif kind in (ModelKind.SCREENED_HYDROGEN, ModelKind.HARMONIC):
            if self.electron is None:
                raise ConfigurationError(f"{kind.value} model needs an electron grid")
            if self.nucleus is not None:
                raise ConfigurationError(f"{kind.value} model has no nuclear grid")
        elif kind is ModelKind.PINNED_DIPOLE:
            if self.electron is not None or self.nucleus is not None:
                raise ConfigurationError("pinned-dipole model has no matter grids")
        if not math.isclose(self.fock.omega, self.coupling.omega, rel_tol=1e-14):
            raise ConfigurationError("Fock space and coupling disagree on omega")
        if self.coulomb_form not in ("peierls", "polynomial"):
            raise ConfigurationError(f"unknown coulomb_form {self.coulomb_form!r}")

    # -- layout ------------------------------------------------------------

    @property
    def matter_axes(self) -> tuple[str, ...]:
        axes = []
        if self.nucleus is not None:
            axes.append("nucleus")
        if self.electron is not None:
            axes.append("electron")
        return tuple(axes)

    @property
    def matter_dims(self) -> tuple[int, ...]:
        return tuple(self.grid(a).n_points for a in self.matter_axes)

    @property
    def axes(self) -> tuple[str, ...]:
        return ("photon",) + self.matter_axes

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.fock.n_fock,) + self.matter_dims

    def grid(self, axis: str) -> Grid1D:
        g = {"electron": self.electron, "nucleus": self.nucleus}[axis]
        if g is None:
            raise ConfigurationError(f"model has no {axis} grid")
        return g

    def charges(self) -> dict[str, tuple[float, float]]:
        """(charge, mass) of each mobile particle, keyed by axis."""
        out = {}
        if self.nucleus is not None:
            out["nucleus"] = (self.matter.Z, self.matter.M)
        if self.electron is not None:
            m_e = getattr(self.matter, "m_e", 1.0)
            out["electron"] = (-1.0, m_e)
        return out

    def with_coupling(self, **changes) -> "ModelSpec":
        return replace(self, coupling=replace(self.coupling, **changes))

    def with_electron_box(self, box_length: float, unit: str = "angstrom") -> "ModelSpec":
        g = make_grid(box_length, self.electron.spacing, center=self.electron.center, unit=unit)
        return replace(self, electron=g)

    def shifted(self, mu: float) -> "ModelSpec":
        """Same physical system described from an origin displaced by ``-mu``."""
        return replace(
            self,
            electron=None if self.electron is None else self.electron.shifted(mu),
            nucleus=None if self.nucleus is None else self.nucleus.shifted(mu),
            origin=self.origin + mu,
        )


# -- matter pieces ---------------------------------------------------------


def _matter_shape(model: ModelSpec, with_photon: bool = True) -> tuple[int, ...]:
    lead = (1,) if with_photon else ()
    return lead + model.matter_dims


def potential_array(model: ModelSpec, with_photon: bool = True) -> np.ndarray:
    """Matter potential on the grid, shaped to broadcast over the state."""
    shape = _matter_shape(model, with_photon)
    kind = model.kind
    if kind is ModelKind.SHIN_METIU:
        X = model.nucleus.coordinates[:, None]
        x = model.electron.coordinates[None, :]
        v = shinmetiu_potential(x, X, model.matter, center=model.origin)
    elif kind is ModelKind.SCREENED_HYDROGEN:
        v = screened_hydrogen_potential(model.electron.coordinates, model.matter, center=model.origin)
    elif kind is ModelKind.HARMONIC:
        u = model.electron.coordinates - model.origin
        v = 0.5 * model.matter.k * u * u
    else:
        return np.zeros(shape)
    return np.ascontiguousarray(v.reshape(shape))


def dipole_array(model: ModelSpec, with_photon: bool = True) -> np.ndarray:
    """Total dipole R = sum of q_i x_i over mobile charges (R0 when pinned)."""
    if model.kind is ModelKind.PINNED_DIPOLE:
        return np.full((1,) if with_photon else (), float(model.matter.R0))
    shape = _matter_shape(model, with_photon)
    if model.kind is ModelKind.SHIN_METIU:
        X = model.nucleus.coordinates[:, None]
        x = model.electron.coordinates[None, :]
        r = -x + model.matter.Z * X
    else:
        r = -model.electron.coordinates
    return np.ascontiguousarray(r.reshape(shape))


def _kinetic_terms(model: ModelSpec, with_photon: bool = True) -> list[Term]:
    axes = (("photon",) if with_photon else ()) + model.matter_axes
    terms = []
    for axis, (q, mass) in model.charges().items():
        factors = [None] * len(axes)
        factors[axes.index(axis)] = kinetic_operator(model.grid(axis), mass)
        terms.append(Term(1.0, tuple(factors), label=f"kinetic_{axis}"))
    return terms


def matter_hamiltonian(model: ModelSpec) -> HamiltonianSpec:
    if model.kind is ModelKind.PINNED_DIPOLE:
        raise ConfigurationError("pinned-dipole model has no matter Hamiltonian")
    terms = _kinetic_terms(model, with_photon=False)
    terms.append(Term(1.0, (None,) * len(model.matter_axes), potential_array(model, False), "potential"))
    return HamiltonianSpec(model.matter_dims, model.matter_axes, terms, "real")


# -- coupled Hamiltonians --------------------------------------------------


def _length_photon_block(space: ph.FockSpace, subtract_vacuum: bool) -> BandedFactor:
    """1/2 (-d2/dp2) + w^2/2 p^2 as w (a^+ a + 1/2) on the retained number states.

    Building it from products of truncated matrices instead would misplace the
    top level (at w (n_fock - 1)/2), so the uncoupled spectrum would not be
    the exact tensor sum.  With this form the self-polarized photon part is
    the exact square w (a - alpha)^+ (a - alpha), alpha = lam R / sqrt(2 w).
    """
    return BandedFactor.diagonal(np.diag(ph.photon_hamiltonian(space, subtract_vacuum)))


def _photon_coordinate(space: ph.FockSpace) -> BandedFactor:
    return BandedFactor.from_dense(ph.coordinate_operators(space).p_coord)


def build_length_gauge(model: ModelSpec) -> HamiltonianSpec:
    if model.gauge is not Gauge.LENGTH:
        raise ConfigurationError("build_length_gauge needs a length-gauge model")
    if not model.coupling.diamagnetic:
        raise ConfigurationError("the diamagnetic flag only applies to the Coulomb gauge")
    c = model.coupling
    nax = len(model.axes)
    none = (None,) * (nax - 1)
    terms = _kinetic_terms(model)
    if model.kind is not ModelKind.PINNED_DIPOLE:
        terms.append(Term(1.0, (None,) * nax, potential_array(model), "potential"))
    terms.append(Term(1.0, (_length_photon_block(model.fock, model.subtract_vacuum),) + none, label="photon"))
    constant = 0.0
    if c.lam != 0.0:
        R = dipole_array(model)
        p = _photon_coordinate(model.fock)
        if model.kind is ModelKind.PINNED_DIPOLE:
            R0 = float(model.matter.R0)
            terms.append(Term(-c.omega * c.lam * R0, (p,), label="bilinear"))
            if c.self_polarization:
                constant = 0.5 * (c.lam * R0) ** 2
        else:
            terms.append(Term(-c.omega * c.lam, (p,) + none, R, "bilinear"))
            if c.self_polarization:
                terms.append(Term(0.5 * c.lam ** 2, (None,) * nax, R * R, "self_polarization"))
    return HamiltonianSpec(
        model.dims, model.axes, terms, "real", constant=constant,
        meta={"gauge": "length", "model": model.kind.value},
    )


def _peierls_factors(space: ph.FockSpace, phase_scale: float) -> tuple[DenseFactor, DenseFactor]:
    """cos and sin of ``phase_scale * q_c`` as photon-space matrices."""
    q = ph.coordinate_operators(space).p_coord
    evals, evecs = np.linalg.eigh(q)
    cos = (evecs * np.cos(phase_scale * evals)) @ evecs.T
    sin = (evecs * np.sin(phase_scale * evals)) @ evecs.T
    cos = 0.5 * (cos + cos.T)
    sin = 0.5 * (sin + sin.T)
    return DenseFactor(cos.astype(np.complex128)), DenseFactor(sin.astype(np.complex128))


def build_coulomb_gauge(model: ModelSpec) -> HamiltonianSpec:
    if model.gauge is not Gauge.COULOMB:
        raise ConfigurationError("build_coulomb_gauge needs a Coulomb-gauge model")
    if not model.coupling.self_polarization:
        raise ConfigurationError("the self-polarization flag only applies to the length gauge")
    if model.kind is ModelKind.PINNED_DIPOLE:
        raise ConfigurationError("the pinned-dipole model is defined in the length gauge only")
    c = model.coupling
    axes = model.axes
    nax = len(axes)
    space = model.fock
    terms = []
    qc = _photon_coordinate(space)
    peierls = c.lam != 0.0 and c.diamagnetic and model.coulomb_form == "peierls"
    for axis, (q, mass) in model.charges().items():
        idx = axes.index(axis)
        grid = model.grid(axis)

        def on(factor_photon, factor_matter):
            f = [None] * nax
            f[0] = factor_photon
            f[idx] = factor_matter
            return tuple(f)

        if peierls:
            hop = 1.0 / (2.0 * mass * grid.spacing ** 2)
            sym = BandedFactor((-1, 1), np.ones((2, grid.n_points)))
            anti = BandedFactor((-1, 1), np.array([-np.ones(grid.n_points), np.ones(grid.n_points)]))
            cos, sin = _peierls_factors(space, q * c.lam * grid.spacing)
            terms.append(Term(2.0 * hop, (None,) * nax, label=f"hopping_diag_{axis}"))
            terms.append(Term(-hop, on(cos, sym), label=f"hopping_cos_{axis}"))
            terms.append(Term(1j * hop, on(sin, anti), label=f"hopping_sin_{axis}"))
            continue
        f = [None] * nax
        f[idx] = kinetic_operator(grid, mass)
        terms.append(Term(1.0, tuple(f), label=f"kinetic_{axis}"))
        if c.lam == 0.0:
            continue
        terms.append(Term(-(q / mass) * c.lam, on(qc, momentum_operator(grid)), label=f"paramagnetic_{axis}"))
        if c.diamagnetic:
            qc2 = BandedFactor.from_dense(ph.coordinate_operators(space).p_coord_sq)
            terms.append(Term(0.5 * q * q / mass * c.lam ** 2, on(qc2, None), label=f"diamagnetic_{axis}"))
    terms.append(Term(1.0, (None,) * nax, potential_array(model), "potential"))
    photon = BandedFactor.diagonal(np.diag(ph.photon_hamiltonian(space, model.subtract_vacuum)))
    terms.append(Term(1.0, (photon,) + (None,) * (nax - 1), label="photon"))
    return HamiltonianSpec(
        model.dims, axes, terms, "complex",
        meta={"gauge": "coulomb", "model": model.kind.value, "coulomb_form": model.coulomb_form},
    )


def build_hamiltonian(model: ModelSpec) -> HamiltonianSpec:
    if model.gauge is Gauge.LENGTH:
        return build_length_gauge(model)
    return build_coulomb_gauge(model)


# -- solving ---------------------------------------------------------------


@dataclass(frozen=True)
class SolverSettings:
    k: int = 4
    tol: float = 1e-9
    max_iter: int = 5000
    seed: int = 1234
    max_basis: int | None = None


def solve(model: ModelSpec, solver: SolverSettings = SolverSettings()) -> SpectrumResult:
    """Lowest eigenpairs of the coupled model, with Fock-truncation checks."""
    spec = build_hamiltonian(model)
    result = lowest_eigenpairs(
        spec, k=solver.k, tol=solver.tol, max_iter=solver.max_iter,
        seed=solver.seed, max_basis=solver.max_basis,
    )
    for i, vec in enumerate(result.eigenvectors):
        tail = ph.fock_tail_population(vec.tensor, axis=0)
        if tail > ph.TRUNCATION_THRESHOLD:
            result.truncation_warnings.append(
                f"state {i}: population {tail:.3e} in the top two of {model.fock.n_fock} number states"
            )
    return result


@dataclass
class MatterSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray
    bound: np.ndarray
    converged: np.ndarray


def continuum_threshold(model: ModelSpec) -> float:
    """Lowest potential value on the electron box boundary.

    Bare eigenvalues below it are counted as bound.
    """
    v = potential_array(model, with_photon=False)
    edge = np.concatenate([np.ravel(v[..., 0]), np.ravel(v[..., -1])])
    return float(np.min(edge))


def bare_matter_spectrum(model: ModelSpec, k: int = 4, solver: SolverSettings = SolverSettings()) -> MatterSpectrum:
    """Lowest ``k`` eigenpairs of the matter Hamiltonian alone."""
    if k < 1:
        raise ValueError("k must be at least 1")
    spec = matter_hamiltonian(model)
    res = lowest_eigenpairs(
        spec, k=k, tol=solver.tol, max_iter=solver.max_iter, seed=solver.seed, max_basis=solver.max_basis,
    )
    return MatterSpectrum(
        eigenvalues=res.eigenvalues,
        eigenvectors=res.vectors(),
        residual_norms=res.residual_norms,
        bound=res.eigenvalues < continuum_threshold(model),
        converged=res.converged,
    )


def extension_criterion(lam: float, epsilon: float) -> float:
    """lam^2 / (4 eps^2) for a bound-state energy ``epsilon < 0``."""
    if not epsilon < 0:
        raise ValueError(f"extension criterion needs a bound state (epsilon < 0), got {epsilon}")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    return lam * lam / (4.0 * epsilon * epsilon)


# -- model factories -------------------------------------------------------


def shin_metiu_model(
    electron_box: float = 50.0,
    nuclear_box: float = 5.93,
    dx: float = 0.4,
    dX: float = 0.04,
    n_fock: int = 40,
    omega: float = 0.00231,
    g_over_omega: float = 0.40748,
    self_polarization: bool = True,
    params: ShinMetiuParams | None = None,
    unit: str = "angstrom",
    gauge: Gauge = Gauge.LENGTH,
    **kwargs,
) -> ModelSpec:
    params = params or ShinMetiuParams()
    return ModelSpec(
        kind=ModelKind.SHIN_METIU,
        matter=params,
        electron=make_grid(electron_box, dx, unit=unit),
        nucleus=make_grid(nuclear_box, dX, unit=unit),
        fock=ph.FockSpace(n_fock, omega),
        coupling=CavityCoupling.from_g_over_omega(omega, g_over_omega, self_polarization=self_polarization),
        gauge=gauge,
        **kwargs,
    )


def screened_hydrogen_model(
    box: float = 200.0,
    dx: float = 0.8,
    n_fock: int = 120,
    omega: float = 0.01368,
    g_over_omega: float | None = 0.006,
    lam: float | None = None,
    Z: float = 1.0 / 20.0,
    self_polarization: bool = True,
    diamagnetic: bool = True,
    gauge: Gauge = Gauge.LENGTH,
    unit: str = "angstrom",
    **kwargs,
) -> ModelSpec:
    if lam is not None:
        coupling = CavityCoupling(omega, lam, self_polarization, diamagnetic)
    else:
        coupling = CavityCoupling.from_g_over_omega(
            omega, g_over_omega, self_polarization=self_polarization, diamagnetic=diamagnetic)
    return ModelSpec(
        kind=ModelKind.SCREENED_HYDROGEN,
        matter=ScreenedHydrogenParams(Z),
        electron=make_grid(box, dx, unit=unit),
        nucleus=None,
        fock=ph.FockSpace(n_fock, omega),
        coupling=coupling,
        gauge=gauge,
        **kwargs,
    )


def pinned_dipole_model(R0: float, omega: float, lam: float, n_fock: int = 40, self_polarization: bool = True) -> ModelSpec:
    return ModelSpec(
        kind=ModelKind.PINNED_DIPOLE,
        matter=PinnedDipoleParams(R0),
        electron=None,
        nucleus=None,
        fock=ph.FockSpace(n_fock, omega),
        coupling=CavityCoupling(omega, lam, self_polarization=self_polarization),
    )
