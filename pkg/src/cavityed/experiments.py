"""Experiment recipes: box sweeps, gauge comparison, translation, resonance.

Every recipe is a pure function of its inputs.  Each returns a list of row
objects whose ``record()`` gives the ordered CSV columns (units in the column
names); wall times are kept on the rows but are not part of the records, so
reruns produce identical tables.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import observables as obs
from .model import (
    ConfigurationError,
    Gauge,
    ModelKind,
    ModelSpec,
    SolverSettings,
    bare_matter_spectrum,
    continuum_threshold,
    solve,
)
from .units import HARTREE_TO_EV, bohr_to_angstrom, to_bohr

logger = logging.getLogger(__name__)

# Reduced resolution for quick qualitative runs.
COARSE = {"dx": 0.8, "dX": 0.08, "n_fock": 20}

SWEEP_FLAGS = ("self_polarization", "diamagnetic")


def _nan_list(k):
    return [math.nan] * k


@dataclass
class SweepRow:
    box_angstrom: float
    box_bohr: float
    n_points: dict
    flag: str
    flag_value: bool
    eigenvalues: list
    residuals: list
    dipole_R: float = math.nan
    D_perp: float = math.nan
    E_perp: float = math.nan
    N_physical: float = math.nan
    N_naive: float = math.nan
    converged: bool = False
    iterations: int = 0
    wall_time: float = 0.0
    warnings: list = field(default_factory=list)
    error: str | None = None

    def record(self) -> dict:
        rec = {
            "box_angstrom": self.box_angstrom,
            "box_bohr": self.box_bohr,
        }
        for axis, n in self.n_points.items():
            rec[f"n_{axis}"] = n
        rec[self.flag] = int(self.flag_value)
        for i, e in enumerate(self.eigenvalues):
            rec[f"E{i}_hartree"] = e
        rec.update(
            dipole_R_bohr=self.dipole_R,
            D_perp_au=self.D_perp,
            E_perp_au=self.E_perp,
            N_physical=self.N_physical,
            N_naive=self.N_naive,
        )
        for i, r in enumerate(self.residuals):
            rec[f"residual{i}_hartree"] = r
        rec["converged"] = int(self.converged)
        return rec


def _apply_flag(model: ModelSpec, flag: str, value: bool) -> ModelSpec:
    if flag not in SWEEP_FLAGS:
        raise ConfigurationError(f"unknown sweep flag {flag!r}; expected one of {SWEEP_FLAGS}")
    if flag == "diamagnetic" and model.gauge is not Gauge.COULOMB:
        raise ConfigurationError("a diamagnetic sweep needs a Coulomb-gauge template")
    if flag == "self_polarization" and model.gauge is not Gauge.LENGTH:
        raise ConfigurationError("a self-polarization sweep needs a length-gauge template")
    return model.with_coupling(**{flag: value})


def _n_points(model: ModelSpec) -> dict:
    return dict(zip(model.axes, model.dims))


def box_sweep(
    template: ModelSpec,
    boxes,
    flag: str = "self_polarization",
    values=(True, False),
    solver: SolverSettings = SolverSettings(),
    unit: str = "angstrom",
) -> list[SweepRow]:
    """Solve the template at each electron box length and flag value.

    Boxes (in ``unit``) must be strictly ascending.  A row whose solve raises
    keeps the error message and NaN values; the sweep continues.
    """
    boxes = [float(b) for b in boxes]
    if not boxes:
        raise ValueError("box list is empty")
    if any(b2 <= b1 for b1, b2 in zip(boxes, boxes[1:])):
        raise ValueError(f"boxes must be strictly ascending, got {boxes}")
    rows = []
    k = solver.k
    for box in boxes:
        base = template.with_electron_box(box, unit=unit)
        box_bohr = to_bohr(box, unit)
        for value in values:
            model = _apply_flag(base, flag, bool(value))
            row = SweepRow(
                box_angstrom=bohr_to_angstrom(box_bohr), box_bohr=box_bohr,
                n_points=_n_points(model), flag=flag, flag_value=bool(value),
                eigenvalues=_nan_list(k), residuals=_nan_list(k),
            )
            t0 = time.perf_counter()
            try:
                res = solve(model, solver)
                row.eigenvalues = [float(e) for e in res.eigenvalues]
                row.residuals = [float(r) for r in res.residual_norms]
                row.converged = res.all_converged
                row.iterations = res.iterations
                row.warnings = list(res.truncation_warnings)
                if model.gauge is Gauge.LENGTH:
                    o = obs.evaluate(res.eigenvectors[0], model)
                    row.dipole_R, row.D_perp, row.E_perp = o.dipole_R, o.D_perp, o.E_perp
                    row.N_physical, row.N_naive = o.N_physical, o.N_naive
            except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
                row.error = f"{type(exc).__name__}: {exc}"
                logger.error("box %.6g %s, %s=%s failed: %s", box, unit, flag, value, row.error)
            row.wall_time = time.perf_counter() - t0
            rows.append(row)
    return rows


@dataclass
class GaugeRow:
    variant: str
    index: int
    E_length: float
    E_coulomb: float
    residual_length: float
    residual_coulomb: float

    @property
    def delta_hartree(self) -> float:
        return abs(self.E_length - self.E_coulomb)

    @property
    def delta_ev(self) -> float:
        return self.delta_hartree * HARTREE_TO_EV

    def record(self) -> dict:
        return {
            "variant": self.variant,
            "index": self.index,
            "E_length_hartree": self.E_length,
            "E_coulomb_hartree": self.E_coulomb,
            "signed_shift_hartree": self.E_coulomb - self.E_length,
            "delta_hartree": self.delta_hartree,
            "delta_ev": self.delta_ev,
            "residual_length_hartree": self.residual_length,
            "residual_coulomb_hartree": self.residual_coulomb,
        }


GAUGE_VARIANTS = {
    # variant: (length-gauge self_polarization, Coulomb-gauge diamagnetic)
    "both": (True, True),
    "no_diamagnetic": (True, False),
    "no_self_polarization": (False, True),
}


@dataclass
class GaugeComparison:
    rows: list
    results: dict  # (gauge, flag value) -> SpectrumResult

    @property
    def converged(self) -> bool:
        return all(r.all_converged for r in self.results.values())


def gauge_compare(
    template: ModelSpec,
    variants=("both", "no_diamagnetic", "no_self_polarization"),
    solver: SolverSettings = SolverSettings(),
) -> GaugeComparison:
    """Lowest eigenvalues in both gauges on identical grids and truncation.

    The "both" variant keeps both quadratic terms; the others drop one of
    them on its own side only.  Solves are shared between variants.
    """
    for v in variants:
        if v not in GAUGE_VARIANTS:
            raise ConfigurationError(f"unknown gauge variant {v!r}")
    if template.kind is ModelKind.PINNED_DIPOLE:
        raise ConfigurationError("gauge comparison needs a model with mobile charges")
    base = template.with_coupling(self_polarization=True, diamagnetic=True)
    cache = {}

    def get(gauge, flag_value):
        key = (gauge.value, flag_value)
        if key not in cache:
            if gauge is Gauge.LENGTH:
                m = replace(base, gauge=gauge).with_coupling(self_polarization=flag_value)
            else:
                m = replace(base, gauge=gauge).with_coupling(diamagnetic=flag_value)
            cache[key] = solve(m, solver)
        return cache[key]

    rows = []
    for v in variants:
        sp, dia = GAUGE_VARIANTS[v]
        rl = get(Gauge.LENGTH, sp)
        rc = get(Gauge.COULOMB, dia)
        for i in range(min(len(rl.eigenvalues), len(rc.eigenvalues))):
            rows.append(GaugeRow(
                v, i, float(rl.eigenvalues[i]), float(rc.eigenvalues[i]),
                float(rl.residual_norms[i]), float(rc.residual_norms[i]),
            ))
    return GaugeComparison(rows=rows, results=cache)


@dataclass
class TranslationRow:
    self_polarization: bool
    mu_bohr: float
    max_density_diff: float
    E0: float
    dipole_R: float
    E_perp: float
    residual: float
    converged: bool
    wall_time: float = 0.0

    def record(self) -> dict:
        return {
            "self_polarization": int(self.self_polarization),
            "mu_bohr": self.mu_bohr,
            "max_density_diff": self.max_density_diff,
            "E0_hartree": self.E0,
            "dipole_R_bohr": self.dipole_R,
            "E_perp_au": self.E_perp,
            "residual0_hartree": self.residual,
            "converged": int(self.converged),
        }


def translation_test(
    template: ModelSpec,
    mus=(0.5, 1.0, 2.0),
    flags=(True, False),
    solver: SolverSettings = SolverSettings(k=1, tol=1e-11),
) -> list[TranslationRow]:
    """Electron ground-state density under a shift of the coordinate origin.

    For each shift mu the grids, the fixed nuclei and the potential centre all
    move by mu, so the physical configuration is unchanged and grid index i
    labels the same physical point for every mu.  Only the dipole, measured
    from the unshifted origin, changes by (Z - 1) mu; for a charged system
    that couples to the mode unless self-polarization compensates it.
    Reports max_i |n_mu(i) - n_0(i)|.
    """
    if template.kind is not ModelKind.SHIN_METIU:
        raise ConfigurationError("translation test is defined for the Shin-Metiu model")
    if template.gauge is not Gauge.LENGTH:
        raise ConfigurationError("translation test runs in the length gauge")
    mus = [float(m) for m in mus]
    limit = 0.25 * template.electron.length
    for mu in mus:
        if abs(mu) > limit:
            raise ConfigurationError(
                f"shift {mu} bohr exceeds a quarter of the electron box ({limit:.4g} bohr)")
    rows = []
    for sp in flags:
        model0 = template.with_coupling(self_polarization=bool(sp))
        ref = None
        for mu in [0.0] + [m for m in mus if m != 0.0]:
            t0 = time.perf_counter()
            model = model0.shifted(mu) if mu else model0
            res = solve(model, solver)
            psi = res.eigenvectors[0]
            dens = obs.reduced_density(psi, model, "electron")
            o = obs.field_expectations(psi, model)
            row = TranslationRow(
                self_polarization=bool(sp), mu_bohr=mu,
                max_density_diff=0.0 if ref is None else float(np.max(np.abs(dens - ref))),
                E0=float(res.eigenvalues[0]), dipole_R=obs.dipole_expectation(psi, model),
                E_perp=o.E_perp, residual=float(res.residual_norms[0]), converged=res.all_converged,
            )
            if ref is None:
                ref = dens
            row.wall_time = time.perf_counter() - t0
            if mu == 0.0 and 0.0 not in mus:
                # reference solve only; not a requested row
                continue
            rows.append(row)
    return rows


@dataclass(frozen=True)
class Resonance:
    omega: float
    eps1: float
    eps2: float
    n_bound: int
    residuals: tuple

    def record(self) -> dict:
        return {
            "omega_hartree": self.omega,
            "eps1_hartree": self.eps1,
            "eps2_hartree": self.eps2,
            "n_bound": self.n_bound,
            "residual1_hartree": self.residuals[0],
            "residual2_hartree": self.residuals[1],
        }


def find_resonance(template: ModelSpec, k: int = 4, solver: SolverSettings = SolverSettings()) -> Resonance:
    """First bare-matter excitation energy eps2 - eps1."""
    spec = bare_matter_spectrum(template, k=max(k, 2), solver=solver)
    threshold = continuum_threshold(template)
    n_bound = int(np.sum(spec.bound))
    if n_bound < 2:
        raise ValueError(f"need at least 2 bound states, found {n_bound} below {threshold:.6g} hartree")
    e1, e2 = (float(e) for e in spec.eigenvalues[:2])
    return Resonance(omega=e2 - e1, eps1=e1, eps2=e2, n_bound=n_bound,
                     residuals=tuple(float(r) for r in spec.residual_norms[:2]))
