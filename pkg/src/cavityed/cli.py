"""Command-line front end.

::

    cavityed run CONFIG [--out-dir DIR]     run an experiment from a run file
    cavityed run --preset NAME              run a shipped preset
    cavityed validate CONFIG | --preset NAME
    cavityed presets list
    cavityed presets show NAME

A run writes a CSV table (every float as ``%.16e``, units in the column
names) and a JSON manifest with the resolved configuration, derived
constants, software versions, wall times, residuals and warnings.  Both files
are written to a temporary name and renamed into place.

Exit codes: 0 all pairs converged, 2 partial convergence (or a failed row),
3 configuration error, 4 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import platform
import sys
import tempfile
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import scipy

from . import __version__
from . import experiments as ex
from . import observables as obs
from .config import ConfigError, RunConfig, parse_config, serialize
from .grid1d import ScreenedHydrogenParams, ShinMetiuParams, make_grid
from .linop import backend
from .model import (
    CavityCoupling,
    ConfigurationError,
    Gauge,
    HarmonicParams,
    ModelKind,
    ModelSpec,
    PinnedDipoleParams,
    SolverSettings,
    solve,
)
from .photon import FockSpace

logger = logging.getLogger("cavityed")

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4

CSV_FORMAT_VERSION = 1


# -- config -> objects ----------------------------------------------------


def build_model(cfg: RunConfig) -> ModelSpec:
    m, c = cfg["model"], cfg["coupling"]
    omega = c["omega"].hartree
    kind = ModelKind(m["kind"])
    electron = nucleus = None
    if kind is ModelKind.SHIN_METIU:
        matter = ShinMetiuParams(
            Z=m["Z"], Z_plus=m["Z_plus"], Z_minus=m["Z_minus"], M=m["M"],
            L=m["L"].bohr, R_c=m["R_c"].bohr, R_f=m["R_f"].bohr, m_e=m["m_e"],
        )
        nucleus = make_grid(m["nuclear_box"].bohr, m["dX"].bohr)
    elif kind is ModelKind.SCREENED_HYDROGEN:
        matter = ScreenedHydrogenParams(m["Z"])
    elif kind is ModelKind.HARMONIC:
        matter = HarmonicParams(m["spring"])
    else:
        matter = PinnedDipoleParams(m["R0"].bohr)
    if kind is not ModelKind.PINNED_DIPOLE:
        electron = make_grid(m["electron_box"].bohr, m["dx"].bohr)
    return ModelSpec(
        kind=kind, matter=matter, electron=electron, nucleus=nucleus,
        fock=FockSpace(c["n_fock"], omega),
        coupling=CavityCoupling(omega, c["lambda"], c["self_polarization"], c["diamagnetic"]),
        gauge=Gauge(c["gauge"]),
        subtract_vacuum=c["subtract_vacuum"],
        coulomb_form=c["coulomb_form"],
    )


def solver_settings(cfg: RunConfig) -> SolverSettings:
    s = cfg["solver"]
    return SolverSettings(k=s["k"], tol=s["tol"], max_iter=s["max_iter"], seed=s["seed"],
                          max_basis=s["max_basis"] or None)


# -- experiments ----------------------------------------------------------


@dataclass
class RunOutput:
    records: list
    details: list = field(default_factory=list)
    converged: bool = True
    failed_rows: int = 0


def _spectrum(model, solver):
    res = solve(model, solver)
    records = []
    for i, (e, r) in enumerate(zip(res.eigenvalues, res.residual_norms)):
        rec = {"index": i, "E_hartree": float(e), "residual_hartree": float(r),
               "converged": int(res.converged[i])}
        if model.gauge is Gauge.LENGTH:
            o = obs.evaluate(res.eigenvectors[i], model)
            rec.update(dipole_R_bohr=o.dipole_R, expect_p=o.expect_p, D_perp_au=o.D_perp,
                       P_perp_au=o.P_perp, E_perp_au=o.E_perp,
                       N_physical=o.N_physical, N_naive=o.N_naive)
        records.append(rec)
    detail = {"iterations": res.iterations, "restarts": res.restarts,
              "warnings": list(res.truncation_warnings), "clusters": [list(c) for c in res.clusters]}
    return RunOutput(records, [detail], res.all_converged)


def _box_sweep(cfg, model, solver):
    sw = cfg["sweep"]
    rows = ex.box_sweep(model, [q.bohr for q in sw["boxes"]], flag=sw["flag"],
                        values=sw["values"], solver=solver, unit="bohr")
    details = [{"box_bohr": r.box_bohr, sw["flag"]: r.flag_value, "iterations": r.iterations,
                "wall_time_s": r.wall_time, "warnings": r.warnings, "error": r.error} for r in rows]
    failed = sum(r.error is not None for r in rows)
    return RunOutput([r.record() for r in rows], details, all(r.converged for r in rows), failed)


def _gauge_compare(cfg, model, solver):
    cmp = ex.gauge_compare(model, variants=cfg["gauge_compare"]["variants"], solver=solver)
    details = [{"gauge": g, "flag": v, "iterations": r.iterations,
                "residuals_hartree": [float(x) for x in r.residual_norms],
                "warnings": list(r.truncation_warnings)} for (g, v), r in cmp.results.items()]
    return RunOutput([r.record() for r in cmp.rows], details, cmp.converged)


def _translation(cfg, model, solver):
    tr = cfg["translation"]
    rows = ex.translation_test(model, [q.bohr for q in tr["shifts"]], flags=tr["flags"], solver=solver)
    details = [{"self_polarization": r.self_polarization, "mu_bohr": r.mu_bohr,
                "wall_time_s": r.wall_time} for r in rows]
    return RunOutput([r.record() for r in rows], details, all(r.converged for r in rows))


def _resonance(model, solver):
    r = ex.find_resonance(model, k=solver.k, solver=solver)
    return RunOutput([r.record()], [], all(x <= solver.tol for x in r.residuals))


def run_experiment(cfg: RunConfig) -> tuple[RunOutput, ModelSpec]:
    model = build_model(cfg)
    solver = solver_settings(cfg)
    exp = cfg.experiment
    if exp == "spectrum":
        out = _spectrum(model, solver)
    elif exp == "box_sweep":
        out = _box_sweep(cfg, model, solver)
    elif exp == "gauge_compare":
        out = _gauge_compare(cfg, model, solver)
    elif exp == "translation_test":
        out = _translation(cfg, model, solver)
    else:
        out = _resonance(model, solver)
    return out, model


# -- output ---------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.16e" % v
    return str(v)


def format_csv(records: list[dict]) -> str:
    columns = []
    for rec in records:
        for key in rec:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_fmt(rec[c]) if c in rec else "" for c in columns])
    return buf.getvalue()


def atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def build_manifest(cfg: RunConfig, model: ModelSpec, out: RunOutput, wall: float, status: str) -> dict:
    c = cfg["coupling"]
    derived = {
        "lambda": c["lambda"],
        "g_over_omega": c["g_over_omega"],
        "omega_hartree": c["omega"].hartree,
        "dims": list(model.dims),
        "axes": list(model.axes),
    }
    for axis in model.matter_axes:
        g = model.grid(axis)
        derived[f"{axis}_grid"] = {"n_points": g.n_points, "spacing_bohr": g.spacing, "origin_bohr": g.origin}
    return _json_safe({
        "csv_format_version": CSV_FORMAT_VERSION,
        "software": {
            "name": "cavityed", "version": __version__, "kernel_backend": backend.name(),
            "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
        },
        "config": cfg.to_dict(),
        "config_text": serialize(cfg),
        "derived": derived,
        "status": status,
        "converged": out.converged,
        "failed_rows": out.failed_rows,
        "wall_time_s": wall,
        "rows": out.records,
        "row_details": out.details,
    })


# -- commands -------------------------------------------------------------


def _presets_dir():
    return resources.files("cavityed") / "presets"


def preset_names() -> list[str]:
    return sorted(p.name[:-4] for p in _presets_dir().iterdir() if p.name.endswith(".cfg"))


def preset_text(name: str) -> str:
    path = _presets_dir() / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return path.read_text(encoding="utf-8")


def _preset_summary(text: str) -> str:
    for line in text.splitlines():
        if line.startswith("#"):
            return line.lstrip("#").strip()
    return ""


def _load_config(args) -> RunConfig:
    if args.preset:
        text = preset_text(args.preset)
    else:
        if not args.config:
            raise ConfigError("give a run file or --preset NAME")
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
    return parse_config(text)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    if args.backend:
        backend.set_backend(args.backend)
    t0 = time.perf_counter()
    out, model = run_experiment(cfg)
    wall = time.perf_counter() - t0
    partial = not out.converged or out.failed_rows > 0
    status = "partial" if partial else "ok"
    out_dir = args.out_dir or "."
    csv_path = os.path.join(out_dir, cfg["output"]["csv"])
    man_path = os.path.join(out_dir, cfg["output"]["manifest"])
    atomic_write(csv_path, format_csv(out.records))
    manifest = build_manifest(cfg, model, out, wall, status)
    atomic_write(man_path, json.dumps(manifest, indent=2, allow_nan=False) + "\n")
    print(f"{cfg.experiment}: {len(out.records)} rows, status {status}, {wall:.1f} s")
    print(f"  {csv_path}\n  {man_path}")
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load_config(args)
    model = build_model(cfg)
    sys.stdout.write(serialize(cfg))
    print(f"# derived: lambda = {cfg['coupling']['lambda']!r}, g_over_omega = {cfg['coupling']['g_over_omega']!r}")
    print(f"# state dims {dict(zip(model.axes, model.dims))}, size {int(np.prod(model.dims))}")
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.action == "list":
        for name in preset_names():
            print(f"{name:32s} {_preset_summary(preset_text(name))}")
        return EXIT_OK
    if not args.name:
        raise ConfigError("presets show needs a preset name")
    sys.stdout.write(preset_text(args.name))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cavityed", description="Exact diagonalization of 1D cavity QED models.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    for name, helptext in (("run", "run an experiment"), ("validate", "check a run file and print it resolved")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("config", nargs="?", help="run file")
        sp.add_argument("--preset", help="use a shipped preset instead of a file")
        if name == "run":
            sp.add_argument("--out-dir", help="directory for the CSV and manifest (default: current)")
            sp.add_argument("--backend", choices=("cython", "numpy"), help="kernel backend (default: best available)")

    sp = sub.add_parser("presets", help="list or show shipped presets")
    sp.add_argument("action", choices=("list", "show"))
    sp.add_argument("name", nargs="?")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": cmd_run, "validate": cmd_validate, "presets": cmd_presets}
    try:
        return handlers[args.command](args)
    except (ConfigError, ConfigurationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
