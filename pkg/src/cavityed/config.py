"""Run-file grammar and validation.

A run file is UTF-8 text made of ``[section]`` headers and ``key = value``
lines.  ``#`` starts a comment anywhere on a line.  Lists are comma separated.
Lengths always carry a unit (``bohr`` or ``angstrom``); energies may carry
``hartree`` (the default) or ``ev``.  Example::

    [run]
    experiment = find_resonance

    [model]
    kind = screened_hydrogen
    electron_box = 200 angstrom
    dx = 0.8 bohr

    [coupling]
    n_fock = 120
    omega = 0.01368
    g_over_omega = 0.006

Exactly one of ``lambda`` and ``g_over_omega`` is normally given; the other is
derived from lambda = (g/w) sqrt(2 w).  Both may be given only if they agree.
Every key not listed in :data:`SCHEMA` is rejected, as is a key that does not
apply to the chosen model kind or experiment.  After parsing, every default is
filled in, so :func:`serialize` writes a complete, explicit file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .grid1d import ScreenedHydrogenParams, ShinMetiuParams
from .units import ENERGY_UNITS, LENGTH_UNITS, to_bohr, to_hartree

FORMAT_VERSION = 1

EXPERIMENTS = ("spectrum", "box_sweep", "gauge_compare", "translation_test", "find_resonance")
MODEL_KINDS = ("shin_metiu", "screened_hydrogen", "pinned_dipole", "harmonic")

_REQUIRED = object()


class ConfigError(ValueError):
    """Invalid run file; ``line`` is the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Quantity:
    """A number with its unit exactly as written."""

    value: float
    unit: str

    @property
    def bohr(self) -> float:
        return to_bohr(self.value, self.unit)

    @property
    def hartree(self) -> float:
        return to_hartree(self.value, self.unit)

    def __str__(self):
        return f"{self.value!r} {self.unit}"


@dataclass(frozen=True)
class Key:
    kind: str
    default: object = None
    choices: tuple | None = None
    models: tuple | None = None  # model kinds the key applies to


_SM = ("shin_metiu",)
_GRID = ("shin_metiu", "screened_hydrogen", "harmonic")
_SM_DEF = ShinMetiuParams()

SCHEMA: dict[str, dict[str, Key]] = {
    "run": {
        "experiment": Key("str", _REQUIRED, EXPERIMENTS),
        "name": Key("str", ""),
    },
    "model": {
        "kind": Key("str", _REQUIRED, MODEL_KINDS),
        "electron_box": Key("length", _REQUIRED, models=_GRID),
        "dx": Key("length", _REQUIRED, models=_GRID),
        "nuclear_box": Key("length", Quantity(5.93, "angstrom"), models=_SM),
        "dX": Key("length", _REQUIRED, models=_SM),
        "Z": Key("float", None, models=("shin_metiu", "screened_hydrogen")),
        "Z_plus": Key("float", _SM_DEF.Z_plus, models=_SM),
        "Z_minus": Key("float", _SM_DEF.Z_minus, models=_SM),
        "M": Key("float", _SM_DEF.M, models=_SM),
        "L": Key("length", Quantity(_SM_DEF.L, "bohr"), models=_SM),
        "R_c": Key("length", Quantity(_SM_DEF.R_c, "bohr"), models=_SM),
        "R_f": Key("length", Quantity(_SM_DEF.R_f, "bohr"), models=_SM),
        "m_e": Key("float", _SM_DEF.m_e, models=_SM),
        "R0": Key("length", _REQUIRED, models=("pinned_dipole",)),
        "spring": Key("float", _REQUIRED, models=("harmonic",)),
    },
    "coupling": {
        "n_fock": Key("int", _REQUIRED),
        "omega": Key("energy", _REQUIRED),
        "g_over_omega": Key("float", None),
        "lambda": Key("float", None),
        "self_polarization": Key("bool", True),
        "diamagnetic": Key("bool", True),
        "subtract_vacuum": Key("bool", True),
        "gauge": Key("str", "length", ("length", "coulomb")),
        "coulomb_form": Key("str", "peierls", ("peierls", "polynomial")),
    },
    "solver": {
        "k": Key("int", 4),
        "tol": Key("float", 1e-9),
        "max_iter": Key("int", 5000),
        "seed": Key("int", 1234),
        "max_basis": Key("int", 0),
    },
    "sweep": {
        "boxes": Key("lengths", _REQUIRED),
        "flag": Key("str", "self_polarization", ("self_polarization", "diamagnetic")),
        "values": Key("bools", (True, False)),
    },
    "translation": {
        "shifts": Key("lengths", (Quantity(0.5, "bohr"), Quantity(1.0, "bohr"), Quantity(2.0, "bohr"))),
        "flags": Key("bools", (True, False)),
    },
    "gauge_compare": {
        "variants": Key("strs", ("both", "no_diamagnetic", "no_self_polarization"),
                        ("both", "no_diamagnetic", "no_self_polarization")),
    },
    "output": {
        "csv": Key("str", "results.csv"),
        "manifest": Key("str", "manifest.json"),
    },
}

_SECTION_EXPERIMENTS = {"sweep": ("box_sweep",), "translation": ("translation_test",),
                        "gauge_compare": ("gauge_compare",)}


@dataclass(frozen=True)
class RunConfig:
    """Validated run file: ``sections[section][key]`` with every default filled."""

    sections: dict = field(default_factory=dict)
    coupling_source: str = "g_over_omega"

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    @property
    def experiment(self) -> str:
        return self.sections["run"]["experiment"]

    @property
    def model_kind(self) -> str:
        return self.sections["model"]["kind"]

    @property
    def lam(self) -> float:
        return self.sections["coupling"]["lambda"]

    def to_dict(self) -> dict:
        """JSON-ready form with quantities as ``{"value", "unit", "bohr"|"hartree"}``."""
        out = {}
        for sec, vals in self.sections.items():
            out[sec] = {k: _jsonable(v, SCHEMA[sec][k].kind) for k, v in vals.items()}
        out["coupling_source"] = self.coupling_source
        return out


def _jsonable(v, kind):
    if isinstance(v, Quantity):
        conv = "hartree" if kind == "energy" else "bohr"
        return {"value": v.value, "unit": v.unit, conv: getattr(v, conv)}
    if isinstance(v, tuple):
        return [_jsonable(x, kind) for x in v]
    return v


# -- scalar parsing -------------------------------------------------------

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_float(text, line, key):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}", line) from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: value must be finite", line)
    return v


def _parse_quantity(text, line, key, units, default_unit=None):
    parts = text.split()
    if len(parts) == 1 and default_unit is not None:
        parts.append(default_unit)
    if len(parts) != 2:
        if len(parts) == 1:
            raise ConfigError(f"{key}: missing unit (one of {', '.join(sorted(units))})", line)
        raise ConfigError(f"{key}: expected '<number> <unit>', got {text!r}", line)
    unit = parts[1].lower()
    if unit not in units:
        raise ConfigError(f"{key}: unknown unit {parts[1]!r} (one of {', '.join(sorted(units))})", line)
    return Quantity(_parse_float(parts[0], line, key), unit)


def _parse_bool(text, line, key):
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ConfigError(f"{key}: expected true or false, got {text!r}", line)


def _split_list(text, line, key):
    items = [s.strip() for s in text.split(",")]
    if not items or any(not s for s in items):
        raise ConfigError(f"{key}: malformed list {text!r}", line)
    return items


def _parse_lengths(text, line, key):
    items = _split_list(text, line, key)
    # A single trailing unit applies to every bare number: "30, 50, 70 angstrom".
    last = items[-1].split()
    shared = last[1] if len(last) == 2 else None
    return tuple(_parse_quantity(s, line, key, LENGTH_UNITS, shared) for s in items)


def _parse_value(key_spec: Key, text: str, line: int, key: str):
    kind = key_spec.kind
    if kind == "str":
        v = text.strip()
    elif kind == "int":
        try:
            v = int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {text!r}", line) from None
    elif kind == "float":
        v = _parse_float(text, line, key)
    elif kind == "bool":
        v = _parse_bool(text, line, key)
    elif kind == "length":
        v = _parse_quantity(text, line, key, LENGTH_UNITS)
    elif kind == "energy":
        v = _parse_quantity(text, line, key, ENERGY_UNITS, default_unit="hartree")
    elif kind == "lengths":
        v = _parse_lengths(text, line, key)
    elif kind == "bools":
        v = tuple(_parse_bool(s, line, key) for s in _split_list(text, line, key))
    elif kind == "strs":
        v = tuple(_split_list(text, line, key))
    else:  # pragma: no cover
        raise AssertionError(kind)
    if key_spec.choices is not None:
        for item in (v if isinstance(v, tuple) else (v,)):
            if item not in key_spec.choices:
                raise ConfigError(f"{key}: {item!r} is not one of {', '.join(key_spec.choices)}", line)
    return v


# -- file parsing ---------------------------------------------------------


def _tokenize(text: str):
    """Yield (section, key, value, line) for every assignment."""
    section = None
    seen_sections = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            if not body.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            section = body[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno)
            if section in seen_sections:
                raise ConfigError(f"section [{section}] appears twice", lineno)
            seen_sections.add(section)
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if section is None:
            raise ConfigError("assignment before the first [section] header", lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        if not value:
            raise ConfigError(f"{key}: empty value", lineno)
        yield section, key, value, lineno


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run file; raise :class:`ConfigError` on any problem."""
    raw: dict[str, dict[str, tuple[object, int]]] = {}
    for section, key, value, line in _tokenize(text):
        spec = SCHEMA[section].get(key)
        if spec is None:
            raise ConfigError(f"unknown key {key!r} in [{section}]", line)
        if key in raw.setdefault(section, {}):
            raise ConfigError(f"duplicate key {key!r} in [{section}]", line)
        raw[section][key] = (_parse_value(spec, value, line, key), line)

    def given(section, key):
        return raw.get(section, {}).get(key, (None, None))

    experiment, _ = given("run", "experiment")
    if experiment is None:
        raise ConfigError("missing required key 'experiment' in [run]")
    kind, _ = given("model", "kind")
    if kind is None:
        raise ConfigError("missing required key 'kind' in [model]")

    sections: dict[str, dict] = {}
    for section, keys in SCHEMA.items():
        allowed_exp = _SECTION_EXPERIMENTS.get(section)
        if allowed_exp is not None and experiment not in allowed_exp:
            if section in raw:
                line = min(ln for _, ln in raw[section].values())
                raise ConfigError(f"section [{section}] does not apply to experiment {experiment!r}", line)
            continue
        out = {}
        for key, spec in keys.items():
            value, line = given(section, key)
            if spec.models is not None and kind not in spec.models:
                if line is not None:
                    raise ConfigError(f"{key} does not apply to model kind {kind!r}", line)
                continue
            if value is None:
                if spec.default is _REQUIRED:
                    raise ConfigError(f"missing required key {key!r} in [{section}]")
                value = spec.default
            out[key] = value
        sections[section] = out

    source = _resolve_coupling(sections["coupling"], raw.get("coupling", {}))
    _resolve_model_defaults(sections["model"])
    _check_consistency(sections, raw)
    return RunConfig(sections=sections, coupling_source=source)


def _resolve_coupling(c: dict, raw: dict) -> str:
    omega = c["omega"].hartree
    if not omega > 0:
        raise ConfigError("omega must be positive", raw["omega"][1])
    if c["n_fock"] < 2:
        raise ConfigError("n_fock must be at least 2", raw["n_fock"][1])
    g, lam = c["g_over_omega"], c["lambda"]
    if g is None and lam is None:
        raise ConfigError("[coupling] needs one of 'lambda' or 'g_over_omega'")
    for key in ("g_over_omega", "lambda"):
        if c[key] is not None and c[key] < 0:
            raise ConfigError(f"{key} must be non-negative", raw[key][1])
    scale = math.sqrt(2.0 * omega)
    if g is not None and lam is not None:
        if not math.isclose(lam, g * scale, rel_tol=1e-9, abs_tol=1e-15):
            raise ConfigError(
                f"'lambda' = {lam!r} and 'g_over_omega' = {g!r} disagree "
                f"(g_over_omega implies lambda = {g * scale!r}); give only one",
                max(raw["lambda"][1], raw["g_over_omega"][1]),
            )
        return "both"
    if lam is None:
        c["lambda"] = g * scale
        source = "g_over_omega"
    else:
        c["g_over_omega"] = lam / scale
        source = "lambda"
    return source


def _resolve_model_defaults(m: dict):
    if m.get("Z", 0) is None:
        m["Z"] = ShinMetiuParams().Z if m["kind"] == "shin_metiu" else ScreenedHydrogenParams().Z


def _check_consistency(sections: dict, raw: dict):
    c = sections["coupling"]
    gauge = c["gauge"]
    kind = sections["model"]["kind"]
    if gauge == "length" and not c["diamagnetic"]:
        raise ConfigError("diamagnetic = false only applies to the coulomb gauge", raw["coupling"]["diamagnetic"][1])
    if gauge == "coulomb" and not c["self_polarization"]:
        raise ConfigError("self_polarization = false only applies to the length gauge",
                          raw["coupling"]["self_polarization"][1])
    if gauge == "coulomb" and kind == "pinned_dipole":
        raise ConfigError("the pinned-dipole model is defined in the length gauge only")
    exp = sections["run"]["experiment"]
    if exp == "box_sweep":
        flag = sections["sweep"]["flag"]
        if flag == "diamagnetic" and gauge != "coulomb":
            raise ConfigError("a diamagnetic sweep needs gauge = coulomb")
        if flag == "self_polarization" and gauge != "length":
            raise ConfigError("a self-polarization sweep needs gauge = length")
        if kind == "pinned_dipole":
            raise ConfigError("box_sweep needs a model with an electron grid")
        boxes = [q.bohr for q in sections["sweep"]["boxes"]]
        if any(b2 <= b1 for b1, b2 in zip(boxes, boxes[1:])):
            raise ConfigError("sweep boxes must be strictly ascending", raw["sweep"]["boxes"][1])
    if exp == "translation_test" and (kind != "shin_metiu" or gauge != "length"):
        raise ConfigError("translation_test needs kind = shin_metiu in the length gauge")
    if exp == "gauge_compare" and kind == "pinned_dipole":
        raise ConfigError("gauge_compare needs a model with mobile charges")
    if exp == "find_resonance" and kind == "pinned_dipole":
        raise ConfigError("find_resonance needs a model with a matter Hamiltonian")
    s = sections["solver"]
    for key in ("k", "max_iter"):
        if s[key] < 1:
            raise ConfigError(f"solver {key} must be at least 1")
    if not s["tol"] > 0:
        raise ConfigError("solver tol must be positive")
    if s["max_basis"] < 0:
        raise ConfigError("solver max_basis must be non-negative (0 selects the default)")


def _format_value(v, kind) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_format_value(x, kind) for x in v)
    return str(v)


def serialize(cfg: RunConfig) -> str:
    """Complete run file that parses back to an identical :class:`RunConfig`."""
    lines = [f"# cavityed run file, format {FORMAT_VERSION}"]
    for section, vals in cfg.sections.items():
        lines.append("")
        lines.append(f"[{section}]")
        for key, v in vals.items():
            if section == "coupling" and key in ("lambda", "g_over_omega"):
                if cfg.coupling_source != "both" and key != cfg.coupling_source:
                    continue
            if v is None or v == "":
                continue
            lines.append(f"{key} = {_format_value(v, SCHEMA[section][key].kind)}")
    return "\n".join(lines) + "\n"
