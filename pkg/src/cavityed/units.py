"""Unit conversions. Everything internal is in atomic units (hartree, bohr)."""

ANGSTROM_TO_BOHR = 1.8897261246
HARTREE_TO_EV = 27.211386

LENGTH_UNITS = {
    "bohr": 1.0,
    "a0": 1.0,
    "angstrom": ANGSTROM_TO_BOHR,
    "a": ANGSTROM_TO_BOHR,
}

ENERGY_UNITS = {
    "hartree": 1.0,
    "ha": 1.0,
    "ev": 1.0 / HARTREE_TO_EV,
}


def to_bohr(value, unit):
    try:
        return float(value) * LENGTH_UNITS[unit.lower()]
    except KeyError:
        raise ValueError(f"unknown length unit {unit!r}; use one of {sorted(LENGTH_UNITS)}") from None


def to_hartree(value, unit="hartree"):
    try:
        return float(value) * ENERGY_UNITS[unit.lower()]
    except KeyError:
        raise ValueError(f"unknown energy unit {unit!r}; use one of {sorted(ENERGY_UNITS)}") from None


def bohr_to_angstrom(value):
    return value / ANGSTROM_TO_BOHR


def hartree_to_ev(value):
    return value * HARTREE_TO_EV
