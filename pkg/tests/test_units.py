import pytest

from cavityed import units


def test_angstrom_round_trip():
    b = units.to_bohr(59.27, "angstrom")
    assert units.bohr_to_angstrom(b) == pytest.approx(59.27, rel=1e-15)


def test_unit_aliases():
    assert units.to_bohr(1.0, "A") == units.to_bohr(1.0, "angstrom")
    assert units.to_bohr(2.5, "bohr") == 2.5
    assert units.to_hartree(units.HARTREE_TO_EV, "ev") == pytest.approx(1.0)


def test_unknown_unit():
    with pytest.raises(ValueError):
        units.to_bohr(1.0, "furlong")
