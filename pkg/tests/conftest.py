import numpy as np
import pytest
from hypothesis import settings

from cavityed import model as M

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def tiny_shin_metiu(n_fock=5, gauge="length", **kw):
    """Shin-Metiu on a 7 x 11 grid with a few number states (dimension <= 600)."""
    return M.shin_metiu_model(
        electron_box=8.0, nuclear_box=0.56, dx=0.8, dX=0.08, n_fock=n_fock, unit="bohr", gauge=gauge, **kw
    )


def tiny_hydrogen(n_fock=8, gauge="length", box=40.0, dx=0.8, **kw):
    return M.screened_hydrogen_model(box=box, dx=dx, n_fock=n_fock, unit="bohr", gauge=gauge, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
