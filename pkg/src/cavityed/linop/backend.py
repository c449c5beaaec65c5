"""Kernel backend selection.

The compiled extension is used when importable; otherwise the numpy fallback.
``set_backend("numpy")`` forces the fallback.  ``CAVITYED_NUM_THREADS`` sets
the OpenMP thread count of the compiled kernels.
"""

import logging
import os

logger = logging.getLogger(__name__)

_active = None


def _load(name):
    if name == "numpy":
        from . import _fallback
        return _fallback
    threads = os.environ.get("CAVITYED_NUM_THREADS")
    if threads:
        # libgomp reads this once, at first use.
        os.environ["OMP_NUM_THREADS"] = threads
    from . import _kernels  # noqa: F401  (ImportError propagates)
    return _Compiled(_kernels)


class _Compiled:
    NAME = "cython"

    def __init__(self, mod):
        self._mod = mod

    def band_accumulate(self, out, src, offsets, bands, coeff):
        self._mod.band_accumulate(out, src, offsets, bands, out.dtype.type(coeff))

    def diag_accumulate(self, out, src, diag, coeff):
        self._mod.diag_accumulate(out, src, diag, coeff)


def available():
    names = ["numpy"]
    try:
        _load("cython")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def set_backend(name=None):
    """Select ``"cython"``, ``"numpy"``, or the best available (``None``)."""
    global _active
    if name is None:
        try:
            _active = _load("cython")
        except ImportError:
            logger.info("compiled kernels unavailable; using numpy fallback")
            _active = _load("numpy")
    elif name in ("cython", "numpy"):
        _active = _load(name)
    else:
        raise ValueError(f"unknown backend {name!r}; expected 'cython' or 'numpy'")
    return _active.NAME


def kernels():
    if _active is None:
        set_backend()
    return _active


def name():
    return kernels().NAME
