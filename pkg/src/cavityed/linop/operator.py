"""Kronecker-structured Hermitian operators applied without materialization.

An operator is an ordered list of :class:`Term` objects.  Each term is

    coeff * (F_0 (x) F_1 (x) ... (x) F_{d-1}) * D

acting on a state stored as a C-ordered array of shape ``dims``.  ``F_k`` is
a per-axis factor (``None`` meaning identity) and ``D`` is an optional real
diagonal that depends on a trailing block of axes only, e.g. a potential
V(X, x) over the matter axes that is broadcast over the photon axis.  The
diagonal is applied first, then the factors.  Axes carrying a factor and axes
the diagonal depends on must be disjoint, so each term is Hermitian whenever
its factors are.

Reduction order: terms are accumulated into the output in list order after
compilation (see :meth:`HamiltonianSpec.plan`); inside a banded factor the
offsets are summed in ascending order.  For a fixed backend and thread count
the result is therefore bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import backend


@dataclass(frozen=True, eq=False)
class BandedFactor:
    """Square matrix stored by diagonals: ``bands[k, i] = M[i, i + offsets[k]]``.

    Entries falling outside the matrix are ignored (and kept at zero).
    """

    offsets: tuple[int, ...]
    bands: np.ndarray

    def __post_init__(self):
        bands = np.ascontiguousarray(self.bands)
        if bands.ndim != 2 or bands.shape[0] != len(self.offsets):
            raise ValueError("bands must have shape (len(offsets), n)")
        order = np.argsort(self.offsets, kind="stable")
        offsets = tuple(int(self.offsets[i]) for i in order)
        if len(set(offsets)) != len(offsets):
            raise ValueError("duplicate band offsets")
        bands = np.ascontiguousarray(bands[order])
        n = bands.shape[1]
        for k, off in enumerate(offsets):
            lo, hi = max(0, -off), min(n, n - off)
            bands[k, :lo] = 0
            bands[k, hi:] = 0
        bands.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "bands", bands)

    @property
    def n(self) -> int:
        return self.bands.shape[1]

    @property
    def dtype(self):
        return self.bands.dtype

    @cached_property
    def offsets_array(self) -> np.ndarray:
        return np.asarray(self.offsets, dtype=np.int64)

    @classmethod
    def diagonal(cls, values) -> "BandedFactor":
        return cls((0,), np.asarray(values)[None, :])

    @classmethod
    def from_dense(cls, matrix, atol: float = 0.0) -> "BandedFactor":
        matrix = np.asarray(matrix)
        n = matrix.shape[0]
        offsets, bands = [], []
        for off in range(-(n - 1), n):
            diag = np.diagonal(matrix, off)
            if np.any(np.abs(diag) > atol):
                row = np.zeros(n, dtype=matrix.dtype)
                if off >= 0:
                    row[: n - off] = diag
                else:
                    row[-off:] = diag
                offsets.append(off)
                bands.append(row)
        if not offsets:
            offsets, bands = [0], [np.zeros(n, dtype=matrix.dtype)]
        return cls(tuple(offsets), np.array(bands))

    def to_dense(self) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n), dtype=self.dtype)
        rows = np.arange(n)
        for k, off in enumerate(self.offsets):
            lo, hi = max(0, -off), min(n, n - off)
            out[rows[lo:hi], rows[lo:hi] + off] = self.bands[k, lo:hi]
        return out

    def astype(self, dtype) -> "BandedFactor":
        if self.dtype == dtype:
            return self
        return BandedFactor(self.offsets, self.bands.astype(dtype))


@dataclass(frozen=True, eq=False)
class DenseFactor:
    """Small dense factor, used for photon-space matrix functions."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("dense factor must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def dtype(self):
        return self.matrix.dtype

    def to_dense(self) -> np.ndarray:
        return np.array(self.matrix)

    def astype(self, dtype) -> "DenseFactor":
        if self.dtype == dtype:
            return self
        return DenseFactor(self.matrix.astype(dtype))


Factor = BandedFactor | DenseFactor


@dataclass(frozen=True, eq=False)
class Term:
    coeff: complex
    factors: tuple
    diag: np.ndarray | None = None
    label: str = ""


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Composite state; ``amplitudes`` is flat, C-ordered over ``dims``."""

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes).reshape(-1)
        dims = tuple(int(d) for d in self.dims)
        if amps.size != int(np.prod(dims)):
            raise ValueError(f"amplitude length {amps.size} does not match dims {dims}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class _Step:
    kind: str  # "diag" or "term"
    coeff: complex
    ops: tuple  # ((axis, factor), ...) applied in order
    diag: np.ndarray | None


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    dims: tuple[int, ...]
    axes: tuple[str, ...]
    terms: tuple[Term, ...]
    scalar_field: str = "real"
    constant: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.axes) != len(dims):
            raise ValueError("axes and dims differ in length")
        if self.scalar_field not in ("real", "complex"):
            raise ValueError("scalar_field must be 'real' or 'complex'")
        for term in self.terms:
            self._check_term(term)

    def _check_term(self, term: Term):
        if len(term.factors) != len(self.dims):
            raise ValueError(f"term {term.label!r}: expected {len(self.dims)} factors")
        for axis, f in enumerate(term.factors):
            if f is not None and f.n != self.dims[axis]:
                raise ValueError(
                    f"term {term.label!r}: factor on axis {self.axes[axis]} has size {f.n}, "
                    f"expected {self.dims[axis]}"
                )
            if self.scalar_field == "real" and f is not None and np.iscomplexobj(f.to_dense()):
                raise ValueError(f"term {term.label!r}: complex factor in a real operator")
        if self.scalar_field == "real" and np.imag(term.coeff) != 0:
            raise ValueError(f"term {term.label!r}: complex coefficient in a real operator")
        if term.diag is not None:
            d = term.diag
            if d.ndim != len(self.dims):
                raise ValueError(f"term {term.label!r}: diag must have one (possibly unit) axis per subsystem")
            if np.iscomplexobj(d):
                raise ValueError(f"term {term.label!r}: diag must be real")
            nz = [i for i, s in enumerate(d.shape) if s != 1]
            if nz:
                first = nz[0]
                for i in range(first, len(self.dims)):
                    if d.shape[i] != self.dims[i]:
                        raise ValueError(f"term {term.label!r}: diag must span a trailing block of axes")
                for i in range(first, len(self.dims)):
                    if term.factors[i] is not None:
                        raise ValueError(f"term {term.label!r}: diag and factor share axis {self.axes[i]}")

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def dtype(self):
        return np.complex128 if self.scalar_field == "complex" else np.float64

    def axis(self, name: str) -> int:
        return self.axes.index(name)

    # -- compilation -------------------------------------------------------

    @cached_property
    def plan(self) -> tuple[_Step, ...]:
        """Merge identity and diagonal-only terms into one diagonal; keep the rest."""
        dtype = self.dtype
        merged = np.zeros(self.dims, dtype=np.float64)
        have_diag = self.constant != 0.0
        merged += self.constant
        steps = []
        for term in self.terms:
            active = [(a, f) for a, f in enumerate(term.factors) if f is not None]
            if not active:
                c = np.real(term.coeff)
                merged += c * (term.diag if term.diag is not None else 1.0)
                have_diag = True
                continue
            diag = None
            if term.diag is not None:
                diag = np.ascontiguousarray(term.diag, dtype=np.float64)
            ops = tuple((a, f.astype(dtype)) for a, f in active)
            steps.append(_Step("term", complex(term.coeff) if dtype == np.complex128 else float(np.real(term.coeff)), ops, diag))
        out = []
        if have_diag:
            # Trim merged to its minimal trailing block.
            out.append(_Step("diag", 1.0, (), _trim_trailing(merged)))
        out.extend(steps)
        return tuple(out)

    # -- application -------------------------------------------------------

    def matvec(self, vec: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Apply to a flat vector; returns a flat vector of the operator dtype."""
        dtype = self.dtype
        x = np.ascontiguousarray(vec, dtype=dtype).reshape(self.dims)
        if out is None:
            y = np.zeros(self.dims, dtype=dtype)
        else:
            y = out.reshape(self.dims)
            y.fill(0)
        kern = backend.kernels()
        for step in self.plan:
            if step.kind == "diag":
                kern.diag_accumulate(y, x, step.diag, step.coeff)
                continue
            _apply_step(kern, step, x, y, dtype)
        return y.reshape(-1)

    def to_dense(self) -> np.ndarray:
        """Explicit matrix; only for small test instances."""
        n = self.size
        if n > 20000:
            raise ValueError(f"refusing to materialize a {n}x{n} matrix")
        eye = np.eye(n, dtype=self.dtype)
        cols = [self.matvec(eye[:, j]) for j in range(n)]
        return np.array(cols).T

    def to_dense_kron(self) -> np.ndarray:
        """Materialize directly from Kronecker products (independent of matvec)."""
        n = self.size
        if n > 20000:
            raise ValueError(f"refusing to materialize a {n}x{n} matrix")
        total = np.zeros((n, n), dtype=self.dtype)
        total += self.constant * np.eye(n)
        for term in self.terms:
            mat = np.ones((1, 1), dtype=self.dtype)
            for axis, f in enumerate(term.factors):
                part = np.eye(self.dims[axis]) if f is None else f.to_dense()
                mat = np.kron(mat, part)
            if term.diag is not None:
                d = np.broadcast_to(term.diag, self.dims).reshape(-1)
                mat = mat * d[None, :]
            total += term.coeff * mat
        return total


def _trim_trailing(arr: np.ndarray) -> np.ndarray:
    """Collapse leading axes along which ``arr`` is constant to size 1."""
    a = arr
    for axis in range(arr.ndim):
        if a.shape[axis] == 1:
            continue
        first = np.take(a, [0], axis=axis)
        if np.array_equal(np.broadcast_to(first, a.shape), a):
            a = first
        else:
            break
    return np.ascontiguousarray(a)


def _apply_factor(kern, factor, axis, src, dst, coeff):
    """dst += coeff * (factor along axis) src, for C-ordered arrays."""
    shape = src.shape
    A = int(np.prod(shape[:axis], dtype=np.int64))
    B = int(np.prod(shape[axis + 1:], dtype=np.int64))
    n = shape[axis]
    s3 = src.reshape(A, n, B)
    d3 = dst.reshape(A, n, B)
    if isinstance(factor, DenseFactor):
        m = factor.matrix
        if A == 1:
            d3[0] += coeff * (m @ s3[0])
        else:
            d3 += coeff * np.einsum("ij,ajb->aib", m, s3)
        return
    kern.band_accumulate(d3, s3, factor.offsets_array, factor.bands, coeff)


def _apply_step(kern, step: _Step, x, y, dtype):
    src = x
    if step.diag is not None:
        tmp = np.zeros_like(x)
        kern.diag_accumulate(tmp, x, step.diag, 1.0)
        src = tmp
    ops = step.ops
    for axis, factor in ops[:-1]:
        tmp = np.zeros_like(x)
        _apply_factor(kern, factor, axis, src, tmp, 1.0)
        src = tmp
    axis, factor = ops[-1]
    _apply_factor(kern, factor, axis, src, y, step.coeff)


def apply(spec: HamiltonianSpec, psi: WaveFunction) -> WaveFunction:
    """Matrix-free ``H psi``."""
    if tuple(psi.dims) != spec.dims:
        raise ValueError(f"state dims {psi.dims} do not match operator dims {spec.dims}")
    return WaveFunction(spec.matvec(psi.amplitudes), spec.dims)
