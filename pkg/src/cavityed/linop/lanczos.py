"""Lowest eigenpairs of a Hermitian operator by thick-restart Lanczos.

Every new Krylov vector is orthogonalized twice against the whole retained
basis (classical Gram-Schmidt, repeated).  The projected matrix is filled with
all computed overlaps, so it equals V^H H V up to rounding rather than relying
on the three-term recurrence.  When the basis is full, the lowest Ritz vectors
are kept (thick restart) together with the current residual direction.

Ritz pairs whose estimated residual drops below half the tolerance are locked:
they stay in the basis and are orthogonalized against, but their coupling to
new directions is dropped.  Once the requested pairs have converged, one
further cycle is run from a fresh random vector orthogonal to the locked set
so that a degenerate partner missed by the first Krylov space can surface.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .operator import HamiltonianSpec, WaveFunction

logger = logging.getLogger(__name__)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: list[WaveFunction]
    residual_norms: np.ndarray
    iterations: int
    converged: np.ndarray
    tol: float
    restarts: int = 0
    truncation_warnings: list[str] = field(default_factory=list)
    clusters: list[tuple[int, ...]] = field(default_factory=list)
    history: list[float] = field(default_factory=list)

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    def vectors(self) -> np.ndarray:
        """Eigenvectors as rows of one array."""
        return np.array([v.amplitudes for v in self.eigenvectors])


class _Basis:
    def __init__(self, n, m, dtype):
        self.V = np.empty((m + 1, n), dtype=dtype)
        self.T = np.zeros((m, m), dtype=dtype)
        self.size = 0

    def orthogonalize(self, w, upto, local=0):
        """Project ``w`` off rows [0, upto); returns the overlaps.

        The ``local`` most recent rows are removed first (the three-term
        recurrence part), then one classical Gram-Schmidt pass runs over all
        rows, repeated only if it removed more than 1 - 1/sqrt(2) of the norm.
        """
        Vk = self.V[:upto]
        h = np.zeros(upto, dtype=w.dtype)
        if 0 < local < upto:
            Vl = self.V[upto - local:upto]
            hl = Vl.conj() @ w
            w -= hl @ Vl
            h[upto - local:] = hl
        before = np.linalg.norm(w)
        h1 = Vk.conj() @ w
        w -= h1 @ Vk
        h += h1
        if np.linalg.norm(w) < 0.7071067811865476 * before:
            h2 = Vk.conj() @ w
            w -= h2 @ Vk
            h += h2
        return h


def lowest_eigenpairs(
    spec: HamiltonianSpec,
    k: int = 4,
    tol: float = 1e-9,
    max_iter: int = 5000,
    seed: int = 0,
    max_basis: int | None = None,
    check_missed: bool = True,
) -> SpectrumResult:
    """The ``k`` lowest eigenpairs of ``spec``.

    ``tol`` bounds the residual norm ||H psi - E psi|| (hartree) of each
    returned pair; ``max_iter`` bounds the number of operator applications.
    The start vector is drawn from ``numpy.random.default_rng(seed)``, so a
    run is reproducible.  When the budget runs out the best current pairs are
    returned with ``converged`` flags set accordingly and a warning logged.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = spec.size
    if k > n:
        raise ValueError(f"k={k} exceeds operator dimension {n}")
    return _solve(spec.matvec, n, spec.dtype, spec.dims, k, tol, max_iter, seed, max_basis, check_missed)


def _solve(matvec, n, dtype, dims, k, tol, max_iter, seed, max_basis, check_missed):
    m = max_basis or max(2 * k + 20, 40)
    m = int(min(max(m, k + 2), n))
    rng = np.random.default_rng(seed)
    basis = _Basis(n, m, dtype)
    V, T = basis.V, basis.T

    def random_unit(upto):
        for _ in range(5):
            w = rng.standard_normal(n).astype(dtype)
            if upto:
                basis.orthogonalize(w, upto)
            nrm = np.linalg.norm(w)
            if nrm > 1e-8:
                return w / nrm
        return None

    def restart(rows, nlocked, resid):
        X = Y[:, rows].T @ V[:s]
        r = len(rows)
        V[:r] = X
        T[:, :] = 0.0
        T[np.arange(r), np.arange(r)] = theta[rows]
        if resid is None:
            resid = random_unit(r)
        V[r] = resid
        return r, nlocked

    def finalize():
        kk = min(k, s)
        vecs = Y[:, :kk].T @ V[:s]
        vals = np.empty(kk)
        res = np.empty(kk)
        for i in range(kk):
            v = vecs[i]
            v /= np.linalg.norm(v)
            hv = matvec(v)
            rq = float(np.real(np.vdot(v, hv)))
            vals[i] = rq
            res[i] = float(np.linalg.norm(hv - rq * v))
        return vals, vecs, res, kk

    V[0] = random_unit(0)
    nlock = 0          # rows [0, nlock) hold locked Ritz vectors
    start = 0          # first row whose column of T is still missing
    matvecs = 0
    restarts = 0
    history = []
    verified = not check_missed or m >= n
    lock_frac = 0.5
    exhausted = False
    w = np.empty(n, dtype=dtype)

    while True:
        s = start
        beta = 0.0
        for j in range(start, m):
            w[:] = matvec(V[j])
            matvecs += 1
            h = basis.orthogonalize(w, j + 1, local=2 if j > start else 0)
            h[:nlock] = 0.0
            T[: j + 1, j] = h
            T[j, : j + 1] = h.conj()
            T[j, j] = h[j].real
            beta = float(np.linalg.norm(w))
            s = j + 1
            if s == n:
                beta = 0.0
                break
            if beta <= 1e-12 * max(abs(h[j]), 1.0):
                # Invariant subspace: continue from an independent direction.
                nxt = random_unit(j + 1)
                beta = 0.0
                if nxt is None:
                    break
                V[j + 1] = nxt
            else:
                V[j + 1] = w / beta
            if matvecs >= max_iter:
                break

        theta, Y = np.linalg.eigh(T[:s, :s])
        est = np.abs(beta * Y[s - 1, :])
        history.append(float(theta[0]))
        kk = min(k, s)
        conv = est[:kk] <= lock_frac * tol
        resid_dir = V[s].copy() if (beta > 0 and s < n) else None

        if kk == k and conv.all():
            if not verified:
                # Probe once from a fresh direction orthogonal to the locked set.
                start, nlock = restart(list(range(k)), k, None)
                verified = True
                restarts += 1
                continue
            vals, vecs, res, kk = finalize()
            matvecs += kk
            if np.all(res <= tol) or matvecs >= max_iter or s == n:
                break
            lock_frac *= 0.1
            keep = min(s - 1, k + (m - k) // 2)
            start, nlock = restart(list(range(keep)), 0, resid_dir)
            restarts += 1
            continue

        if matvecs >= max_iter:
            exhausted = True
            vals, vecs, res, kk = finalize()
            matvecs += kk
            break

        locked = [i for i in range(kk) if conv[i]]
        keep = min(s - 1, max(k + (m - k) // 2, len(locked) + 1))
        rest = [i for i in range(s) if i not in set(locked)][: keep - len(locked)]
        start, nlock = restart(locked + rest, len(locked), resid_dir)
        restarts += 1

    order = np.argsort(vals, kind="stable")
    vals, res, vecs = vals[order], res[order], vecs[order]
    converged = res <= tol
    if exhausted or not converged.all():
        logger.warning(
            "Lanczos stopped after %d operator applications with %d/%d pairs converged (max residual %.3e)",
            matvecs, int(converged.sum()), k, float(res.max()),
        )
    return SpectrumResult(
        eigenvalues=vals,
        eigenvectors=[WaveFunction(v, dims) for v in vecs],
        residual_norms=res,
        iterations=matvecs,
        converged=converged,
        tol=tol,
        restarts=restarts,
        clusters=_clusters(vals, 10 * tol),
        history=history,
    )


def _clusters(vals, gap):
    groups, cur = [], [0]
    for i in range(1, len(vals)):
        if vals[i] - vals[i - 1] < gap:
            cur.append(i)
        else:
            if len(cur) > 1:
                groups.append(tuple(cur))
            cur = [i]
    if len(cur) > 1:
        groups.append(tuple(cur))
    return groups
