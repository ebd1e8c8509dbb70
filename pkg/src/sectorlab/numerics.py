"""Global numerical settings and small linear-algebra helpers.

Tolerance and seed live in context variables so the CLI can override them
per run without threading state through every call.
"""
from __future__ import annotations

import contextlib
import contextvars

import numpy as np

TOL_EQ = 1e-9
CLUSTER_TOL = 1e-7
DEFAULT_SEED = 20240521

_tol = contextvars.ContextVar("tol_eq", default=TOL_EQ)
_seed = contextvars.ContextVar("seed", default=DEFAULT_SEED)


def tol_eq() -> float:
    return _tol.get()


def seed() -> int:
    return _seed.get()


@contextlib.contextmanager
def settings(tol: float | None = None, seed: int | None = None):
    """Temporarily override the equality tolerance and/or generic-draw seed."""
    tokens = []
    if tol is not None:
        tokens.append((_tol, _tol.set(float(tol))))
    if seed is not None:
        tokens.append((_seed, _seed.set(int(seed))))
    try:
        yield
    finally:
        for var, tok in reversed(tokens):
            var.reset(tok)


def rng(*stream: int) -> np.random.Generator:
    """Deterministic generator for generic-element draws, keyed by the seed."""
    return np.random.default_rng([seed(), *stream])


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def close(a, b, tol: float | None = None) -> bool:
    return hs_norm(np.asarray(a) - np.asarray(b)) <= (tol_eq() if tol is None else tol)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def null_space(m: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of ``m``."""
    m = np.atleast_2d(m)
    n = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(n, dtype=complex)
    # a thin SVD already yields every right singular vector when rows >= cols
    _, s, vh = np.linalg.svd(m, full_matrices=m.shape[0] < n)
    scale = max(s[0] if s.size else 0.0, 1.0)
    rank = int(np.sum(s > rtol * scale))
    return vh[rank:].conj().T


def canonical_span(vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Canonical orthonormal basis (columns) of the column span of ``vectors``.

    The span is put in reduced row-echelon form with pivots chosen in
    lexicographic coordinate order, then orthonormalized by modified
    Gram-Schmidt in pivot order.  The result depends only on the subspace,
    not on the spanning set handed in.
    """
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[1] == 0:
        return np.zeros((v.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    rank = int(np.sum(s > tol * max(s[0], 1e-300)))
    basis = u[:, :rank]
    rows = basis.T.copy()  # rank x n, row space == span
    pivots = []
    r_i = 0
    n = rows.shape[1]
    for col in range(n):
        if r_i >= rank:
            break
        sub = np.abs(rows[r_i:, col])
        p = int(np.argmax(sub)) if sub.size else 0
        if sub.size == 0 or sub[p] <= 1e-8:
            continue
        p += r_i
        rows[[r_i, p]] = rows[[p, r_i]]
        rows[r_i] /= rows[r_i, col]
        for j in range(rank):
            if j != r_i:
                rows[j] -= rows[j, col] * rows[r_i]
        pivots.append(col)
        r_i += 1
    out = []
    for row in rows[:r_i]:
        w = row.copy()
        for b in out:
            w = w - np.vdot(b, w) * b
        w /= np.linalg.norm(w)
        out.append(w)
    return np.array(out).T if out else np.zeros((v.shape[0], 0), dtype=complex)


def cluster_sorted(values: np.ndarray, tol: float = CLUSTER_TOL) -> list[list[int]]:
    """Group indices of ascending-sorted real ``values`` whose successive gaps are <= tol."""
    groups: list[list[int]] = []
    for i, x in enumerate(values):
        if groups and x - values[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def spectral_projections(h: np.ndarray, tol: float = CLUSTER_TOL):
    """Eigenvalue clusters of a Hermitian matrix: list of (mean eigenvalue, projection)."""
    w, v = np.linalg.eigh((h + dagger(h)) / 2)
    out = []
    for grp in cluster_sorted(w, tol):
        vecs = v[:, grp]
        out.append((float(np.mean(w[grp])), vecs @ dagger(vecs)))
    return out
