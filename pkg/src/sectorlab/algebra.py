"""Dense finite-dimensional *-algebra kernel.

Algebras are subspaces of ``N x N`` complex matrices closed under product
and adjoint, carried as a Hilbert-Schmidt orthonormal basis.  Linear maps
between matrix spaces are carried as superoperators acting on row-major
vectorizations, ``vec(X)[i*n + j] = X[i, j]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import numerics as nx
from .errors import InvalidInput

__all__ = [
    "FiniteCStarAlgebra",
    "StateFunctional",
    "CPMap",
    "multi_matrix_algebra",
    "full_matrix_algebra",
    "commutant",
    "generated_algebra",
    "center_of",
    "minimal_central_projections",
    "is_completely_positive",
    "dual_channel",
    "random_state",
]


def _as_matrix(a, n: int | None = None) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {m.shape}")
    if n is not None and m.shape[0] != n:
        raise InvalidInput(f"expected {n}x{n} matrix, got {m.shape[0]}x{m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class FiniteCStarAlgebra:
    """A unital *-subalgebra of ``M_N``.

    ``basis`` has shape ``(dim, N, N)`` and is orthonormal for the
    Hilbert-Schmidt inner product.  ``block_dims``/``block_offsets`` are set
    for algebras built as explicit block-diagonal multi-matrix algebras.
    """

    ambient_dim: int
    basis: np.ndarray
    unit: np.ndarray
    block_dims: tuple[int, ...] | None = None
    block_offsets: tuple[int, ...] | None = None
    _center: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        n = self.ambient_dim
        if self.basis.ndim != 3 or self.basis.shape[1:] != (n, n):
            raise InvalidInput("basis must have shape (dim, N, N)")
        if not self.contains(self.unit):
            raise InvalidInput("algebra must contain its unit")
        for b in self.basis:
            if not nx.close(self.unit @ b, b, 1e-8) or not nx.close(b @ self.unit, b, 1e-8):
                raise InvalidInput("unit does not act as identity on the algebra")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def _mat(self) -> np.ndarray:
        return self.basis.reshape(self.dim, -1).T

    def project(self, x) -> np.ndarray:
        """Hilbert-Schmidt orthogonal projection of ``x`` onto the algebra."""
        x = _as_matrix(x, self.ambient_dim)
        b = self._mat()
        return (b @ (b.conj().T @ x.reshape(-1))).reshape(x.shape)

    def contains(self, x, tol: float | None = None) -> bool:
        x = np.asarray(x, dtype=complex)
        tol = nx.tol_eq() if tol is None else tol
        scale = max(1.0, nx.hs_norm(x))
        return nx.hs_norm(self.project(x) - x) <= tol * scale

    def is_closed(self, samples: int = 3) -> bool:
        """Adjoint closure exhaustively, product closure on generic pairs."""
        for b in self.basis:
            if not self.contains(nx.dagger(b), 1e-8):
                return False
        gen = nx.rng(7, self.dim)
        for _ in range(samples):
            c1 = gen.normal(size=self.dim) + 1j * gen.normal(size=self.dim)
            c2 = gen.normal(size=self.dim) + 1j * gen.normal(size=self.dim)
            x = np.tensordot(c1, self.basis, 1)
            y = np.tensordot(c2, self.basis, 1)
            if not self.contains(x @ y, 1e-8):
                return False
        return True

    def block_unit(self, k: int) -> np.ndarray:
        """Unit of block ``k`` of an explicit multi-matrix algebra."""
        if self.block_dims is None:
            raise InvalidInput("algebra carries no explicit block structure")
        p = np.zeros((self.ambient_dim,) * 2, dtype=complex)
        o, d = self.block_offsets[k], self.block_dims[k]
        p[o:o + d, o:o + d] = np.eye(d)
        return p

    def block(self, x, k: int) -> np.ndarray:
        o, d = self.block_offsets[k], self.block_dims[k]
        return np.asarray(x)[o:o + d, o:o + d]

    def assemble(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        """Block-diagonal element from per-block matrices."""
        x = np.zeros((self.ambient_dim,) * 2, dtype=complex)
        for k, b in enumerate(blocks):
            o, d = self.block_offsets[k], self.block_dims[k]
            x[o:o + d, o:o + d] = b
        return x


def _algebra_from_vectors(vecs: np.ndarray, n: int, unit=None, **kw) -> FiniteCStarAlgebra:
    cols = nx.canonical_span(vecs)
    basis = cols.T.reshape(-1, n, n)
    return FiniteCStarAlgebra(n, basis, np.eye(n, dtype=complex) if unit is None else unit, **kw)


def multi_matrix_algebra(block_dims: Sequence[int]) -> FiniteCStarAlgebra:
    """``M_{d_1} (+) ... (+) M_{d_k}`` embedded block-diagonally, basis = matrix units."""
    dims = tuple(int(d) for d in block_dims)
    if not dims or min(dims) < 1:
        raise InvalidInput("block dimensions must be positive")
    n = sum(dims)
    offsets = tuple(int(x) for x in np.concatenate([[0], np.cumsum(dims)[:-1]]))
    units = []
    for o, d in zip(offsets, dims):
        for i in range(d):
            for j in range(d):
                e = np.zeros((n, n), dtype=complex)
                e[o + i, o + j] = 1.0
                units.append(e)
    return FiniteCStarAlgebra(n, np.array(units), np.eye(n, dtype=complex), dims, offsets)


def full_matrix_algebra(n: int) -> FiniteCStarAlgebra:
    return multi_matrix_algebra([n])


def _with_adjoints(gens: Iterable, n: int) -> list[np.ndarray]:
    out = []
    for g in gens:
        m = _as_matrix(g, n)
        out.append(m)
        if not nx.close(m, nx.dagger(m), 0.0):
            out.append(nx.dagger(m))
    return out


def commutant(generators: Sequence, ambient_dim: int) -> FiniteCStarAlgebra:
    """``{X : XA = AX}`` for every generator ``A`` (adjoints appended)."""
    n = int(ambient_dim)
    gens = _with_adjoints(generators, n)
    eye = np.eye(n)
    gram = np.zeros((n * n, n * n), dtype=complex)
    for a in gens:
        k = np.kron(eye, a.T) - np.kron(a, eye)
        gram += k.conj().T @ k
    w, v = np.linalg.eigh(gram)
    scale = max(1.0, float(w[-1])) if w.size else 1.0
    # Gram eigenvalues carry absolute round-off ~eps*scale; true gaps are O(1) here
    kernel = v[:, w <= 1e-9 * scale]
    return _algebra_from_vectors(kernel, n)


def generated_algebra(generators: Sequence, ambient_dim: int | None = None) -> FiniteCStarAlgebra:
    """Unital *-algebra generated by ``generators``."""
    gens = list(generators)
    if ambient_dim is None:
        if not gens:
            raise InvalidInput("need ambient_dim when no generators are given")
        ambient_dim = np.asarray(gens[0]).shape[0]
    n = int(ambient_dim)
    gens = _with_adjoints(gens, n)
    ortho: list[np.ndarray] = []

    def add(x) -> bool:
        v = x.reshape(-1).astype(complex)
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            return False
        v = v / nv
        for _ in range(2):
            for b in ortho:
                v = v - np.vdot(b, v) * b
        if np.linalg.norm(v) < 1e-9:
            return False
        ortho.append(v / np.linalg.norm(v))
        return True

    add(np.eye(n))
    frontier = [np.eye(n, dtype=complex)]
    while frontier and len(ortho) < n * n:
        nxt = []
        for w in frontier:
            for g in gens:
                p = g @ w
                if add(p):
                    nxt.append(p)
        frontier = nxt
    return _algebra_from_vectors(np.array(ortho).T, n)


def center_of(alg: FiniteCStarAlgebra) -> tuple[FiniteCStarAlgebra, list[np.ndarray]]:
    """Center of ``alg`` together with its minimal central projections."""
    if alg._center:
        return alg._center[0]
    n, k = alg.ambient_dim, alg.dim
    rows = np.zeros((k, k, n * n), dtype=complex)
    for j in range(k):
        bj = alg.basis[j]
        rows[:, j, :] = (alg.basis @ bj - bj @ alg.basis).reshape(k, -1)
    system = rows.reshape(k, -1).T
    coeffs = nx.null_space(system, 1e-9)
    vecs = alg._mat() @ coeffs
    cols = nx.canonical_span(vecs)
    center = FiniteCStarAlgebra(n, cols.T.reshape(-1, n, n), alg.unit)
    projs = minimal_central_projections(center)
    alg._center.append((center, projs))
    return center, projs


def minimal_central_projections(center: FiniteCStarAlgebra) -> list[np.ndarray]:
    """Minimal projections of a commutative algebra from a generic Hermitian element.

    The element is redrawn (at most 8 times) until the number of eigenvalue
    clusters matches the dimension, so near-degenerate draws cannot merge
    projections.
    """
    k = center.dim
    for attempt in range(8):
        gen = nx.rng(11, attempt, k)
        a = gen.uniform(1.0, 2.0, size=k)
        b = gen.uniform(1.0, 2.0, size=k)
        h = np.zeros((center.ambient_dim,) * 2, dtype=complex)
        for ai, bi, z in zip(a, b, center.basis):
            h += ai * (z + nx.dagger(z)) + 1j * bi * (z - nx.dagger(z))
        unit = center.unit
        pairs = nx.spectral_projections(h)
        projs = [p for _, p in pairs if np.real(np.trace(p @ unit)) > 0.5]
        projs = [unit @ p @ unit for p in projs]
        if len(projs) == k and all(center.contains(p, 1e-7) for p in projs):
            return _order_projections(projs)
    raise InvalidInput("could not resolve minimal central projections")


def _order_projections(projs: list[np.ndarray]) -> list[np.ndarray]:
    def key(p):
        rank = int(round(float(np.real(np.trace(p)))))
        diag = tuple(-round(float(x), 8) for x in np.real(np.diag(p)))
        return (-rank, diag)

    return sorted(projs, key=key)


@dataclass(frozen=True, eq=False)
class StateFunctional:
    """Normal state ``A -> Tr(density A)``."""

    density: np.ndarray
    label: str = ""

    def __post_init__(self):
        rho = _as_matrix(self.density)
        if not nx.close(rho, nx.dagger(rho), 1e-9):
            raise InvalidInput("density is not Hermitian")
        if np.linalg.eigvalsh((rho + nx.dagger(rho)) / 2)[0] < -1e-10:
            raise InvalidInput("density is not positive")
        if abs(np.trace(rho) - 1) > 1e-10:
            raise InvalidInput(f"density has trace {np.trace(rho).real:.12g}, expected 1")
        object.__setattr__(self, "density", rho)

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    def __call__(self, a) -> complex:
        return complex(np.trace(self.density @ np.asarray(a)))

    def expect(self, a) -> float:
        return float(np.real(self(a)))

    @classmethod
    def from_vector(cls, psi, label: str = "") -> "StateFunctional":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), label)

    @classmethod
    def maximally_mixed(cls, n: int, label: str = "") -> "StateFunctional":
        return cls(np.eye(n, dtype=complex) / n, label)


def random_state(n: int, gen: np.random.Generator, rank: int | None = None) -> StateFunctional:
    rank = n if rank is None else rank
    g = gen.normal(size=(n, rank)) + 1j * gen.normal(size=(n, rank))
    rho = g @ g.conj().T
    return StateFunctional(rho / np.trace(rho))


OBSERVABLE = "observable"
STATE = "state"


@dataclass(frozen=True, eq=False)
class CPMap:
    """Linear map ``M_{dim_in} -> M_{dim_out}`` as a superoperator.

    ``direction`` is ``"observable"`` for Heisenberg-picture (unital) maps
    and ``"state"`` for Schroedinger-picture (trace-preserving) maps.
    """

    superop: np.ndarray
    dim_in: int
    dim_out: int
    direction: str = OBSERVABLE

    def __post_init__(self):
        if self.superop.shape != (self.dim_out ** 2, self.dim_in ** 2):
            raise InvalidInput("superoperator shape does not match dimensions")
        if self.direction not in (OBSERVABLE, STATE):
            raise InvalidInput(f"unknown direction {self.direction!r}")

    def __call__(self, x) -> np.ndarray:
        x = _as_matrix(x, self.dim_in)
        return (self.superop @ x.reshape(-1)).reshape(self.dim_out, self.dim_out)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], dim_in: int, dim_out: int,
                      direction: str = OBSERVABLE) -> "CPMap":
        cols = []
        for idx in range(dim_in * dim_in):
            e = np.zeros(dim_in * dim_in, dtype=complex)
            e[idx] = 1.0
            cols.append(np.asarray(f(e.reshape(dim_in, dim_in)), dtype=complex).reshape(-1))
        return cls(np.array(cols).T, dim_in, dim_out, direction)

    @classmethod
    def from_kraus(cls, kraus: Sequence, direction: str = STATE) -> "CPMap":
        """``X -> sum K X K*`` (state direction by default)."""
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        dout, din = ks[0].shape
        s = sum(np.kron(k, k.conj()) for k in ks)
        return cls(s, din, dout, direction)

    def choi(self) -> np.ndarray:
        """``sum_ij E_ij (x) Phi(E_ij)``."""
        din, dout = self.dim_in, self.dim_out
        j = np.zeros((din * dout, din * dout), dtype=complex)
        for i in range(din):
            for k in range(din):
                img = self.superop[:, i * din + k].reshape(dout, dout)
                j[i * dout:(i + 1) * dout, k * dout:(k + 1) * dout] = img
        return j

    def is_unital(self, tol: float | None = None) -> bool:
        return nx.close(self(np.eye(self.dim_in)), np.eye(self.dim_out), tol)

    def is_trace_preserving(self, tol: float | None = None) -> bool:
        return dual_channel(self).is_unital(tol)

    def compose(self, other: "CPMap") -> "CPMap":
        """``self o other``."""
        if other.dim_out != self.dim_in:
            raise InvalidInput("dimension mismatch in composition")
        return CPMap(self.superop @ other.superop, other.dim_in, self.dim_out, self.direction)


def is_completely_positive(m: CPMap, tol: float = 1e-9) -> tuple[bool, float]:
    """Choi test; returns the verdict and the minimum Choi eigenvalue."""
    c = m.choi()
    min_eig = float(np.linalg.eigvalsh((c + nx.dagger(c)) / 2)[0])
    return min_eig >= -tol, min_eig


def dual_channel(m: CPMap) -> CPMap:
    """Hilbert-Schmidt adjoint: ``Tr(Y* Phi(X)) = Tr(Phi^dual(Y)* X)``."""
    flipped = STATE if m.direction == OBSERVABLE else OBSERVABLE
    return CPMap(m.superop.conj().T, m.dim_out, m.dim_in, flipped)
