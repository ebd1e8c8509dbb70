"""Finite groups, unitary representations, characters and group actions.

Element ``0`` is always the identity.  Products follow the Cayley table,
``cayley[g, h] = g*h``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import numerics as nx
from .algebra import FiniteCStarAlgebra, _algebra_from_vectors, full_matrix_algebra
from .errors import CharacterTableFailure, InvalidInput

__all__ = [
    "FiniteGroup", "UnitaryRep", "Irrep", "GroupDual", "GroupAction",
    "cyclic", "dihedral", "symmetric", "quaternion", "preset",
    "regular_rep", "character_table", "isotypic_projections", "multiplicity",
    "group_average", "fixed_point_algebra", "inner_action",
]


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    cayley: np.ndarray
    name: str = ""
    inverse: np.ndarray = field(init=False, repr=False)
    classes: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        c = np.asarray(self.cayley)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
            raise InvalidInput("Cayley table must be a non-empty square table")
        n = c.shape[0]
        if not np.issubdtype(c.dtype, np.integer):
            raise InvalidInput("Cayley table entries must be integers")
        for r in range(n):
            row = c[r]
            if row.min() < 0 or row.max() >= n:
                raise InvalidInput(f"Cayley table row {r}: entry out of range 0..{n - 1}")
            if len(set(row.tolist())) != n:
                raise InvalidInput(f"Cayley table row {r} is not a permutation (not a Latin square)")
        for col in range(n):
            if len(set(c[:, col].tolist())) != n:
                raise InvalidInput(f"Cayley table column {col} is not a permutation (not a Latin square)")
        if not (np.array_equal(c[0], np.arange(n)) and np.array_equal(c[:, 0], np.arange(n))):
            bad = int(np.argmax((c[0] != np.arange(n)) | (c[:, 0] != np.arange(n))))
            raise InvalidInput(f"Cayley table row {bad}: element 0 must be the identity")
        for a in range(n):
            if not np.array_equal(c[c[a], :], c[a][c]):
                raise InvalidInput(f"Cayley table row {a}: associativity fails")
        inv = np.argmax(c == 0, axis=1)
        object.__setattr__(self, "cayley", c.astype(np.int64))
        object.__setattr__(self, "inverse", inv)
        seen: set[int] = set()
        classes = []
        for g in range(n):
            if g in seen:
                continue
            cl = sorted({int(c[c[h, g], inv[h]]) for h in range(n)})
            seen.update(cl)
            classes.append(tuple(cl))
        object.__setattr__(self, "classes", tuple(classes))

    @property
    def order(self) -> int:
        return self.cayley.shape[0]

    def mul(self, g: int, h: int) -> int:
        return int(self.cayley[g, h])

    def inv(self, g: int) -> int:
        return int(self.inverse[g])

    def class_of(self, g: int) -> int:
        for k, cl in enumerate(self.classes):
            if g in cl:
                return k
        raise InvalidInput(f"element {g} out of range")

    def is_subgroup(self, elements: Sequence[int]) -> bool:
        s = set(int(e) for e in elements)
        if 0 not in s or not s <= set(range(self.order)):
            return False
        return all(self.mul(a, b) in s for a in s for b in s) and all(self.inv(a) in s for a in s)

    def subgroup(self, elements: Sequence[int]) -> tuple["FiniteGroup", list[int]]:
        """Subgroup as a group in its own right, with the map to parent indices."""
        if not self.is_subgroup(elements):
            raise InvalidInput(f"{sorted(elements)} is not a subgroup")
        parent = sorted(set(int(e) for e in elements))
        index = {g: i for i, g in enumerate(parent)}
        table = np.array([[index[self.mul(a, b)] for b in parent] for a in parent])
        return FiniteGroup(table, f"sub({self.name})"), parent

    def words(self, generators: Sequence[int]) -> list[tuple[int, int]]:
        """Breadth-first spanning tree: ``words[g] = (s, p)`` with ``g = s*p``.

        The identity maps to ``(-1, -1)``.  Raises if the generators do not
        generate the whole group.
        """
        out: list = [None] * self.order
        out[0] = (-1, -1)
        frontier = [0]
        while frontier:
            nxt = []
            for p in frontier:
                for s in generators:
                    g = self.mul(s, p)
                    if out[g] is None:
                        out[g] = (int(s), p)
                        nxt.append(g)
            frontier = nxt
        missing = [g for g in range(self.order) if out[g] is None]
        if missing:
            raise InvalidInput(f"generators {list(generators)} do not generate element {missing[0]}")
        return out

    def bfs_order(self, generators: Sequence[int]) -> list[int]:
        words = self.words(generators)
        order = [0]
        i = 0
        while i < len(order):
            p = order[i]
            for s in generators:
                g = self.mul(s, p)
                if words[g] == (s, p) and g not in order:
                    order.append(g)
            i += 1
        return order


def cyclic(n: int) -> FiniteGroup:
    a = np.arange(n)
    return FiniteGroup((a[:, None] + a[None, :]) % n, f"Z{n}")


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon; element ``k + n*j`` is ``r^k s^j``."""
    size = 2 * n
    t = np.zeros((size, size), dtype=np.int64)
    for x in range(size):
        a, i = x % n, x // n
        for y in range(size):
            b, j = y % n, y // n
            k = (a + (b if i == 0 else -b)) % n
            t[x, y] = k + n * ((i + j) % 2)
    return FiniteGroup(t, f"D{n}")


def symmetric(n: int) -> FiniteGroup:
    """Permutations of ``range(n)`` in lexicographic order; ``(g*h)(x) = g(h(x))``."""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    t = np.array([[index[tuple(g[h[x]] for x in range(n))] for h in perms] for g in perms])
    return FiniteGroup(t, f"S{n}")


def quaternion() -> FiniteGroup:
    """Elements ordered ``1, -1, i, -i, j, -j, k, -k``."""
    one = np.eye(2)
    qi = np.array([[1j, 0], [0, -1j]])
    qj = np.array([[0, 1], [-1, 0]], dtype=complex)
    qk = qi @ qj
    mats = [one, -one, qi, -qi, qj, -qj, qk, -qk]

    def find(m):
        return next(i for i, x in enumerate(mats) if np.allclose(x, m))

    t = np.array([[find(a @ b) for b in mats] for a in mats])
    return FiniteGroup(t, "Q8")


def preset(name: str, n: int | None = None) -> FiniteGroup:
    key = name.strip().upper()
    if key in ("Z", "C", "CYCLIC"):
        return cyclic(int(n))
    if key in ("D", "DIHEDRAL"):
        return dihedral(int(n))
    if key in ("S", "SYMMETRIC"):
        return symmetric(int(n))
    if key in ("Q8", "QUATERNION"):
        return quaternion()
    if key[0] in "ZCDS" and key[1:].isdigit():
        return preset(key[0], int(key[1:]))
    raise InvalidInput(f"unknown group preset {name!r}")


@dataclass(frozen=True, eq=False)
class UnitaryRep:
    group: FiniteGroup
    matrices: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        g = self.group
        if m.ndim != 3 or m.shape[0] != g.order or m.shape[1] != m.shape[2]:
            raise InvalidInput("need one square matrix per group element")
        d = m.shape[1]
        tol = 1e-8
        if not nx.close(m[0], np.eye(d), tol):
            raise InvalidInput("U(e) is not the identity")
        for a in range(g.order):
            if not nx.close(m[a] @ nx.dagger(m[a]), np.eye(d), tol):
                raise InvalidInput(f"U({a}) is not unitary")
            if not nx.close(m[g.inv(a)], nx.dagger(m[a]), tol):
                raise InvalidInput(f"U({a}^-1) != U({a})*")
            prods = np.einsum("ij,bjk->bik", m[a], m)
            if np.max(np.abs(prods - m[g.cayley[a]])) > tol:
                raise InvalidInput(f"U({a})U(h) != U({a}h) for some h")
        object.__setattr__(self, "matrices", m)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __call__(self, g: int) -> np.ndarray:
        return self.matrices[g]

    def character(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)

    @classmethod
    def from_generators(cls, group: FiniteGroup, gens: Mapping[int, np.ndarray]) -> "UnitaryRep":
        """Extend generator images along the Cayley table and verify exhaustively."""
        gens = {int(k): np.asarray(v, dtype=complex) for k, v in gens.items()}
        if not gens:
            return cls(group, np.ones((group.order, 1, 1), dtype=complex))
        d = next(iter(gens.values())).shape[0]
        words = group.words(sorted(gens))
        mats: list = [None] * group.order
        mats[0] = np.eye(d, dtype=complex)
        for g in group.bfs_order(sorted(gens)):
            if g == 0:
                continue
            s, p = words[g]
            mats[g] = gens[s] @ mats[p]
        return cls(group, np.array(mats))

    def restrict(self, elements: Sequence[int]) -> "UnitaryRep":
        sub, parent = self.group.subgroup(elements)
        return UnitaryRep(sub, self.matrices[parent])


def regular_rep(group: FiniteGroup) -> UnitaryRep:
    """Left regular representation ``L(g) e_h = e_{gh}``."""
    n = group.order
    mats = np.zeros((n, n, n), dtype=complex)
    for g in range(n):
        mats[g, group.cayley[g], np.arange(n)] = 1.0
    return UnitaryRep(group, mats)


@dataclass(frozen=True, eq=False)
class Irrep:
    label: str
    dim: int
    character: np.ndarray
    matrices: np.ndarray

    def class_values(self, group: FiniteGroup) -> np.ndarray:
        return np.array([self.character[cl[0]] for cl in group.classes])


@dataclass(frozen=True, eq=False)
class GroupDual:
    group: FiniteGroup
    irreps: tuple[Irrep, ...]

    def __iter__(self):
        return iter(self.irreps)

    def __len__(self):
        return len(self.irreps)

    def __getitem__(self, label: str) -> Irrep:
        for irr in self.irreps:
            if irr.label == label:
                return irr
        raise KeyError(label)

    @property
    def labels(self) -> list[str]:
        return [irr.label for irr in self.irreps]

    def table(self) -> np.ndarray:
        return np.array([irr.class_values(self.group) for irr in self.irreps])

    def orthogonality_error(self) -> float:
        """Max deviation of row and column orthogonality."""
        g = self.group
        chars = np.array([irr.character for irr in self.irreps])
        rows = chars @ chars.conj().T / g.order
        err = float(np.max(np.abs(rows - np.eye(len(self.irreps)))))
        tab = self.table()
        sizes = np.array([len(cl) for cl in g.classes])
        cols = tab.conj().T @ tab
        expected = np.diag(g.order / sizes)
        return max(err, float(np.max(np.abs(cols - expected))) / g.order)


def _class_sums(group: FiniteGroup, reg: UnitaryRep) -> list[np.ndarray]:
    return [reg.matrices[list(cl)].sum(axis=0) for cl in group.classes]


def character_table(group: FiniteGroup) -> GroupDual:
    """Characters from simultaneous diagonalization of class sums in the regular rep.

    A generic Hermitian combination of the (commuting, normal) class sums
    has one eigenvalue per irrep; its eigenspaces are the isotypic
    components of the regular representation.
    """
    if group.order > 1024:
        raise InvalidInput("group order above 1024 is not supported")
    reg = regular_rep(group)
    sums = _class_sums(group, reg)
    nclasses = len(group.classes)
    n = group.order
    for attempt in range(8):
        gen = nx.rng(3, attempt, n)
        t = np.zeros((n, n), dtype=complex)
        for c in sums:
            a, b = gen.uniform(1.0, 2.0, size=2)
            t += a * (c + c.T) + 1j * b * (c - c.T)
        w, v = np.linalg.eigh(t)
        groups = nx.cluster_sorted(w, 1e-6 * max(1.0, float(np.max(np.abs(w)))))
        if len(groups) != nclasses:
            continue
        raw = []
        ok = True
        for grp in groups:
            d = int(round(np.sqrt(len(grp))))
            if d * d != len(grp):
                ok = False
                break
            p = v[:, grp] @ v[:, grp].conj().T
            # chi(h) = Tr(L(h) P_gamma) / d
            chi = np.array([np.sum(p[group.cayley[h], np.arange(n)]) for h in range(n)]) / d
            raw.append((d, chi, p))
        if not ok:
            continue

        def key(item):
            d, chi, _ = item
            vals = tuple((-round(float(chi[cl[0]].real), 8), -round(float(chi[cl[0]].imag), 8))
                         for cl in group.classes)
            return (d, vals)

        raw.sort(key=key)
        irreps = []
        for k, (d, chi, p) in enumerate(raw):
            mats = _irrep_matrices(group, reg, d, chi, p, attempt)
            if mats is None:
                ok = False
                break
            irreps.append(Irrep(f"irr{k}", d, chi, mats))
        if not ok:
            continue
        dual = GroupDual(group, tuple(irreps))
        if dual.orthogonality_error() <= 1e-8 and sum(i.dim ** 2 for i in irreps) == n:
            return dual
    raise CharacterTableFailure(f"could not resolve the character table of {group.name or 'group'}")


def _irrep_matrices(group, reg, d, chi, p, attempt):
    n = group.order
    if d == 1:
        return chi.reshape(n, 1, 1).astype(complex)
    # right regular action commutes with L; a generic Hermitian element of it
    # restricted to the isotypic block splits it into d irreducible copies
    w, q = np.linalg.eigh(p)
    q = q[:, w > 0.5]
    gen = nx.rng(5, attempt, n, d)
    x = np.zeros((n, n), dtype=complex)
    for h in range(n):
        r = np.zeros((n, n))
        r[np.arange(n), group.cayley[np.arange(n), h]] = 1.0  # R(h) e_x = e_{x h^-1}
        c = gen.normal() + 1j * gen.normal()
        x += c * r + np.conj(c) * r.T
    y = q.conj().T @ x @ q
    ev, vec = np.linalg.eigh((y + y.conj().T) / 2)
    groups = nx.cluster_sorted(ev, 1e-7 * max(1.0, float(np.max(np.abs(ev)))))
    if len(groups) != d or any(len(g) != d for g in groups):
        return None
    basis = q @ vec[:, groups[0]]
    mats = np.einsum("ia,gij,jb->gab", basis.conj(), reg.matrices, basis)
    if np.max(np.abs(np.trace(mats, axis1=1, axis2=2) - chi)) > 1e-8:
        return None
    return mats


def isotypic_projections(rep: UnitaryRep, dual: GroupDual) -> dict[str, np.ndarray]:
    """``P_gamma = (d/|G|) sum_g conj(chi(g)) U(g)``."""
    if dual.group is not rep.group and not np.array_equal(dual.group.cayley, rep.group.cayley):
        raise InvalidInput("representation and dual come from different groups")
    g = rep.group.order
    return {irr.label: irr.dim / g * np.einsum("g,gij->ij", irr.character.conj(), rep.matrices)
            for irr in dual}


def multiplicity(rep: UnitaryRep, irr: Irrep) -> float:
    """Unrounded ``(1/|G|) sum_g conj(chi(g)) Tr U(g)``."""
    return float(np.real(np.vdot(irr.character, rep.character()))) / rep.group.order


@dataclass(frozen=True, eq=False)
class GroupAction:
    """Action of ``group`` on a multi-matrix algebra by block permutations.

    ``tau_g(F)`` has block ``perms[g][k]`` equal to ``u F_k u*`` with
    ``u = unitaries[g][k]``.
    """

    group: FiniteGroup
    algebra: FiniteCStarAlgebra
    perms: np.ndarray
    unitaries: tuple

    def __post_init__(self):
        alg, g = self.algebra, self.group
        if alg.block_dims is None:
            raise InvalidInput("action target must be an explicit multi-matrix algebra")
        nb = len(alg.block_dims)
        perms = np.asarray(self.perms, dtype=np.int64)
        if perms.shape != (g.order, nb):
            raise InvalidInput("need one block permutation per group element")
        for a in range(g.order):
            if sorted(perms[a].tolist()) != list(range(nb)):
                raise InvalidInput(f"element {a}: block map is not a permutation")
            for k in range(nb):
                dk = alg.block_dims[k]
                if alg.block_dims[perms[a, k]] != dk:
                    raise InvalidInput(f"element {a}: block {k} sent to a block of different size")
                u = np.asarray(self.unitaries[a][k])
                if u.shape != (dk, dk) or not nx.close(u @ nx.dagger(u), np.eye(dk), 1e-8):
                    raise InvalidInput(f"element {a}: block {k} unitary invalid")
        object.__setattr__(self, "perms", perms)
        self._check_homomorphism()

    def _check_homomorphism(self):
        g = self.group
        nb = self.perms.shape[1]
        if not np.array_equal(self.perms[0], np.arange(nb)):
            raise InvalidInput("identity must act trivially")
        for a in range(g.order):
            for b in range(g.order):
                ab = g.mul(a, b)
                if not np.array_equal(self.perms[a][self.perms[b]], self.perms[ab]):
                    raise InvalidInput(f"action is not a homomorphism at ({a}, {b})")
                for k in range(nb):
                    comp = self.unitaries[a][self.perms[b, k]] @ self.unitaries[b][k]
                    ref = self.unitaries[ab][k]
                    # equal as automorphisms iff equal up to a phase
                    ov = np.trace(nx.dagger(ref) @ comp) / ref.shape[0]
                    if abs(abs(ov) - 1) > 1e-8 or not nx.close(comp, ov * ref, 1e-7):
                        raise InvalidInput(f"action is not a homomorphism at ({a}, {b}), block {k}")

    @classmethod
    def from_generators(cls, group: FiniteGroup, algebra: FiniteCStarAlgebra,
                        gens: Mapping[int, tuple[Sequence[int], Sequence[np.ndarray]]]) -> "GroupAction":
        nb = len(algebra.block_dims)
        ident = (np.arange(nb), [np.eye(d, dtype=complex) for d in algebra.block_dims])
        gens = {int(k): (np.asarray(p, dtype=np.int64), [np.asarray(u, dtype=complex) for u in us])
                for k, (p, us) in gens.items()}
        perms: list = [None] * group.order
        unis: list = [None] * group.order
        perms[0], unis[0] = ident
        if gens:
            words = group.words(sorted(gens))
            for g in group.bfs_order(sorted(gens)):
                if g == 0:
                    continue
                s, p = words[g]
                ps, us = gens[s]
                perms[g] = ps[perms[p]]
                unis[g] = [us[perms[p][k]] @ unis[p][k] for k in range(nb)]
        elif group.order > 1:
            raise InvalidInput("no generators given for a non-trivial group")
        return cls(group, algebra, np.array(perms), tuple(tuple(u) for u in unis))

    def apply(self, g: int, x) -> np.ndarray:
        alg = self.algebra
        blocks: list = [None] * len(alg.block_dims)
        for k in range(len(alg.block_dims)):
            u = self.unitaries[g][k]
            blocks[self.perms[g, k]] = u @ alg.block(x, k) @ nx.dagger(u)
        return alg.assemble(blocks)

    def is_inner(self) -> bool:
        return bool(np.all(self.perms == np.arange(self.perms.shape[1])))

    def restrict(self, elements: Sequence[int]) -> "GroupAction":
        sub, parent = self.group.subgroup(elements)
        return GroupAction(sub, self.algebra, self.perms[parent],
                           tuple(self.unitaries[p] for p in parent))


def inner_action(rep: UnitaryRep) -> GroupAction:
    """``Ad U(g)`` on the full matrix algebra of the representation space."""
    alg = full_matrix_algebra(rep.dim)
    perms = np.zeros((rep.group.order, 1), dtype=np.int64)
    return GroupAction(rep.group, alg, perms, tuple((m,) for m in rep.matrices))


def group_average(act: GroupAction, x, elements: Sequence[int] | None = None) -> np.ndarray:
    """``m(F) = (1/|G|) sum_g tau_g(F)``, optionally over a subgroup."""
    x = np.asarray(x, dtype=complex)
    if not act.algebra.contains(x):
        raise InvalidInput("operator is not in the acted-upon algebra")
    els = range(act.group.order) if elements is None else list(elements)
    return sum(act.apply(g, x) for g in els) / len(els)


def fixed_point_algebra(act: GroupAction, elements: Sequence[int] | None = None) -> FiniteCStarAlgebra:
    """Image of the group average: ``{F : tau_g(F) = F for all g}``."""
    alg = act.algebra
    images = np.array([group_average(act, b, elements).reshape(-1) for b in alg.basis]).T
    out = _algebra_from_vectors(images, alg.ambient_dim)
    if not out.is_closed():
        raise InvalidInput("fixed points failed to form a *-algebra")
    return out
