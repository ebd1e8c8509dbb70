"""Model builders and brute-force oracles shared by the test modules."""
from __future__ import annotations

import itertools

import numpy as np
from scipy.stats import unitary_group

from sectorlab.algebra import center_of, commutant, multi_matrix_algebra
from sectorlab.groups import (GroupAction, UnitaryRep, character_table, cyclic, dihedral, preset,
                              regular_rep, symmetric)
from sectorlab.measurement import CouplingModel, controlled_shift, partial_swap

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]])
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def perm_matrix(perm) -> np.ndarray:
    m = np.zeros((len(perm), len(perm)))
    m[list(perm), np.arange(len(perm))] = 1
    return m


def preset_models() -> list[tuple[str, UnitaryRep]]:
    z2 = cyclic(2)
    z4 = cyclic(4)
    s3 = symmetric(3)
    d4 = dihedral(4)
    shift = perm_matrix([1, 2, 3, 0])
    s3_perm = UnitaryRep(s3, np.array([perm_matrix(p) for p in itertools.permutations(range(3))]))
    return [
        ("Z2 on M2", UnitaryRep.from_generators(z2, {1: PAULI_Z})),
        ("Z4 on C4", UnitaryRep.from_generators(z4, {1: shift})),
        ("S3 regular", regular_rep(s3)),
        ("S3 on C3", s3_perm),
        ("D4 on C4", UnitaryRep.from_generators(d4, {1: shift, 4: perm_matrix([0, 3, 2, 1])})),
    ]


RANDOM_GROUPS = ("Z2", "Z3", "Z4", "Z6", "S3", "D4", "Q8", "D5")


def random_covariant_model(gen: np.random.Generator, max_dim: int = 12):
    """Random unitary rep ``V ((+) gamma^{m_gamma}) V*`` with its known multiplicities."""
    group = preset(RANDOM_GROUPS[gen.integers(len(RANDOM_GROUPS))])
    dual = character_table(group)
    mult = {irr.label: 0 for irr in dual}
    dim = 0
    while True:
        irr = dual.irreps[gen.integers(len(dual))]
        if dim + irr.dim > max_dim or (dim > 0 and gen.random() < 0.25):
            break
        mult[irr.label] += 1
        dim += irr.dim
    if dim == 0:
        mult[dual.irreps[0].label] = 1
        dim = 1
    blocks = []
    for irr in dual:
        blocks += [irr.matrices] * mult[irr.label]
    mats = np.zeros((group.order, dim, dim), dtype=complex)
    o = 0
    for b in blocks:
        d = b.shape[1]
        mats[:, o:o + d, o:o + d] = b
        o += d
    v = unitary_group.rvs(dim, random_state=gen) if dim > 1 else np.eye(1)
    mats = np.einsum("ij,gjk,lk->gil", v, mats, v.conj())
    return group, UnitaryRep(group, mats), {k: m for k, m in mult.items() if m}


def commutant_oracle(rep: UnitaryRep) -> list[tuple[int, int]]:
    """Sorted ``(rank, multiplicity)`` per isotypic block, read off ``U(G)'`` alone.

    The commutant is ``(+) M_{m_gamma}``: each minimal central projection ``p``
    has ``dim(p U(G)' p) = m^2`` and ``rank(p) = m d``.
    """
    comm = commutant(list(rep.matrices), rep.dim)
    _, projs = center_of(comm)
    out = []
    for p in projs:
        compressed = np.array([(p @ b @ p).reshape(-1) for b in comm.basis])
        m2 = np.linalg.matrix_rank(compressed, tol=1e-8)
        out.append((int(round(np.real(np.trace(p)))), int(round(np.sqrt(m2)))))
    return sorted(out)


def block_swap_model():
    g = cyclic(2)
    alg = multi_matrix_algebra([2, 2])
    return g, alg, GroupAction.from_generators(g, alg, {1: ([1, 0], [np.eye(2), np.eye(2)])})


def mixed_model():
    g = cyclic(2)
    alg = multi_matrix_algebra([2, 2, 3])
    return g, alg, GroupAction.from_generators(g, alg, {1: ([1, 0, 2], [np.eye(2), np.eye(2), np.eye(3)])})


def s3_z3_model():
    """``M3 (+) M3`` with ``Ad V(g)`` on both blocks and odd permutations swapping them."""
    g = symmetric(3)
    alg = multi_matrix_algebra([3, 3])
    perms = list(itertools.permutations(range(3)))
    vs = [perm_matrix(p) for p in perms]
    signs = [round(np.linalg.det(v)) for v in vs]
    bp = np.array([[0, 1] if s == 1 else [1, 0] for s in signs])
    act = GroupAction(g, alg, bp, tuple((v, v) for v in vs))
    even = tuple(i for i, s in enumerate(signs) if s == 1)
    return g, alg, act, even


def random_inner_action(gen: np.random.Generator, max_dim: int = 12):
    """Inner action ``Ad u_g`` on a random multi-matrix algebra with a random representation."""
    group = preset(RANDOM_GROUPS[gen.integers(len(RANDOM_GROUPS))])
    dual = character_table(group)
    nb = int(gen.integers(1, 4))
    dims = []
    while len(dims) < nb:
        d = int(gen.integers(1, 5))
        if sum(dims) + d > max_dim:
            break
        dims.append(d)
    dims = dims or [1]
    alg = multi_matrix_algebra(dims)
    unis = [[None] * len(dims) for _ in range(group.order)]
    for k, d in enumerate(dims):
        parts, size = [], 0
        while size < d:
            irr = dual.irreps[gen.integers(len(dual))]
            if size + irr.dim > d:
                irr = dual.irreps[0]
            parts.append(irr.matrices)
            size += irr.dim
        blk = np.zeros((group.order, d, d), dtype=complex)
        o = 0
        for p in parts:
            blk[:, o:o + p.shape[1], o:o + p.shape[1]] = p
            o += p.shape[1]
        v = unitary_group.rvs(d, random_state=gen) if d > 1 else np.eye(1)
        for x in range(group.order):
            unis[x][k] = v @ blk[x] @ v.conj().T
    act = GroupAction(group, alg, np.tile(np.arange(len(dims)), (group.order, 1)), tuple(tuple(u) for u in unis))
    mult = [int(m) for m in gen.integers(0, 3, size=len(dims))]
    if sum(mult) == 0:
        mult[0] = 1
    return act, tuple(mult)


def controlled_shift_model() -> CouplingModel:
    return CouplingModel(controlled_shift(), [0.0, 1.0], 2)


def damping_model() -> CouplingModel:
    return CouplingModel(partial_swap(np.pi / 8), [1.0, 0.0], 2)
