import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import PAULI_X, PAULI_Z, RANDOM_GROUPS, block_swap_model, perm_matrix, random_covariant_model
from sectorlab import numerics as nx
from sectorlab.algebra import CPMap, full_matrix_algebra, is_completely_positive
from sectorlab.errors import InvalidInput
from sectorlab.groups import (FiniteGroup, GroupAction, UnitaryRep, character_table, cyclic, fixed_point_algebra,
                              group_average, inner_action, isotypic_projections, multiplicity, preset,
                              regular_rep, symmetric)


def _key(values):
    return tuple((round(complex(v).real, 9) + 0.0, round(complex(v).imag, 9) + 0.0) for v in values)


def _rows(dual):
    return sorted(_key(irr.character) for irr in dual)


def test_z2_characters():
    assert _rows(character_table(cyclic(2))) == sorted([_key([1, 1]), _key([1, -1])])


def test_z4_characters_are_powers_of_i():
    dual = character_table(cyclic(4))
    expected = sorted(_key([1j ** (j * k) for k in range(4)]) for j in range(4))
    assert _rows(dual) == expected


def test_s3_characters_from_permutation_counting():
    g = symmetric(3)
    perms = list(itertools.permutations(range(3)))
    fixed = np.array([sum(p[i] == i for i in range(3)) for p in perms])
    sign = np.array([np.linalg.det(perm_matrix(p)) for p in perms])
    oracle = sorted(_key(c) for c in (np.ones(6), sign, fixed - 1))
    dual = character_table(g)
    assert _rows(dual) == oracle
    assert sorted(irr.dim for irr in dual) == [1, 1, 2]


@pytest.mark.parametrize("name", [f"Z{n}" for n in range(1, 13)] + ["S3", "S4", "D4", "Q8"])
def test_character_orthogonality_on_presets(name):
    g = preset(name)
    dual = character_table(g)
    assert len(dual) == len(g.classes)
    assert dual.orthogonality_error() <= 1e-8
    assert sum(irr.dim ** 2 for irr in dual) == g.order


@pytest.mark.parametrize("name", ["S3", "D4", "Q8", "D5"])
def test_irrep_matrices_are_unitary_homomorphisms(name):
    g = preset(name)
    for irr in character_table(g):
        for a in range(g.order):
            m = irr.matrices[a]
            assert np.allclose(m @ m.conj().T, np.eye(irr.dim), atol=1e-9)
            assert abs(np.trace(m) - irr.character[a]) < 1e-9
            for b in range(g.order):
                assert np.allclose(m @ irr.matrices[b], irr.matrices[g.mul(a, b)], atol=1e-9)


def test_cayley_validation():
    with pytest.raises(InvalidInput):
        FiniteGroup(np.array([[0, 1], [1, 1]]))
    with pytest.raises(InvalidInput):
        FiniteGroup(np.array([[1, 0], [0, 1]]))  # 0 is not the identity


def test_trivial_group_projection_is_identity():
    g = cyclic(1)
    rep = UnitaryRep(g, np.eye(3)[None].astype(complex))
    projs = isotypic_projections(rep, character_table(g))
    assert len(projs) == 1 and np.allclose(next(iter(projs.values())), np.eye(3))


def test_z2_isotypic_projections():
    g = cyclic(2)
    rep = UnitaryRep.from_generators(g, {1: PAULI_Z})
    dual = character_table(g)
    projs = isotypic_projections(rep, dual)
    triv = next(irr.label for irr in dual if np.allclose(irr.character, 1))
    sign = next(lab for lab in projs if lab != triv)
    assert np.allclose(projs[triv], np.diag([1, 0]))
    assert np.allclose(projs[sign], np.diag([0, 1]))


def test_s3_regular_isotypic_ranks():
    g = symmetric(3)
    dual = character_table(g)
    projs = isotypic_projections(regular_rep(g), dual)
    ranks = sorted((irr.dim, round(np.trace(projs[irr.label]).real)) for irr in dual)
    assert ranks == [(1, 1), (1, 1), (2, 4)]


def test_group_average_examples():
    act = inner_action(UnitaryRep.from_generators(cyclic(2), {1: PAULI_Z}))
    assert np.allclose(group_average(act, PAULI_X), 0)
    assert np.allclose(group_average(act, PAULI_Z), PAULI_Z)
    with pytest.raises(InvalidInput):
        group_average(act, np.eye(3))


def test_fixed_point_algebra_examples():
    act = inner_action(UnitaryRep.from_generators(cyclic(2), {1: PAULI_Z}))
    assert fixed_point_algebra(act).dim == 2
    triv = inner_action(UnitaryRep(cyclic(1), np.eye(2)[None].astype(complex)))
    assert fixed_point_algebra(triv).dim == 4
    _, alg, swap = block_swap_model()
    fixed = fixed_point_algebra(swap)
    assert fixed.dim == 4
    x = np.arange(4.0).reshape(2, 2)
    assert fixed.contains(alg.assemble([x, x])) and not fixed.contains(alg.assemble([x, 0 * x]))


def test_conditional_expectation_is_unital_cp():
    act = inner_action(UnitaryRep.from_generators(symmetric(3), {
        1: perm_matrix([0, 2, 1]), 2: perm_matrix([1, 0, 2])}))
    m = CPMap.from_function(lambda x: group_average(act, x), 3, 3)
    assert m.is_unital() and is_completely_positive(m)[0]
    assert np.allclose(m.superop @ m.superop, m.superop)


def test_action_homomorphism_is_verified():
    g = cyclic(2)
    alg = full_matrix_algebra(2)
    with pytest.raises(InvalidInput):
        GroupAction(g, alg, np.zeros((2, 1), dtype=int), ((np.eye(2),), (np.diag([1, 1j]),)))


def test_generators_must_generate():
    g = cyclic(4)
    with pytest.raises(InvalidInput):
        UnitaryRep.from_generators(g, {2: np.diag([1.0, -1.0])})


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_projections_resolve_identity_and_match_multiplicities(seed):
    group, rep, mult = random_covariant_model(np.random.default_rng(seed))
    dual = character_table(group)
    projs = isotypic_projections(rep, dual)
    total = sum(projs.values())
    assert nx.close(total, np.eye(rep.dim), 1e-9)
    for irr in dual:
        p = projs[irr.label]
        for other in dual:
            q = projs[other.label]
            assert nx.close(p @ q, p if other.label == irr.label else 0 * p, 1e-9)
        m = multiplicity(rep, irr)
        assert abs(m - round(m)) < 1e-6
        assert round(m) == mult.get(irr.label, 0)
        assert round(np.trace(p).real) == irr.dim * round(m)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_average_lands_in_fixed_points(seed):
    gen = np.random.default_rng(seed)
    _, rep, _ = random_covariant_model(gen, max_dim=6)
    act = inner_action(rep)
    fixed = fixed_point_algebra(act)
    f = gen.normal(size=(rep.dim, rep.dim)) + 1j * gen.normal(size=(rep.dim, rep.dim))
    m = group_average(act, f)
    assert fixed.contains(m, 1e-8)
    assert nx.close(group_average(act, m), m, 1e-9)


def test_random_groups_are_presets():
    for name in RANDOM_GROUPS:
        assert preset(name).order > 1
