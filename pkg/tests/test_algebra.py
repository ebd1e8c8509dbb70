import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from helpers import PAULI_X, PAULI_Y, PAULI_Z
from sectorlab import numerics as nx
from sectorlab.algebra import (CPMap, StateFunctional, center_of, commutant, dual_channel,
                               full_matrix_algebra, generated_algebra, is_completely_positive,
                               multi_matrix_algebra, random_state)
from sectorlab.errors import InvalidInput


def test_commutant_of_identity_is_everything():
    assert commutant([np.eye(2)], 2).dim == 4


def test_commutant_of_diagonal_is_diagonal_algebra():
    alg = commutant([np.diag([1.0, -1.0])], 2)
    assert alg.dim == 2
    assert alg.contains(np.diag([3.0, 5.0]))
    assert not alg.contains(PAULI_X)


def test_commutant_of_irreducible_pair_is_scalars():
    alg = commutant([PAULI_X, PAULI_Z], 2)
    assert alg.dim == 1
    assert alg.contains(np.eye(2))


def test_commutant_dimension_mismatch():
    with pytest.raises(InvalidInput):
        commutant([np.eye(3)], 2)


def test_commutant_basis_is_deterministic_across_spanning_sets():
    a = commutant([np.diag([1.0, 1.0, 2.0])], 3)
    b = commutant([np.diag([1.0, 1.0, 2.0]), np.diag([5.0, 5.0, -1.0])], 3)
    assert np.allclose(a.basis, b.basis, atol=1e-12)


@pytest.mark.parametrize("gens,dim", [([np.zeros((2, 2))], 1), ([PAULI_X], 2), ([PAULI_X, PAULI_Z], 4)])
def test_generated_algebra_dimensions(gens, dim):
    assert generated_algebra(gens, 2).dim == dim


def test_generated_algebra_of_sigma_x_is_its_span():
    alg = generated_algebra([PAULI_X], 2)
    assert alg.contains(np.eye(2)) and alg.contains(PAULI_X) and not alg.contains(PAULI_Z)


def test_center_of_factor_is_scalars():
    center, projs = center_of(full_matrix_algebra(3))
    assert center.dim == 1
    assert len(projs) == 1 and np.allclose(projs[0], np.eye(3))


def test_center_of_two_block_algebra_gives_block_units_largest_first():
    alg = multi_matrix_algebra([2, 3])
    center, projs = center_of(alg)
    assert center.dim == 2
    assert np.allclose(projs[0], np.diag([0, 0, 1, 1, 1]))
    assert np.allclose(projs[1], np.diag([1, 1, 0, 0, 0]))


def test_center_of_diagonal_algebra_is_itself():
    alg = multi_matrix_algebra([1, 1, 1])
    center, projs = center_of(alg)
    assert center.dim == 3
    assert sorted(int(round(np.trace(p).real)) for p in projs) == [1, 1, 1]
    assert np.allclose(sum(projs), np.eye(3))


def test_identity_map_choi():
    ident = CPMap.from_function(lambda x: x, 2, 2)
    ok, lam = is_completely_positive(ident)
    assert ok and abs(lam) < 1e-12
    assert np.allclose(np.sort(np.linalg.eigvalsh(ident.choi())), [0, 0, 0, 2])


def test_transpose_is_not_completely_positive():
    ok, lam = is_completely_positive(CPMap.from_function(lambda x: x.T, 2, 2))
    assert not ok
    assert abs(lam + 1) < 1e-12


def test_pinching_is_cp_and_self_dual():
    pinch = CPMap.from_function(lambda x: np.diag(np.diag(x)), 2, 2)
    assert is_completely_positive(pinch)[0]
    d = dual_channel(pinch)
    assert np.allclose(d.superop, pinch.superop)
    assert d.direction != pinch.direction


def test_dual_of_isometry_conjugation():
    gen = np.random.default_rng(3)
    v = unitary_group.rvs(3, random_state=gen)[:, :2]
    obs = CPMap.from_function(lambda x: v.conj().T @ x @ v, 3, 2)
    dual = dual_channel(obs)
    rho = random_state(2, gen).density
    assert np.allclose(dual(rho), v @ rho @ v.conj().T)
    assert obs.is_unital() and dual.is_trace_preserving()


def test_dual_of_identity_is_identity():
    ident = CPMap.from_function(lambda x: x, 3, 3)
    assert np.allclose(dual_channel(ident).superop, ident.superop)


def test_state_validation():
    with pytest.raises(InvalidInput):
        StateFunctional(np.diag([0.6, 0.6]))
    with pytest.raises(InvalidInput):
        StateFunctional(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidInput):
        StateFunctional(np.array([[0.5, 0.5], [0.1, 0.5]]))


def test_multi_matrix_blocks_are_orthogonal():
    alg = multi_matrix_algebra([2, 1, 2])
    for i in range(3):
        for j in range(3):
            prod = alg.block_unit(i) @ alg.block_unit(j)
            assert np.allclose(prod, alg.block_unit(i) if i == j else 0)


def _random_generators(seed: int, n: int, count: int):
    gen = np.random.default_rng(seed)
    kind = gen.integers(3)
    out = []
    for _ in range(count):
        if kind == 0:  # block structured so the commutant is non-trivial
            k = max(1, n // 2)
            m = np.zeros((n, n), dtype=complex)
            m[:k, :k] = gen.normal(size=(k, k))
            m[k:, k:] = gen.normal(size=(n - k, n - k))
            out.append(m)
        elif kind == 1:
            out.append(np.diag(gen.integers(0, 3, size=n).astype(float)))
        else:
            out.append(gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n)))
    return out


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 3))
def test_double_commutant_theorem(seed, n, count):
    gens = _random_generators(seed, n, count)
    gen_alg = generated_algebra(gens, n)
    dc = commutant(list(commutant(gens, n).basis), n)
    assert gen_alg.dim == dc.dim
    for b in gen_alg.basis:
        assert dc.contains(b, 1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 3))
def test_central_projections_are_orthogonal_and_complete(seed, n, count):
    alg = generated_algebra(_random_generators(seed, n, count), n)
    _, projs = center_of(alg)
    for i, p in enumerate(projs):
        for j, q in enumerate(projs):
            assert nx.close(p @ q, p if i == j else np.zeros_like(p), 1e-9)
    assert nx.close(sum(projs), alg.unit, 1e-9)


def test_dual_is_involution_and_maps_unital_to_trace_preserving():
    gen = np.random.default_rng(17)
    for _ in range(100):
        din, dout = (int(x) for x in gen.integers(1, 4, size=2))
        r = -(-din // dout) + int(gen.integers(0, 2))  # r*dout >= din keeps sum K*K invertible
        ks = gen.normal(size=(r, dout, din)) + 1j * gen.normal(size=(r, dout, din))
        s = sum(k.conj().T @ k for k in ks)
        w, v = np.linalg.eigh(s)
        ks = ks @ (v @ np.diag(w ** -0.5) @ v.conj().T)  # sum K*K = I
        channel = CPMap.from_kraus(list(ks))
        assert channel.is_trace_preserving(1e-9)
        obs = dual_channel(channel)
        assert obs.is_unital(1e-9)
        assert is_completely_positive(obs)[0]
        assert np.allclose(dual_channel(obs).superop, channel.superop, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5))
def test_state_is_bounded_by_operator_norm(seed, n):
    gen = np.random.default_rng(seed)
    state = random_state(n, gen)
    a = gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n))
    b = gen.normal(size=(n, n))
    assert abs(state(a)) <= np.linalg.norm(a, 2) + 1e-12
    assert abs(state(2 * a + b) - (2 * state(a) + state(b))) < 1e-12


def test_pauli_y_generates_with_x():
    assert generated_algebra([PAULI_X, PAULI_Y], 2).dim == 4
