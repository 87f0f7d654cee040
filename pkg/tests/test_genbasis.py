from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from concurrence_lab.errors import DimensionError, PreconditionError
from concurrence_lab.genbasis import (
    all_expectations, basis_for, dyad_expansion, expectation, expectation_mixed, hermitian_decompose,
    label_operator,
)
from concurrence_lab.statevec import (
    basis_state, bell_state, coherence_loss_mixture, maximally_mixed, random_haar_state,
)

S = 2**-0.5


def test_pauli_matrices_flipped_y():
    ops = basis_for(2).ops
    np.testing.assert_array_equal(ops[0], np.eye(2))
    np.testing.assert_array_equal(ops[1], [[0, 1], [1, 0]])
    np.testing.assert_array_equal(ops[2], [[0, 1j], [-1j, 0]])
    np.testing.assert_array_equal(ops[3], np.diag([1, -1]))
    np.testing.assert_array_equal(basis_for(2, "standard").ops[2], [[0, -1j], [1j, 0]])


def test_su3_generators():
    ops = basis_for(3).ops
    np.testing.assert_array_equal(ops[1], np.diag([1, -1, 0]))
    np.testing.assert_array_equal(ops[2], np.diag([1, 1, -2]))
    e01 = np.zeros((3, 3))
    e01[0, 1] = e01[1, 0] = 1
    np.testing.assert_array_equal(ops[3], e01)
    # antisymmetric block follows the symmetric block, same (j, k) order
    np.testing.assert_array_equal(ops[6], -1j * (np.eye(3)[:, [0]] @ np.eye(3)[[1]] - np.eye(3)[:, [1]] @ np.eye(3)[[0]]))


def test_basis_rejects_dim_one():
    with pytest.raises(DimensionError):
        basis_for(1)


@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_basis_orthogonal_hermitian_spanning(dim, rng):
    ops = basis_for(dim).ops
    assert len(ops) == dim * dim
    np.testing.assert_array_equal(ops[0], np.eye(dim))
    for op in ops:
        assert np.abs(op - op.conj().T).max() < 1e-14
    gram = np.einsum("aij,bji->ab", ops, ops)
    off = gram - np.diag(np.diag(gram))
    assert np.abs(off).max() < 1e-12
    h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = h + h.conj().T
    c = np.einsum("aij,ji->a", ops, h) / np.diag(gram)
    assert np.abs(np.einsum("a,aij->ij", c, ops) - h).max() < 1e-12


def closed_form_diagonal_dyad(m, dim):
    """Closed-form expansion of |m><m| over the diagonal generators."""
    c = np.zeros(dim * dim)
    c[0] = 1 / dim
    for s in range(m + 1, dim):
        c[s] = 1 / (s * (s + 1))
    if m >= 1:
        c[m] = -1 / (m + 1)
    return c


@pytest.mark.parametrize("dim", [3, 4, 5])
def test_diagonal_dyads_match_closed_form(dim):
    for m in range(dim):
        np.testing.assert_allclose(dyad_expansion(m, m, dim), closed_form_diagonal_dyad(m, dim), atol=1e-15)


def test_dyad_examples():
    np.testing.assert_allclose(dyad_expansion(0, 0, 2), [0.5, 0, 0, 0.5])
    np.testing.assert_allclose(dyad_expansion(0, 1, 2), [0, 0.5, -0.5j, 0])
    c = dyad_expansion(3, 3, 4)
    expected = np.zeros(16)
    expected[0], expected[3] = 0.25, -0.25
    np.testing.assert_allclose(c, expected, atol=1e-15)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_dyad_reconstruction(dim):
    ops = basis_for(dim).ops
    for j, k in product(range(dim), repeat=2):
        c = dyad_expansion(j, k, dim)
        target = np.zeros((dim, dim))
        target[j, k] = 1
        assert np.abs(np.einsum("a,aij->ij", c, ops) - target).max() < 1e-14
        if j == k:
            assert np.abs(c.imag).max() == 0
        else:
            # off-diagonal dyads: 1/2 on a symmetric generator, +-i/2 on an antisymmetric one
            nz = np.sort(np.abs(c[np.abs(c) > 0]))
            np.testing.assert_allclose(nz, [0.5, 0.5])


def test_dyad_out_of_range():
    with pytest.raises(PreconditionError):
        dyad_expansion(2, 0, 2)


def test_label_operator_examples():
    np.testing.assert_array_equal(label_operator((0, 0), [2, 2]), np.eye(4))
    np.testing.assert_array_equal(label_operator((3, 3), [2, 2]), np.diag([1, -1, -1, 1]))
    op = label_operator((3, 0, 3), [2, 2, 2])
    diag = [(-1) ** (i1 + i3) for i1, _, i3 in product(range(2), repeat=3)]
    np.testing.assert_array_equal(op, np.diag(diag))
    with pytest.raises(DimensionError):
        label_operator((4, 0), [2, 2])


def test_expectation_examples():
    bell = bell_state()
    assert expectation(bell, (3, 3)) == pytest.approx(1.0)
    assert expectation(bell, (3, 0)) == pytest.approx(0.0, abs=1e-15)
    assert expectation(basis_state([2, 2], [0, 0]), (3, 3)) == 1.0
    with pytest.raises(DimensionError):
        expectation(bell, (3, 3, 3))


@given(seed=st.integers(0, 2**32), dims=st.lists(st.integers(2, 3), min_size=1, max_size=3), data=st.data())
def test_expectation_matches_dense_and_is_real(seed, dims, data):
    psi = random_haar_state(dims, seed)
    label = tuple(data.draw(st.integers(0, d * d - 1)) for d in dims)
    op = label_operator(label, dims)
    raw = np.vdot(psi.amps, op @ psi.amps)
    assert abs(raw.imag) < 1e-12
    assert expectation(psi, label) == pytest.approx(raw.real, abs=1e-12)
    bound = np.prod([np.linalg.norm(basis_for(d).ops[i], 2) for d, i in zip(dims, label)])
    assert abs(expectation(psi, label)) <= bound + 1e-12
    assert expectation(psi, (0,) * len(dims)) == pytest.approx(1.0)
    assert all_expectations(psi)[label] == pytest.approx(raw.real, abs=1e-12)


def test_expectation_mixed_examples():
    assert expectation_mixed(maximally_mixed([2, 2]), (3, 3)) == pytest.approx(0.0)
    for eps in (0.0, 0.1, 0.7):
        rho = coherence_loss_mixture(S, S, eps)
        assert expectation_mixed(rho, (1, 1)) == pytest.approx(1 - eps)
        assert expectation_mixed(coherence_loss_mixture(0.6, 0.8, eps), (3, 3)) == pytest.approx(1.0)


def test_hermitian_decompose_examples():
    ket = basis_state([2, 2], [0, 0]).density().entries
    c = hermitian_decompose(ket, [2, 2])
    assert set(c) == {(0, 0), (0, 3), (3, 0), (3, 3)}
    for v in c.values():
        assert v == pytest.approx(0.25)
    assert hermitian_decompose(np.eye(4), [2, 2]) == {(0, 0): pytest.approx(1.0)}
    c = hermitian_decompose(label_operator((1, 2), [2, 2]), [2, 2])
    assert c == {(1, 2): pytest.approx(1.0)}
    with pytest.raises(DimensionError):
        hermitian_decompose(np.eye(3), [2, 2])


@given(seed=st.integers(0, 2**32), dims=st.sampled_from([(2, 2), (2, 3), (3, 3), (2, 2, 2)]))
def test_hermitian_decompose_reconstructs(seed, dims):
    rng = np.random.default_rng(seed)
    n = int(np.prod(dims))
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = h + h.conj().T
    c = hermitian_decompose(h, dims)
    assert max(abs(v.imag) for v in c.values()) < 1e-12
    rebuilt = sum(v * label_operator(k, dims) for k, v in c.items())
    assert np.abs(rebuilt - h).max() < 1e-10


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3,)])
def test_round_trip_point_mass(dims):
    for label in product(*[range(d * d) for d in dims]):
        c = hermitian_decompose(label_operator(label, dims), dims)
        assert list(c) == [label]
        assert c[label] == pytest.approx(1.0)
