import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from concurrence_lab.errors import DimensionError, PreconditionError
from concurrence_lab.genbasis import expectation
from concurrence_lab.statevec import (
    DensityMatrix, OverlapWarning, PureState, basis_state, coherence_loss_mixture, deviation_state,
    ghz_state, make_state, maximally_mixed, partial_trace, purity, random_haar_state,
)

S = 2**-0.5

dims_strategy = st.lists(st.integers(2, 3), min_size=2, max_size=4)


def test_make_state_bell_is_normalized():
    psi = make_state([2, 2], [S, 0, 0, S])
    assert np.linalg.norm(psi.amps) == pytest.approx(1.0, abs=1e-12)
    assert not psi.renormalized


def test_make_state_renormalizes():
    psi = make_state([2, 2], [2, 0, 0, 2])
    np.testing.assert_allclose(psi.amps, [S, 0, 0, S], atol=1e-15)
    assert psi.renormalized
    assert psi.input_norm == pytest.approx(2 * np.sqrt(2))


def test_make_state_errors():
    with pytest.raises(DimensionError):
        make_state([2, 3], np.ones(5))
    with pytest.raises(PreconditionError):
        make_state([2, 2], np.zeros(4))
    with pytest.raises(DimensionError):
        make_state([1, 2], np.ones(2))


def test_haar_state_deterministic():
    a = random_haar_state([2, 3], 7)
    b = random_haar_state([2, 3], 7)
    np.testing.assert_array_equal(a.amps, b.amps)
    assert not np.array_equal(a.amps, random_haar_state([2, 3], 8).amps)
    # negative seeds are accepted as 64-bit values
    random_haar_state([2, 2], -1)


def test_haar_mean_traceless_observable_vanishes():
    n = 10_000
    vals = np.array([expectation(random_haar_state([2, 2], s), (3, 0)) for s in range(n)])
    assert abs(vals.mean()) < 5 / np.sqrt(n)


def test_haar_single_site_full_purity():
    for s in range(50):
        assert purity(random_haar_state([3], s).density()) == pytest.approx(1.0, abs=1e-12)


def test_partial_trace_examples():
    bell = make_state([2, 2], [S, 0, 0, S])
    np.testing.assert_allclose(partial_trace(bell, [0]).entries, np.eye(2) / 2, atol=1e-15)
    zero = basis_state([2, 2], [0, 0])
    np.testing.assert_allclose(partial_trace(zero, [1]).entries, np.diag([1, 0]), atol=1e-15)
    ghz = ghz_state(3)
    np.testing.assert_allclose(partial_trace(ghz, [0, 1]).entries, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)


def test_partial_trace_rejects_empty_and_full():
    bell = make_state([2, 2], [S, 0, 0, S])
    with pytest.raises(PreconditionError):
        partial_trace(bell, [])
    with pytest.raises(PreconditionError):
        partial_trace(bell, [0, 1])


def test_purity_examples():
    assert purity(maximally_mixed([2])) == pytest.approx(0.5)
    assert purity(random_haar_state([2, 2], 3).density()) == pytest.approx(1.0)
    rho = DensityMatrix((2, 2), np.diag([0.5, 0, 0, 0.5]))
    # sum of squared eigenvalues
    assert purity(rho) == pytest.approx(np.sum(np.linalg.eigvalsh(rho.entries) ** 2))
    assert purity(rho) == pytest.approx(0.5)


@given(dims=dims_strategy, seed=st.integers(0, 2**32), data=st.data())
def test_schmidt_symmetry_and_trace(dims, seed, data):
    psi = random_haar_state(dims, seed)
    n = len(dims)
    mask = data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n - 1))
    comp = [k for k in range(n) if k not in mask]
    r1, r2 = partial_trace(psi, mask), partial_trace(psi, comp)
    assert purity(r1) == pytest.approx(purity(r2), abs=1e-12)
    for r in (r1, r2):
        assert np.trace(r.entries).real == pytest.approx(1.0, abs=1e-12)
        assert np.abs(r.entries - r.entries.conj().T).max() < 1e-12


def test_deviation_state_examples():
    psi, phi = basis_state([2, 2], [0, 0]), basis_state([2, 2], [1, 1])
    np.testing.assert_allclose(deviation_state(psi, phi, 0.0).amps, psi.amps)
    np.testing.assert_allclose(deviation_state(psi, phi, 1.0).amps, phi.amps)
    np.testing.assert_allclose(deviation_state(psi, phi, 0.5).amps, [S, 0, 0, S], atol=1e-15)


def test_deviation_state_flags_overlap():
    psi = basis_state([2, 2], [0, 0])
    phi = make_state([2, 2], [1, 1, 0, 0])
    with pytest.warns(OverlapWarning):
        out = deviation_state(psi, phi, 0.3)
    assert out.renormalized
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        deviation_state(psi, basis_state([2, 2], [1, 1]), 0.3)


def test_deviation_state_errors():
    psi = basis_state([2, 2], [0, 0])
    with pytest.raises(PreconditionError):
        deviation_state(psi, psi, 1.5)
    with pytest.raises(DimensionError):
        deviation_state(psi, basis_state([2, 3], [0, 0]), 0.1)


@given(eps=st.floats(0, 1), seed=st.integers(0, 10_000))
def test_deviation_continuity(eps, seed):
    psi = random_haar_state([2, 2], seed)
    raw = random_haar_state([2, 2], seed + 1).amps
    phi = make_state([2, 2], raw - np.vdot(psi.amps, raw) * psi.amps)
    dist = np.linalg.norm(deviation_state(psi, phi, eps).amps - psi.amps)
    assert dist <= 2 * np.sqrt(eps) + 1e-12


def test_coherence_loss_examples():
    rho = coherence_loss_mixture(0.6, 0.8, 0.0)
    psi = np.array([0.6, 0, 0, 0.8])
    np.testing.assert_allclose(rho.entries, np.outer(psi, psi), atol=1e-15)
    np.testing.assert_allclose(coherence_loss_mixture(S, S, 1.0).entries, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)
    rho = coherence_loss_mixture(S, S, 0.1)
    assert rho.entries[0, 3] == pytest.approx(0.45)
    assert rho.entries[3, 0] == pytest.approx(0.45)


def test_coherence_loss_complex_corner():
    a, b = 0.6, 0.8j
    rho = coherence_loss_mixture(a, b, 0.25)
    assert rho.entries[0, 3] == pytest.approx(0.75 * a * np.conj(b))


def test_coherence_loss_errors():
    with pytest.raises(PreconditionError):
        coherence_loss_mixture(1.0, 1.0, 0.1)
    with pytest.raises(PreconditionError):
        coherence_loss_mixture(S, S, -0.1)


def test_density_matrix_validation():
    with pytest.raises(PreconditionError):
        DensityMatrix((2,), np.array([[1, 1], [0, 0]]))
    with pytest.raises(PreconditionError):
        DensityMatrix((2,), np.diag([1.5, -0.5]))
    with pytest.raises(DimensionError):
        DensityMatrix((2, 2), np.eye(2) / 2)


def test_json_round_trip():
    psi = random_haar_state([2, 3], 4)
    back = PureState.from_json(psi.to_json())
    np.testing.assert_array_equal(back.amps, psi.amps)
    rho = coherence_loss_mixture(0.6, 0.8j, 0.2)
    back = DensityMatrix.from_json(rho.to_json())
    np.testing.assert_array_equal(back.entries, rho.entries)
