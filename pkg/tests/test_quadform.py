import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from concurrence_lab.concurrence import concurrence_purity_squared, three_qubit_c2, two_qubit_c2
from concurrence_lab.errors import DimensionError, PreconditionError
from concurrence_lab.quadform import (
    BUILTIN_FORMS, QuadraticForm, builtin_form, covers, evaluate_form, evaluate_form_mixed, evaluate_with,
    schmidt_projector_estimate, settings_of_form, tomography_settings, validate_setting,
)
from concurrence_lab.statevec import (
    basis_state, ghz_state, make_state, maximally_mixed, random_haar_state, schmidt_state, w_state,
)

S = 2**-0.5
unit_pair = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda v: np.hypot(np.hypot(v[0], v[1]), np.hypot(v[2], v[3])) > 1e-3)


def test_build_merges_and_canonicalizes():
    f = QuadraticForm.build([2, 2], 0.5, [((3, 0), (0, 3), 1.0), ((0, 3), (3, 0), 2.0), ((0, 0), (0, 0), 0.25)])
    assert f.constant == 0.75
    assert f.terms == (((0, 3), (3, 0), 3.0),)
    assert f.coefficient((3, 0), (0, 3)) == 3.0
    assert f.labels == [(0, 3), (3, 0)]


def test_build_rejects_bad_labels():
    with pytest.raises(DimensionError):
        QuadraticForm.build([2, 2], 0, [((4, 0), (0, 0), 1.0)])
    with pytest.raises(PreconditionError):
        QuadraticForm.build([2, 2], 0, [((3, 0), (3, 0), float("nan"))])


def test_json_round_trip_is_canonical():
    f = builtin_form("three_qubit_general")
    g = QuadraticForm.from_json(json.loads(f.dumps()))
    assert g.dumps() == f.dumps()
    assert g.terms == f.terms


def test_evaluate_examples():
    bell = make_state([2, 2], [S, 0, 0, S])
    assert evaluate_form(builtin_form("two_qubit_general"), bell) == pytest.approx(1.0)
    assert evaluate_form(builtin_form("two_qubit_general"), basis_state([2, 2], [0, 0])) == pytest.approx(0.0)
    assert evaluate_form(builtin_form("three_qubit_ghzw"), ghz_state(3)) == pytest.approx(3.0)
    assert evaluate_form(builtin_form("three_qubit_ghzw"), w_state(3)) == pytest.approx(8 / 3)
    assert evaluate_form(QuadraticForm.build([2, 2], 0.7, []), bell) == 0.7
    with pytest.raises(DimensionError):
        evaluate_form(builtin_form("two_qubit_general"), ghz_state(3))


def test_evaluate_with_supplied_values():
    f = builtin_form("two_qubit_schmidt")
    assert evaluate_with(f, {(3, 3): 1.0, (0, 3): 0.0, (3, 0): 0.0}) == pytest.approx(0.25)


def test_mixed_evaluation_is_not_a_concurrence():
    f = builtin_form("two_qubit_general")
    # the maximally mixed state is separable but the pure-state form reads 1/2
    assert evaluate_form_mixed(f, maximally_mixed([2, 2])) == pytest.approx(0.5)


@given(seed=st.integers(0, 2**32))
def test_two_qubit_general_exact(seed):
    psi = random_haar_state([2, 2], seed)
    v = evaluate_form(builtin_form("two_qubit_general"), psi)
    assert v == pytest.approx(two_qubit_c2(psi), abs=1e-10)
    assert v == pytest.approx(concurrence_purity_squared(psi), abs=1e-10)


@given(seed=st.integers(0, 2**32))
def test_two_qubit_symmetric_is_a_quarter(seed):
    psi = random_haar_state([2, 2], seed)
    assert 4 * evaluate_form(builtin_form("two_qubit_symmetric"), psi) == pytest.approx(two_qubit_c2(psi), abs=1e-10)


@given(v=unit_pair)
def test_schmidt_form_is_a_quarter(v):
    a0, a1 = complex(v[0], v[1]), complex(v[2], v[3])
    psi = schmidt_state(a0, a1)
    n = abs(a0) ** 2 + abs(a1) ** 2
    assert evaluate_form(builtin_form("two_qubit_schmidt"), psi) == pytest.approx(abs(a0 * a1) ** 2 / n**2, abs=1e-10)


@given(seed=st.integers(0, 2**32))
def test_three_qubit_general_exact(seed):
    psi = random_haar_state([2, 2, 2], seed)
    assert evaluate_form(builtin_form("three_qubit_general"), psi) == pytest.approx(three_qubit_c2(psi), abs=1e-10)


def test_three_qubit_ghzw_fails_off_family():
    psi = random_haar_state([2, 2, 2], 11)
    assert abs(evaluate_form(builtin_form("three_qubit_ghzw"), psi) - three_qubit_c2(psi)) > 1e-3


def test_nqubit_ghz_transcription_counterexample():
    f = builtin_form("nqubit_ghz", n=2)
    assert evaluate_form(f, basis_state([2, 2], [0, 0])) == pytest.approx(-2.0)
    assert f.metadata["index_reading"]
    with pytest.raises(PreconditionError):
        builtin_form("nqubit_ghz")


def test_builtin_registry():
    for name in BUILTIN_FORMS:
        f = builtin_form(name, n=3) if name == "nqubit_ghz" else builtin_form(name)
        assert f.metadata["name"] == name
    with pytest.raises(PreconditionError):
        builtin_form("nope")


def test_covers_and_validate_setting():
    assert covers((3, 3), (3, 0))
    assert covers((3, 3), (0, 0))
    assert not covers((3, 3), (1, 0))
    assert covers((0, 3), (0, 3))
    assert not covers((0, 3), (3, 0))
    assert validate_setting([3, 1], 2) == (3, 1)
    with pytest.raises(DimensionError):
        validate_setting([3], 2)
    with pytest.raises(PreconditionError):
        validate_setting([4, 1], 2)
    with pytest.raises(PreconditionError):
        validate_setting([0, 0], 2)


def test_setting_counts():
    assert settings_of_form(builtin_form("two_qubit_general")) == [(3, 1), (3, 2), (3, 3)]
    assert len(settings_of_form(builtin_form("three_qubit_general"))) == 7
    assert settings_of_form(builtin_form("three_qubit_ghzw")) == [(3, 3, 3)]
    assert len(settings_of_form(builtin_form("two_qubit_schmidt"))) == 1
    assert tomography_settings(2) == 9
    assert tomography_settings(3) == 27


@pytest.mark.parametrize("name", ["two_qubit_general", "two_qubit_symmetric", "three_qubit_general",
                                  "three_qubit_ghzw"])
def test_settings_cover_every_label(name):
    f = builtin_form(name)
    chosen = settings_of_form(f)
    for label in f.labels:
        assert any(covers(s, label) for s in chosen)
    assert len(chosen) <= tomography_settings(len(f.dims))


def test_projector_claim_values():
    assert schmidt_projector_estimate(basis_state([2, 2], [0, 0])) == pytest.approx(1.0)
    assert schmidt_projector_estimate(make_state([2, 2], [S, 0, 0, S])) == pytest.approx(4.0)
    assert schmidt_projector_estimate(make_state([2, 2], [0.6, 0, 0, 0.8])) == pytest.approx(3.8416)
    # agreement needs equal magnitudes and a quarter-turn relative phase
    psi = make_state([2, 2], [S, 0, 0, 1j * S])
    assert schmidt_projector_estimate(psi) == pytest.approx(two_qubit_c2(psi))
    psi = make_state([2, 2], [0.6, 0, 0, 0.8j])
    assert schmidt_projector_estimate(psi) == pytest.approx(1.0)
    assert two_qubit_c2(psi) == pytest.approx(0.9216)
