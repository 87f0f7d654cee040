"""Concurrence of multipartite pure states from local-observable expectation values."""
from .concurrence import (concurrence_purity, concurrence_purity_squared, enumerate_bipartitions,
                          ghz_n_c2_analytic, minor_sum, three_qubit_c2, two_qubit_c2, xstate_concurrence)
from .decomposer import decompose_c2, symmetrize_form
from .genbasis import basis_for, expectation, expectation_mixed, hermitian_decompose, label_operator
from .quadform import (QuadraticForm, builtin_form, evaluate_form, evaluate_form_mixed, settings_of_form,
                       schmidt_projector_estimate)
from .shotsim import ShotPlan, estimate_c2, noise_scan, sample_setting
from .statevec import (DensityMatrix, PureState, coherence_loss_mixture, deviation_state, make_state,
                       partial_trace, purity, random_haar_state)

__version__ = "0.1.0"
