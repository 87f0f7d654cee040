"""Reference concurrence engines.

Three conventions coexist and are never mixed silently:

* ``purity``: canonical, ``C^2 = 2^(2-N) * ((2^N - 2) - sum_S tr rho_S^2)``
  over all nonempty proper subsets S.
* ``minor_sum``: sum of |2x2 minor|^2 of the amplitude matrix over unordered
  bipartitions, unordered row pairs and unordered column pairs. It equals
  ``2^(N-4) * C_purity^2``.
* the closed-form amplitude expressions for two and three qubits.
"""
from __future__ import annotations

from itertools import combinations
from math import prod

import numpy as np

from .errors import DimensionError, PreconditionError
from .statevec import DensityMatrix, PureState, partial_trace, purity


def enumerate_bipartitions(n: int) -> list[tuple[int, ...]]:
    """All nonempty proper site subsets, ordered by increasing bit mask (site k = bit k)."""
    if n < 2:
        raise PreconditionError(f"need at least 2 sites, got {n}")
    return [tuple(k for k in range(n) if mask >> k & 1) for mask in range(1, 2**n - 1)]


def unordered_bipartitions(n: int) -> list[tuple[int, ...]]:
    """One side of each bipartition: the subsets that do not contain the last site."""
    return [s for s in enumerate_bipartitions(n) if n - 1 not in s]


def _need_multisite(state: PureState):
    if state.n_sites < 2:
        raise PreconditionError("concurrence needs at least two sites")


def concurrence_purity(state: PureState) -> float:
    _need_multisite(state)
    n = state.n_sites
    total = sum(purity(partial_trace(state, s)) for s in enumerate_bipartitions(n))
    c2 = 2.0 ** (2 - n) * ((2**n - 2) - total)
    return float(np.sqrt(max(c2, 0.0)))


def concurrence_purity_squared(state: PureState) -> float:
    _need_multisite(state)
    n = state.n_sites
    total = sum(purity(partial_trace(state, s)) for s in enumerate_bipartitions(n))
    return float(2.0 ** (2 - n) * ((2**n - 2) - total))


def amplitude_matrix(state: PureState, rows: tuple[int, ...]) -> np.ndarray:
    """Amplitudes reshaped with the ``rows`` sites as row index and the rest as columns."""
    cols = tuple(k for k in range(state.n_sites) if k not in rows)
    t = np.transpose(state.tensor(), rows + cols)
    return t.reshape(prod(state.dims[k] for k in rows), -1)


def _minor_sum_of(a: np.ndarray) -> float:
    # sum over i<i', j<j' of |a_ij a_i'j' - a_ij' a_i'j|^2, vectorized per row pair
    total = 0.0
    for i, ip in combinations(range(a.shape[0]), 2):
        m = np.outer(a[i], a[ip])
        d = m - m.T
        total += 0.5 * float(np.sum(np.abs(d) ** 2))
    return total


def minor_sum(state: PureState) -> float:
    _need_multisite(state)
    return sum(_minor_sum_of(amplitude_matrix(state, s)) for s in unordered_bipartitions(state.n_sites))


def two_qubit_c2(state: PureState) -> float:
    """``4 |a00 a11 - a01 a10|^2``."""
    if state.dims != (2, 2):
        raise DimensionError(f"two-qubit formula needs dims (2, 2), got {state.dims}")
    a = state.amps
    return float(4 * abs(a[0] * a[3] - a[1] * a[2]) ** 2)


_CROSS = [("000", "111", "001", "110"), ("000", "111", "010", "101"), ("000", "111", "011", "100"),
          ("001", "110", "010", "101"), ("001", "110", "011", "100"), ("010", "101", "011", "100")]
_ADJACENT = [("000", "011", "001", "010"), ("000", "101", "001", "100"), ("000", "110", "010", "100"),
             ("001", "111", "011", "101"), ("010", "111", "011", "110"), ("100", "111", "101", "110")]


def three_qubit_c2(state: PureState) -> float:
    """Three-qubit amplitude expression: 4 x (cross minors) + 8 x (adjacent minors).

    Note the convention: this equals twice the canonical purity-based C^2.
    """
    if state.dims != (2, 2, 2):
        raise DimensionError(f"three-qubit formula needs dims (2, 2, 2), got {state.dims}")
    a = state.amps

    def term(p, q, r, s):
        return abs(a[int(p, 2)] * a[int(q, 2)] - a[int(r, 2)] * a[int(s, 2)]) ** 2

    return float(4 * sum(term(*t) for t in _CROSS) + 8 * sum(term(*t) for t in _ADJACENT))


def ghz_n_c2_analytic(a0: complex, a1: complex, n: int) -> float:
    """Canonical C^2 of ``a0|0..0> + a1|1..1>``: ``(2 - 2^(2-N)) * 4|a0 a1|^2``."""
    if abs(abs(a0) ** 2 + abs(a1) ** 2 - 1) > 1e-10:
        raise PreconditionError("GHZ amplitudes must be normalized")
    if n < 2:
        raise PreconditionError("need at least 2 qubits")
    return float((2 - 2.0 ** (2 - n)) * 4 * abs(a0 * a1) ** 2)


def xstate_concurrence(rho: DensityMatrix, tol: float = 1e-10) -> float:
    """Wootters concurrence for two-qubit states supported on |00>, |11> only.

    With no |01>/|10> population the usual X-state expression reduces to
    ``2 |rho_03|``.
    """
    if rho.dims != (2, 2):
        raise DimensionError(f"need a two-qubit density matrix, got dims {rho.dims}")
    m = rho.entries
    allowed = np.zeros((4, 4), dtype=bool)
    allowed[0, 0] = allowed[3, 3] = allowed[0, 3] = allowed[3, 0] = True
    if np.abs(m[~allowed]).max() > tol:
        raise PreconditionError("matrix lies outside the |00>/|11> family")
    return float(2 * max(0.0, abs(m[0, 3])))
