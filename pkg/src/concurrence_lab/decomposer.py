"""Automatic quadratic-form decomposition of the minor sum.

Every 2x2 minor of a reshaped amplitude matrix satisfies

    |a_ab a_a'b' - a_ab' a_a'b|^2 = <A11><A21> + <A12><A22> - <A13><A23> - <A14><A24>

with eight Hermitian operators built from the basis kets |ab>, |a'b'>, |ab'>,
|a'b>. Each operator is a (sum of) product dyads, so its expansion over
generator labels factorizes into per-site dyad expansions. Accumulating the
products over all minors gives a quadratic form equal to ``minor_sum``. The
coefficients come out complex in general arithmetic; their imaginary parts
must vanish, and that is checked rather than assumed.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from math import prod
from typing import Iterator, Sequence

import numpy as np

from .concurrence import unordered_bipartitions
from .errors import DimensionError, PreconditionError, RealnessError
from .genbasis import dyad_expansion, index_label, label_shape
from .quadform import QuadraticForm
from .statevec import PureState, check_subset

MAX_DECOMPOSE_DIM = 2**10
REALNESS_TOL = 1e-10
PRUNE_TOL = 1e-12

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class MinorTerm:
    """Rows index the ``sites`` side of the bipartition, columns the complement."""
    sites: tuple[int, ...]
    rows: tuple[int, int]
    cols: tuple[int, int]


def _sides(sites, dims):
    comp = tuple(k for k in range(len(dims)) if k not in sites)
    return comp, tuple(dims[k] for k in sites), tuple(dims[k] for k in comp)


def _validate_term(term: MinorTerm, dims) -> None:
    check_subset(term.sites, len(dims))
    _, rdims, cdims = _sides(term.sites, dims)
    (a, ap), (b, bp) = term.rows, term.cols
    if not (0 <= a < ap < prod(rdims) and 0 <= b < bp < prod(cdims)):
        raise PreconditionError(f"invalid minor indices {term}")


def enumerate_minor_terms(dims: Sequence[int]) -> Iterator[MinorTerm]:
    dims = tuple(dims)
    for sites in unordered_bipartitions(len(dims)):
        _, rdims, cdims = _sides(sites, dims)
        for rows in combinations(range(prod(rdims)), 2):
            for cols in combinations(range(prod(cdims)), 2):
                yield MinorTerm(sites, rows, cols)


def _digits(term: MinorTerm, dims, row: int, col: int) -> tuple[int, ...]:
    """Per-site computational digits of the basis ket |row, col>."""
    comp, rdims, cdims = _sides(term.sites, dims)
    out = [0] * len(dims)
    for k, d in zip(term.sites, np.unravel_index(row, rdims)):
        out[k] = int(d)
    for k, d in zip(comp, np.unravel_index(col, cdims)):
        out[k] = int(d)
    return tuple(out)


def _kets(term: MinorTerm, dims):
    (a, ap), (b, bp) = term.rows, term.cols
    return (_digits(term, dims, a, b), _digits(term, dims, ap, bp),
            _digits(term, dims, a, bp), _digits(term, dims, ap, b))


def _dyad(x, y, dims) -> np.ndarray:
    n = int(np.prod(dims))
    m = np.zeros((n, n), dtype=complex)
    m[np.ravel_multi_index(x, dims), np.ravel_multi_index(y, dims)] = 1.0
    return m


def minor_term_operators(term: MinorTerm, dims: Sequence[int]) -> dict[str, np.ndarray]:
    """The eight operators keyed ``"11", "21", "12", "22", "13", "23", "14", "24"``."""
    dims = tuple(dims)
    _validate_term(term, dims)
    ab, apbp, abp, apb = _kets(term, dims)
    return {
        "11": _dyad(ab, ab, dims),
        "21": _dyad(apbp, apbp, dims),
        "12": _dyad(abp, abp, dims),
        "22": _dyad(apb, apb, dims),
        "13": (_dyad(ab, abp, dims) + _dyad(abp, ab, dims)) / _SQRT2,
        "23": (_dyad(apb, apbp, dims) + _dyad(apbp, apb, dims)) / _SQRT2,
        "14": 1j * (_dyad(ab, abp, dims) - _dyad(abp, ab, dims)) / _SQRT2,
        "24": 1j * (_dyad(apb, apbp, dims) - _dyad(apbp, apb, dims)) / _SQRT2,
    }


_PAIRS = (("11", "21", 1.0), ("12", "22", 1.0), ("13", "23", -1.0), ("14", "24", -1.0))


def minor_value_check(term: MinorTerm, state: PureState) -> float:
    """Evaluate the minor through the eight operator expectations."""
    ops = minor_term_operators(term, state.dims)
    ev = {k: np.vdot(state.amps, m @ state.amps).real for k, m in ops.items()}
    return float(sum(s * ev[i] * ev[j] for i, j, s in _PAIRS))


def minor_value(term: MinorTerm, state: PureState) -> float:
    """``|a_ab a_a'b' - a_ab' a_a'b|^2`` read directly from the amplitudes."""
    _validate_term(term, state.dims)
    t = state.tensor()
    ab, apbp, abp, apb = _kets(term, state.dims)
    return float(abs(t[ab] * t[apbp] - t[abp] * t[apb]) ** 2)


class _DyadCoefficients:
    """Expansion of product dyads over flat label indices, memoized per site."""

    def __init__(self, dims):
        self.dims = dims
        self._site = {}

    def site(self, d, j, k):
        key = (d, j, k)
        if key not in self._site:
            self._site[key] = dyad_expansion(j, k, d)
        return self._site[key]

    def __call__(self, x, y) -> np.ndarray:
        vec = np.ones(1, dtype=complex)
        for d, j, k in zip(self.dims, x, y):
            vec = np.kron(vec, self.site(d, j, k))
        return vec


def _term_vectors(term: MinorTerm, dims, coeffs: _DyadCoefficients) -> dict[str, np.ndarray]:
    ab, apbp, abp, apb = _kets(term, dims)
    d1, d1t = coeffs(ab, abp), coeffs(abp, ab)
    d2, d2t = coeffs(apb, apbp), coeffs(apbp, apb)
    return {
        "11": coeffs(ab, ab), "21": coeffs(apbp, apbp),
        "12": coeffs(abp, abp), "22": coeffs(apb, apb),
        "13": (d1 + d1t) / _SQRT2, "23": (d2 + d2t) / _SQRT2,
        "14": 1j * (d1 - d1t) / _SQRT2, "24": 1j * (d2 - d2t) / _SQRT2,
    }


def decompose_c2(dims: Sequence[int]) -> QuadraticForm:
    """Quadratic form over generator labels whose value is ``minor_sum``.

    The form's metadata records the largest imaginary residue seen, both per
    operator expansion and in the accumulated coefficients.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise PreconditionError("decomposition needs at least two sites")
    if any(d < 2 for d in dims):
        raise DimensionError(f"site dimensions must be >= 2, got {dims}")
    if prod(dims) > MAX_DECOMPOSE_DIM:
        raise PreconditionError(f"total dimension {prod(dims)} exceeds the limit {MAX_DECOMPOSE_DIM}")

    n_labels = prod(label_shape(dims))
    coeffs = _DyadCoefficients(dims)
    keys, values = [], []
    op_residue = 0.0
    for term in enumerate_minor_terms(dims):
        vecs = _term_vectors(term, dims, coeffs)
        op_residue = max(op_residue, max(float(np.abs(v.imag).max()) for v in vecs.values()))
        for i, j, sign in _PAIRS:
            u, v = vecs[i], vecs[j]
            iu, iv = np.nonzero(np.abs(u) > 1e-15)[0], np.nonzero(np.abs(v) > 1e-15)[0]
            lo = np.minimum.outer(iu, iv).ravel()
            hi = np.maximum.outer(iu, iv).ravel()
            keys.append(lo * n_labels + hi)
            values.append(sign * np.outer(u[iu], v[iv]).ravel())

    keys = np.concatenate(keys)
    values = np.concatenate(values)
    uniq, inverse = np.unique(keys, return_inverse=True)
    re = np.bincount(inverse, weights=values.real, minlength=len(uniq))
    im = np.bincount(inverse, weights=values.imag, minlength=len(uniq))
    residue = float(np.abs(im).max()) if len(im) else 0.0
    if residue > REALNESS_TOL or op_residue > REALNESS_TOL:
        raise RealnessError(f"imaginary residue {max(residue, op_residue):.3g} exceeds {REALNESS_TOL}")

    terms = [(index_label(int(k // n_labels), dims), index_label(int(k % n_labels), dims), float(c))
             for k, c in zip(uniq, re)]
    return QuadraticForm.build(dims, 0.0, terms, {
        "name": "decomposed_minor_sum",
        "convention": "minor-sum",
        "max_imag_residue": max(residue, op_residue),
    }, prune=PRUNE_TOL)


def permute_label(label: Sequence[int], order: Sequence[int]) -> tuple[int, ...]:
    return tuple(label[i] for i in order)


def symmetrize_form(form: QuadraticForm) -> QuadraticForm:
    """Average a form over all simultaneous permutations of the sites."""
    if len(set(form.dims)) != 1:
        raise DimensionError(f"symmetrization needs equal site dimensions, got {form.dims}")
    perms = list(permutations(range(len(form.dims))))
    w = 1.0 / len(perms)
    terms = [(permute_label(li, p), permute_label(lj, p), c * w)
             for p in perms for li, lj, c in form.terms]
    meta = dict(form.metadata)
    meta["symmetrized"] = True
    return QuadraticForm.build(form.dims, form.constant, terms, meta, prune=PRUNE_TOL)
