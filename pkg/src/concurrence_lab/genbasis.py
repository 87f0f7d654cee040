"""Per-site Hermitian operator bases, tensor-product observables and expansions.

Qubit sites use ``(s0, s1, s2, s3)``: identity, X, the Y-type matrix and Z.
The default Y-type matrix is ``[[0, i], [-i, 0]]``; ``sigma2="standard"``
selects the usual ``[[0, -i], [i, 0]]``. Both conventions give identical
values for any quadratic form built only from squared expectations.

Sites of dimension M > 2 use the M^2 SU(M) generators: identity, the M-1
diagonal generators ``sum_{j<s}|j><j| - s|s><s|``, the symmetric
off-diagonal ones ``|j><k| + |k><j|`` and the antisymmetric ones
``-i(|j><k| - |k><j|)``, both in lexicographic (j, k) order. These are not
norm-uniform, so every expansion divides by ``tr(op^2)`` per generator.

An observable label is a tuple with one generator index per site.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import prod
from typing import Sequence

import numpy as np

from .errors import DimensionError, PreconditionError
from .statevec import DensityMatrix, PureState

MAX_OPERATOR_DIM = 2**12

Label = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    dim: int
    ops: np.ndarray  # shape (dim**2, dim, dim)
    norms: np.ndarray  # tr(op @ op), real

    def __len__(self):
        return len(self.ops)


@lru_cache(maxsize=None)
def basis_for(dim: int, sigma2: str = "flipped") -> GeneratorBasis:
    """Generator basis for one site, identity first.

    For qubits ``sigma2`` picks the Y sign: ``"flipped"`` is ``[[0, i], [-i, 0]]``
    (the default, which the built-in forms use), ``"standard"`` is ``[[0, -i], [i, 0]]``.
    """
    if dim < 2:
        raise DimensionError(f"site dimension must be >= 2, got {dim}")
    if dim == 2:
        if sigma2 not in ("flipped", "standard"):
            raise PreconditionError(f"unknown sigma2 convention {sigma2!r}")
        y = np.array([[0, 1j], [-1j, 0]])
        ops = [np.eye(2), np.array([[0, 1], [1, 0]]), y if sigma2 == "flipped" else y.T, np.diag([1, -1])]
    else:
        ops = [np.eye(dim)]
        for s in range(1, dim):
            d = np.zeros(dim)
            d[:s] = 1.0
            d[s] = -s
            ops.append(np.diag(d))
        pairs = list(combinations(range(dim), 2))
        for j, k in pairs:
            m = np.zeros((dim, dim), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            ops.append(m)
        for j, k in pairs:
            m = np.zeros((dim, dim), dtype=complex)
            m[j, k], m[k, j] = -1j, 1j
            ops.append(m)
    ops = np.array(ops, dtype=complex)
    ops.setflags(write=False)
    norms = np.einsum("aij,aji->a", ops, ops).real
    norms.setflags(write=False)
    return GeneratorBasis(dim, ops, norms)


def _bases(dims: Sequence[int], sigma2: str) -> list[GeneratorBasis]:
    return [basis_for(int(d), sigma2) for d in dims]


def validate_label(label: Sequence[int], dims: Sequence[int]) -> Label:
    label = tuple(int(i) for i in label)
    if len(label) != len(dims):
        raise DimensionError(f"label {label} has {len(label)} entries for {len(dims)} sites")
    for i, d in zip(label, dims):
        if not 0 <= i < d * d:
            raise DimensionError(f"generator index {i} out of range for site dimension {d}")
    return label


def label_shape(dims: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(d) ** 2 for d in dims)


def label_index(label: Sequence[int], dims: Sequence[int]) -> int:
    """Position of ``label`` in lexicographic label order (first site slowest)."""
    return int(np.ravel_multi_index(tuple(label), label_shape(dims)))


def index_label(index: int, dims: Sequence[int]) -> Label:
    return tuple(int(i) for i in np.unravel_index(index, label_shape(dims)))


def dyad_expansion(j: int, k: int, dim: int, sigma2: str = "flipped") -> np.ndarray:
    """Coefficients ``c`` with ``sum_a c[a] * ops[a] == |j><k|``."""
    if not (0 <= j < dim and 0 <= k < dim):
        raise PreconditionError(f"dyad indices ({j}, {k}) out of range for dimension {dim}")
    b = basis_for(dim, sigma2)
    # tr(op |j><k|) = op[k, j]
    return b.ops[:, k, j] / b.norms


def label_operator(label: Sequence[int], dims: Sequence[int], sigma2: str = "flipped") -> np.ndarray:
    label = validate_label(label, dims)
    if prod(dims) > MAX_OPERATOR_DIM:
        raise DimensionError(f"refusing to materialize a {prod(dims)}-dimensional operator")
    out = np.ones((1, 1), dtype=complex)
    for i, b in zip(label, _bases(dims, sigma2)):
        out = np.kron(out, b.ops[i])
    return out


def _apply_label(tensor: np.ndarray, label: Label, bases) -> np.ndarray:
    for k, (i, b) in enumerate(zip(label, bases)):
        if i:
            tensor = np.moveaxis(np.tensordot(b.ops[i], tensor, axes=([1], [k])), 0, k)
    return tensor


def expectation(state: PureState, label: Sequence[int], sigma2: str = "flipped") -> float:
    label = validate_label(label, state.dims)
    t = state.tensor()
    val = np.vdot(t, _apply_label(t, label, _bases(state.dims, sigma2)))
    return float(val.real)


def expectation_mixed(rho: DensityMatrix, label: Sequence[int], sigma2: str = "flipped") -> float:
    label = validate_label(label, rho.dims)
    n = rho.n_sites
    # O rho viewed as a tensor: apply O on the row indices, then trace
    t = rho.entries.reshape(rho.dims + rho.dims)
    t = _apply_label(t, label, _bases(rho.dims, sigma2))
    t = t.reshape(rho.dim, rho.dim)
    return float(np.trace(t).real)


def basis_traces(matrix: np.ndarray, dims: Sequence[int], sigma2: str = "flipped") -> np.ndarray:
    """``tr(matrix @ O_L)`` for every label L, as an array of shape ``label_shape(dims)``."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if matrix.shape != (prod(dims), prod(dims)):
        raise DimensionError(f"matrix shape {matrix.shape} does not match dims {dims}")
    t = np.asarray(matrix, dtype=complex).reshape(dims + dims)
    # contract site k's (row, col) pair with ops[:, col, row]; the new label
    # axis is appended at the end, so after n steps labels sit in site order
    for b in _bases(dims, sigma2):
        t = np.tensordot(t, b.ops, axes=([0, n], [2, 1]))
        n -= 1
    return t


def all_expectations(source: PureState | DensityMatrix, sigma2: str = "flipped") -> np.ndarray:
    """Expectation of every label, shape ``label_shape(dims)``."""
    rho = source.density().entries if isinstance(source, PureState) else source.entries
    return basis_traces(rho, source.dims, sigma2).real


def hermitian_decompose(op: np.ndarray, dims: Sequence[int], sigma2: str = "flipped",
                        cutoff: float = 1e-13) -> dict[Label, complex]:
    """Expand ``op`` over tensor-product labels; entries below ``cutoff`` are omitted."""
    dims = tuple(int(d) for d in dims)
    op = np.asarray(op, dtype=complex)
    if op.shape != (prod(dims), prod(dims)):
        raise DimensionError(f"operator shape {op.shape} does not match dims {dims}")
    norms = np.ones(())
    for b in _bases(dims, sigma2):
        norms = np.multiply.outer(norms, b.norms)
    coeffs = basis_traces(op, dims, sigma2) / norms
    return {tuple(int(i) for i in idx): complex(coeffs[idx])
            for idx in zip(*np.nonzero(np.abs(coeffs) > cutoff))}


def label_to_json(label: Sequence[int]) -> str:
    return json.dumps([int(i) for i in label])


def coefficients_to_json(coeffs: dict[Label, complex]) -> dict:
    return {label_to_json(k): [float(v.real), float(v.imag)] for k, v in sorted(coeffs.items())}
