"""Multipartite pure and mixed states.

Amplitudes are stored in the computational basis with the last site varying
fastest, i.e. ``amps.reshape(dims)[i1, ..., iN]`` is the amplitude of
``|i1 ... iN>``. Sites are indexed from 0.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
MAX_TOTAL_DIM = 2**20


class OverlapWarning(UserWarning):
    """Deviation state built from non-orthogonal components."""


def _check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise DimensionError("at least one site is required")
    if any(d < 2 for d in dims):
        raise DimensionError(f"every site dimension must be >= 2, got {dims}")
    if prod(dims) > MAX_TOTAL_DIM:
        raise DimensionError(f"total dimension {prod(dims)} exceeds {MAX_TOTAL_DIM}")
    return dims


def check_subset(sites: Iterable[int], n_sites: int) -> tuple[int, ...]:
    """Validate a nonempty proper subset of ``range(n_sites)``; return it sorted."""
    subset = tuple(sorted(set(int(s) for s in sites)))
    if not subset or len(subset) >= n_sites:
        raise PreconditionError(f"site subset must be nonempty and proper, got {subset}")
    if subset[0] < 0 or subset[-1] >= n_sites:
        raise PreconditionError(f"site index out of range in {subset} for {n_sites} sites")
    return subset


@dataclass(frozen=True, eq=False)
class PureState:
    dims: tuple[int, ...]
    amps: np.ndarray
    # norm of the vector handed to make_state, before normalization
    input_norm: float = 1.0

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def renormalized(self) -> bool:
        return abs(self.input_norm - 1.0) > NORM_TOL

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amps, self.amps.conj()))

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "amps": [[float(a.real), float(a.imag)] for a in self.amps]}

    @classmethod
    def from_json(cls, data: dict) -> "PureState":
        amps = np.array([complex(re, im) for re, im in data["amps"]])
        return make_state(data["dims"], amps)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dims: tuple[int, ...]
    entries: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        object.__setattr__(self, "dims", dims)
        m = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", m)
        if m.shape != (prod(dims), prod(dims)):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
        if not self.validate:
            return
        if np.abs(m - m.conj().T).max() > HERMITIAN_TOL:
            raise PreconditionError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > TRACE_TOL:
            raise PreconditionError(f"density matrix trace {np.trace(m).real} != 1")
        if np.linalg.eigvalsh(m).min() < -POSITIVITY_TOL:
            raise PreconditionError("density matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DensityMatrix":
        m = np.array([[complex(re, im) for re, im in row] for row in data["entries"]])
        return cls(tuple(data["dims"]), m)


def make_state(dims: Sequence[int], amps) -> PureState:
    dims = _check_dims(dims)
    vec = np.asarray(amps, dtype=complex).ravel()
    if vec.size != prod(dims):
        raise DimensionError(f"{vec.size} amplitudes do not fit dims {dims} (need {prod(dims)})")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0 or not np.isfinite(norm):
        raise PreconditionError("amplitude vector has zero or non-finite norm")
    vec = vec / norm
    vec.setflags(write=False)
    return PureState(dims, vec, norm)


def basis_state(dims: Sequence[int], digits: Sequence[int]) -> PureState:
    dims = _check_dims(dims)
    amps = np.zeros(prod(dims), dtype=complex)
    amps[np.ravel_multi_index(tuple(digits), dims)] = 1.0
    return make_state(dims, amps)


def _rng(seed: int) -> np.random.Generator:
    # accepts any 64-bit value, signed or not
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def random_haar_state(dims: Sequence[int], seed: int) -> PureState:
    """Normalized vector of i.i.d. standard complex Gaussians (unitarily invariant)."""
    dims = _check_dims(dims)
    rng = _rng(seed)
    n = prod(dims)
    return make_state(dims, rng.standard_normal(n) + 1j * rng.standard_normal(n))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def apply_local(state: PureState, unitaries: Sequence[np.ndarray]) -> PureState:
    """Apply one operator per site."""
    if len(unitaries) != state.n_sites:
        raise DimensionError("need one operator per site")
    t = state.tensor()
    for k, u in enumerate(unitaries):
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [k])), 0, k)
    return make_state(state.dims, t.ravel())


def permute_sites(state: PureState, order: Sequence[int]) -> PureState:
    """New state whose site k is the old site ``order[k]``."""
    t = np.transpose(state.tensor(), order)
    return make_state(tuple(state.dims[i] for i in order), t.ravel())


def partial_trace(state: PureState, keep: Iterable[int]) -> DensityMatrix:
    keep = check_subset(keep, state.n_sites)
    rest = tuple(k for k in range(state.n_sites) if k not in keep)
    t = np.transpose(state.tensor(), keep + rest)
    dk = prod(state.dims[k] for k in keep)
    m = t.reshape(dk, -1)
    rho = m @ m.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(tuple(state.dims[k] for k in keep), rho)


def purity(rho: DensityMatrix) -> float:
    m = rho.entries
    # tr(rho^2) for Hermitian rho without forming the product
    return float(np.sum(np.abs(m) ** 2))


def deviation_state(psi: PureState, phi: PureState, eps: float) -> PureState:
    """``sqrt(1-eps)|psi> + sqrt(eps)|phi>``, renormalized.

    The returned ``input_norm`` is the norm before renormalization; it differs
    from 1 only when the two components overlap, which also raises an
    ``OverlapWarning``.
    """
    if not 0.0 <= eps <= 1.0:
        raise PreconditionError(f"eps must lie in [0, 1], got {eps}")
    if psi.dims != phi.dims:
        raise DimensionError(f"dims differ: {psi.dims} vs {phi.dims}")
    overlap = np.vdot(psi.amps, phi.amps)
    if 0.0 < eps < 1.0 and abs(overlap) > NORM_TOL:
        warnings.warn(f"components overlap (<psi|phi> = {overlap:.3g}); result renormalized",
                      OverlapWarning, stacklevel=2)
    return make_state(psi.dims, np.sqrt(1.0 - eps) * psi.amps + np.sqrt(eps) * phi.amps)


def coherence_loss_mixture(alpha: complex, beta: complex, eps: float) -> DensityMatrix:
    """Two-qubit state with the |00>/|11> coherence of alpha|00>+beta|11> scaled by 1-eps.

    H and V polarizations map to 0 and 1.
    """
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-10:
        raise PreconditionError("|alpha|^2 + |beta|^2 must equal 1")
    if not 0.0 <= eps <= 1.0:
        raise PreconditionError(f"eps must lie in [0, 1], got {eps}")
    psi = np.array([alpha, 0, 0, beta], dtype=complex)
    rho = (1 - eps) * np.outer(psi, psi.conj())
    rho[0, 0] += eps * abs(alpha) ** 2
    rho[3, 3] += eps * abs(beta) ** 2
    return DensityMatrix((2, 2), rho)


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    n = prod(_check_dims(dims))
    return DensityMatrix(tuple(dims), np.eye(n) / n)


# named families used by the CLI and the audits

def ghz_state(n: int, a0: complex = 2**-0.5, a1: complex = 2**-0.5) -> PureState:
    amps = np.zeros(2**n, dtype=complex)
    amps[0], amps[-1] = a0, a1
    return make_state((2,) * n, amps)


def w_state(n: int, coeffs: Sequence[complex] | None = None) -> PureState:
    """``a0|0..01> + a1|0..10> + ... + a_{n-1}|10..0>``."""
    if coeffs is None:
        coeffs = [1.0] * n
    if len(coeffs) != n:
        raise DimensionError(f"need {n} W coefficients, got {len(coeffs)}")
    amps = np.zeros(2**n, dtype=complex)
    for k, c in enumerate(coeffs):
        amps[1 << k] = c
    return make_state((2,) * n, amps)


def bell_state() -> PureState:
    return ghz_state(2)


def schmidt_state(a0: complex, a1: complex) -> PureState:
    return make_state((2, 2), [a0, 0, 0, a1])


def product_state(dims: Sequence[int], digits: Sequence[int] | None = None) -> PureState:
    dims = _check_dims(dims)
    return basis_state(dims, digits if digits is not None else [0] * len(dims))


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj.to_json() if hasattr(obj, "to_json") else obj, fh, indent=1)
        fh.write("\n")


def load_state(path) -> PureState:
    with open(path, encoding="utf-8") as fh:
        return PureState.from_json(json.load(fh))
