"""Squared concurrence as a real quadratic form in local expectation values.

A form is ``constant + sum_t c_t <O_i(t)> <O_j(t)>`` with observable labels as
in :mod:`concurrence_lab.genbasis`. Terms are canonical: ``label_i <=
label_j`` lexicographically, duplicate pairs merged, the (identity, identity)
pair folded into the constant.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError
from .genbasis import Label, all_expectations, expectation, expectation_mixed, label_index, validate_label
from .statevec import DensityMatrix, PureState

# above this many labels per state, expectations are computed one by one
_DENSE_LABEL_LIMIT = 4**7

Setting = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    dims: tuple[int, ...]
    constant: float
    terms: tuple[tuple[Label, Label, float], ...]
    metadata: dict = field(default_factory=dict, compare=False)

    @classmethod
    def build(cls, dims: Sequence[int], constant: float,
              terms: Iterable[tuple[Sequence[int], Sequence[int], float]],
              metadata: dict | None = None, prune: float = 0.0) -> "QuadraticForm":
        dims = tuple(int(d) for d in dims)
        identity = (0,) * len(dims)
        merged: dict[tuple[Label, Label], float] = {}
        constant = float(constant)
        for li, lj, c in terms:
            li, lj = validate_label(li, dims), validate_label(lj, dims)
            c = float(c)
            if not np.isfinite(c):
                raise PreconditionError(f"non-finite coefficient on {li}, {lj}")
            if li == identity and lj == identity:
                constant += c
                continue
            key = (li, lj) if li <= lj else (lj, li)
            merged[key] = merged.get(key, 0.0) + c
        out = tuple((li, lj, c) for (li, lj), c in sorted(merged.items()) if abs(c) > prune)
        return cls(dims, constant, out, dict(metadata or {}))

    @cached_property
    def term_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flat label indices of each term's two labels, and the coefficients."""
        ii = np.array([label_index(li, self.dims) for li, _, _ in self.terms], dtype=np.int64)
        jj = np.array([label_index(lj, self.dims) for _, lj, _ in self.terms], dtype=np.int64)
        return ii, jj, np.array([c for _, _, c in self.terms])

    @property
    def labels(self) -> list[Label]:
        """Distinct non-identity labels, sorted."""
        identity = (0,) * len(self.dims)
        found = {l for li, lj, _ in self.terms for l in (li, lj)}
        found.discard(identity)
        return sorted(found)

    def coefficient(self, li: Sequence[int], lj: Sequence[int]) -> float:
        key = (tuple(li), tuple(lj))
        if key[0] > key[1]:
            key = key[::-1]
        for a, b, c in self.terms:
            if (a, b) == key:
                return c
        return 0.0

    def to_json(self) -> dict:
        out = {
            "dims": list(self.dims),
            "constant": self.constant,
            "terms": [{"i": list(li), "j": list(lj), "c": c} for li, lj, c in self.terms],
        }
        if self.metadata:
            out["metadata"] = self.metadata
        return out

    def dumps(self) -> str:
        """Canonical JSON text (stable key order, no whitespace variance)."""
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict) -> "QuadraticForm":
        return cls.build(data["dims"], data["constant"],
                         [(t["i"], t["j"], t["c"]) for t in data["terms"]],
                         data.get("metadata"))


def _check_dims(form: QuadraticForm, source) -> None:
    if tuple(source.dims) != form.dims:
        raise DimensionError(f"form dims {form.dims} do not match state dims {tuple(source.dims)}")


def evaluate_with(form: QuadraticForm, values: dict[Label, float]) -> float:
    """Evaluate using supplied expectation values (identity defaults to 1)."""
    identity = (0,) * len(form.dims)

    def get(l):
        return 1.0 if l == identity else values[l]

    return form.constant + sum(c * get(li) * get(lj) for li, lj, c in form.terms)


def _evaluate(form: QuadraticForm, source, pure: bool) -> float:
    _check_dims(form, source)
    if not form.terms:
        return form.constant
    if prod(d * d for d in form.dims) <= _DENSE_LABEL_LIMIT:
        ev = all_expectations(source).ravel()
        ii, jj, cc = form.term_arrays
        return float(form.constant + np.sum(cc * ev[ii] * ev[jj]))
    f = expectation if pure else expectation_mixed
    return evaluate_with(form, {l: f(source, l) for l in form.labels})


def evaluate_form(form: QuadraticForm, state: PureState) -> float:
    if not isinstance(state, PureState):
        raise PreconditionError("evaluate_form expects a PureState; use evaluate_form_mixed")
    return _evaluate(form, state, True)


def evaluate_form_mixed(form: QuadraticForm, rho: DensityMatrix) -> float:
    """Apply a pure-state form to a density matrix, ``<O> = tr(rho O)``.

    The result is not a concurrence for general mixed states.
    """
    return _evaluate(form, rho, False)


# --- built-in forms ----------------------------------------------------------

def _sq(spec: str, c: float, n: int):
    """Term ``c * <O>^2`` from a digit string such as ``"303"``."""
    label = tuple(int(ch) for ch in spec)
    assert len(label) == n
    return (label, label, c)


def _two_qubit_general():
    terms = [("33", 1), ("30", -1), ("03", -1), ("01", -1), ("31", 1), ("02", -1), ("32", 1)]
    return QuadraticForm.build((2, 2), 0.5, [_sq(s, 0.5 * c, 2) for s, c in terms],
                               {"name": "two_qubit_general"})


def _two_qubit_symmetric():
    terms = [("33", 2), ("30", -2), ("03", -2), ("01", -1), ("10", -1), ("31", 1), ("13", 1),
             ("02", -1), ("20", -1), ("32", 1), ("23", 1)]
    return QuadraticForm.build((2, 2), 2 / 16, [_sq(s, c / 16, 2) for s, c in terms],
                               {"name": "two_qubit_symmetric"})


def _two_qubit_schmidt():
    terms = [("33", 1), ("03", -1), ("30", -1)]
    return QuadraticForm.build((2, 2), 1 / 8, [_sq(s, c / 8, 2) for s, c in terms],
                               {"name": "two_qubit_schmidt"})


_THREE_Z = [("030", -5), ("003", -5), ("300", -5), ("033", 1), ("330", 1), ("303", 1), ("333", 3)]


def _three_qubit_xy(k: str):
    # the X-type and Y-type blocks share coefficients; k is "1" or "2"
    rows = [("00k", -3), ("0k0", -3), ("k00", -3), ("03k", -1), ("k03", -1), ("3k0", -1),
            ("0k3", 3), ("30k", 3), ("k30", 3), ("33k", 1), ("3k3", 1), ("k33", 1)]
    return [(s.replace("k", k), c) for s, c in rows]


def _three_qubit_general():
    terms = _THREE_Z + _three_qubit_xy("1") + _three_qubit_xy("2")
    return QuadraticForm.build((2, 2, 2), 9 / 4, [_sq(s, c / 4, 3) for s, c in terms],
                               {"name": "three_qubit_general"})


def _three_qubit_ghzw():
    return QuadraticForm.build((2, 2, 2), 9 / 4, [_sq(s, c / 4, 3) for s, c in _THREE_Z],
                               {"name": "three_qubit_ghzw"})


def _nqubit_ghz(n: int):
    """``1 + sum_{even,even} <Z_S><Z_S'> - sum_{odd,odd} <Z_S><Z_S'>`` over ordered
    pairs of nonempty subsets; ``Z_S`` has Z on the sites in S."""
    if n < 2:
        raise PreconditionError("nqubit_ghz needs N >= 2")
    subsets = [s for r in range(1, n + 1) for s in combinations(range(n), r)]

    def z(s):
        return tuple(3 if k in s else 0 for k in range(n))

    terms = []
    for s, t in product(subsets, repeat=2):
        if len(s) % 2 == len(t) % 2:
            terms.append((z(s), z(t), 1.0 if len(s) % 2 == 0 else -1.0))
    return QuadraticForm.build((2,) * n, 1.0, terms,
                               {"name": "nqubit_ghz", "n": n,
                                "index_reading": "ordered pairs of nonempty subsets with equal parity"})


BUILTIN_FORMS = {
    "two_qubit_general": "two qubits, any pure state (3 settings)",
    "two_qubit_symmetric": "two qubits, qubit-exchange symmetric variant",
    "two_qubit_schmidt": "two qubits in Schmidt form a0|00>+a1|11>",
    "three_qubit_general": "three qubits, any pure state, permutation invariant (7 settings)",
    "three_qubit_ghzw": "three-qubit generalized GHZ and W states (1 setting)",
    "nqubit_ghz": "N-qubit generalized GHZ states, Z correlators only (param n)",
}


def builtin_form(name: str, n: int | None = None) -> QuadraticForm:
    makers = {
        "two_qubit_general": _two_qubit_general,
        "two_qubit_symmetric": _two_qubit_symmetric,
        "two_qubit_schmidt": _two_qubit_schmidt,
        "three_qubit_general": _three_qubit_general,
        "three_qubit_ghzw": _three_qubit_ghzw,
    }
    if name == "nqubit_ghz":
        if n is None:
            raise PreconditionError("nqubit_ghz requires n")
        return _nqubit_ghz(int(n))
    if name not in makers:
        raise PreconditionError(f"unknown form {name!r}; known: {sorted(BUILTIN_FORMS)}")
    return makers[name]()


# --- measurement settings ----------------------------------------------------

def covers(setting: Sequence[int], label: Sequence[int]) -> bool:
    """A setting yields a label when every non-identity site of the label matches.

    Setting entries of 0 mark free sites, which can only yield identity.
    """
    return all(l == 0 or l == s for s, l in zip(setting, label))


def validate_setting(setting: Sequence[int], n_sites: int) -> Setting:
    setting = tuple(int(s) for s in setting)
    if len(setting) != n_sites:
        raise DimensionError(f"setting {setting} does not have {n_sites} entries")
    if any(not 0 <= s <= 3 for s in setting):
        raise PreconditionError(f"qubit setting entries must lie in 0..3, got {setting}")
    if not any(setting):
        raise PreconditionError("a setting must measure at least one site")
    return setting


def settings_of_form(form: QuadraticForm) -> list[Setting]:
    """Greedy cover of the form's labels by full qubit settings.

    Each round takes the setting covering the most uncovered labels; ties go
    to the setting covering the most labels overall, then to the
    lexicographically smallest. Returned sorted.
    """
    if any(d != 2 for d in form.dims):
        raise DimensionError("setting planning is only defined for qubit sites")
    labels = form.labels
    remaining = set(labels)
    candidates = list(product((1, 2, 3), repeat=len(form.dims)))
    total = {c: sum(covers(c, l) for l in labels) for c in candidates}
    chosen: list[Setting] = []
    while remaining:
        best = min(candidates,
                   key=lambda c: (-sum(covers(c, l) for l in remaining), -total[c], c))
        chosen.append(best)
        remaining -= {l for l in remaining if covers(best, l)}
    return sorted(chosen)


def tomography_settings(n_qubits: int) -> int:
    """Local Pauli settings needed for full state tomography of N qubits."""
    return 3**n_qubits


def schmidt_projector_estimate(state: PureState) -> float:
    """``16 P(++) P(--)``; a claim under audit, not a trusted estimator."""
    if state.dims != (2, 2):
        raise DimensionError(f"needs dims (2, 2), got {state.dims}")
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    p_pp = abs(np.vdot(np.kron(plus, plus), state.amps)) ** 2
    p_mm = abs(np.vdot(np.kron(minus, minus), state.amps)) ** 2
    return float(16 * p_pp * p_mm)


def settings_table() -> str:
    """Markdown table comparing the forms' setting counts with full tomography."""
    rows = [("full local-Pauli tomography", "N", "3^N"),
            ("full local-Pauli tomography", "2", str(tomography_settings(2))),
            ("full local-Pauli tomography", "3", str(tomography_settings(3)))]
    for name in ("two_qubit_general", "two_qubit_schmidt", "three_qubit_general", "three_qubit_ghzw"):
        form = builtin_form(name)
        rows.append((f"`{name}`", str(len(form.dims)), str(len(settings_of_form(form)))))
    lines = ["| scheme | qubits | settings |", "|---|---|---|"]
    lines += [f"| {a} | {b} | {c} |" for a, b, c in rows]
    return "\n".join(lines) + "\n"
