"""Check every closed-form concurrence formula against brute-force references.

A subject formula f and a reference r are compared on a seeded ensemble. The
calibration constant k is the least-squares fit of ``r ~ k f`` on the states
where ``r > 1e-6``; the residual is ``max |r - k f|`` over the whole ensemble.
Verdicts:

* ``exact``: k = 1 within 1e-8 and residual < 1e-8
* ``proportional``: residual < 1e-8 with some other k
* ``mismatch``: anything else (a finding, not an error)
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .concurrence import (concurrence_purity_squared, ghz_n_c2_analytic, minor_sum,
                          three_qubit_c2, two_qubit_c2)
from .decomposer import decompose_c2
from .errors import PreconditionError
from .genbasis import all_expectations
from .quadform import builtin_form, evaluate_form, evaluate_with, schmidt_projector_estimate
from .statevec import PureState, ghz_state, random_haar_state, schmidt_state, w_state

EXACT_TOL = 1e-8
FIT_FLOOR = 1e-6
DEFAULT_SEED = 2024
RESULTS_ENV = "CONCURRENCE_LAB_RESULTS"


@dataclass
class Ensemble:
    dims: tuple[int, ...]
    family: str
    size: int
    seed: int
    states: list[PureState] = field(repr=False, default_factory=list)

    def describe(self) -> dict:
        return {"dims": list(self.dims), "family": self.family, "size": self.size, "seed": self.seed}


@dataclass
class AuditReport:
    formula_id: str
    reference_id: str
    description: str
    ensemble: dict
    fitted_constant: float
    max_abs_residual: float
    verdict: str
    notes: str = ""
    counterexamples: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def classify(constant: float, residual: float) -> str:
    if residual < EXACT_TOL:
        return "exact" if abs(constant - 1.0) < EXACT_TOL else "proportional"
    return "mismatch"


def fit_constant(subject: np.ndarray, reference: np.ndarray) -> tuple[float, float]:
    """Least-squares k in ``reference ~ k * subject``, and the max residual."""
    mask = reference > FIT_FLOOR
    if not mask.any():
        raise PreconditionError("reference vanishes on the whole ensemble")
    f, r = subject[mask], reference[mask]
    denom = float(f @ f)
    k = float(f @ r) / denom if denom > 0 else float("nan")
    residual = float(np.max(np.abs(reference - k * subject))) if np.isfinite(k) else float("inf")
    return k, residual


def audit_formula(formula_id: str, subject: Callable[[PureState], float],
                  reference_id: str, reference: Callable[[PureState], float],
                  ensemble: Ensemble, description: str = "",
                  counterexample_tol: float = EXACT_TOL) -> AuditReport:
    if not ensemble.states:
        raise PreconditionError("empty ensemble")
    f = np.array([subject(s) for s in ensemble.states])
    r = np.array([reference(s) for s in ensemble.states])
    k, residual = fit_constant(f, r)
    verdict = classify(k, residual)
    examples = []
    if verdict == "mismatch":
        bad = np.nonzero(np.abs(f - r) > counterexample_tol)[0][:5]
        examples = [{"index": int(i), "formula": float(f[i]), "reference": float(r[i])} for i in bad]
    return AuditReport(formula_id, reference_id, description, ensemble.describe(),
                       k, residual, verdict, counterexamples=examples)


# --- ensembles ---------------------------------------------------------------

def haar_ensemble(dims: Sequence[int], size: int, seed: int) -> Ensemble:
    dims = tuple(dims)
    return Ensemble(dims, "haar", size, seed, [random_haar_state(dims, seed + i) for i in range(size)])


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, tag])


def _random_complex(rng, n) -> np.ndarray:
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)


def schmidt_ensemble(size: int, seed: int) -> Ensemble:
    rng = _rng(seed, 1)
    states = [schmidt_state(*_random_complex(rng, 2)) for _ in range(size)]
    return Ensemble((2, 2), "schmidt", size, seed, states)


def ghz_ensemble(n: int, size: int, seed: int) -> Ensemble:
    rng = _rng(seed, 3)
    states = [ghz_state(n, *_random_complex(rng, 2)) for _ in range(size)]
    return Ensemble((2,) * n, "ghz", size, seed, states)


def ghz_w_ensemble(size: int, seed: int) -> Ensemble:
    """``size`` random generalized GHZ states followed by ``size`` generalized W states."""
    rng = _rng(seed, 2)
    ghz = [ghz_state(3, *_random_complex(rng, 2)) for _ in range(size)]
    w = [w_state(3, list(_random_complex(rng, 3))) for _ in range(size)]
    return Ensemble((2, 2, 2), "ghz+w", 2 * size, seed, ghz + w)


def ghz_grid(n: int, n_theta: int = 9, phases: Sequence[float] = (0.0, np.pi / 3)) -> list[tuple[complex, complex]]:
    """Amplitude pairs ``(cos t, e^{i p} sin t)`` for t on [0, pi/2], including a1 = 0 and a0 = a1."""
    thetas = np.linspace(0.0, np.pi / 2, n_theta)
    grid = [(complex(np.cos(t)), complex(np.exp(1j * p) * np.sin(t))) for t in thetas for p in phases]
    return list(dict.fromkeys(grid))


# --- specific audits ---------------------------------------------------------

def _form_eval(name: str, **kw):
    form = builtin_form(name, **kw)
    return lambda s: evaluate_form(form, s)


def _standard_y_eval(name: str):
    form = builtin_form(name)

    def f(s):
        ev = all_expectations(s, sigma2="standard")
        return evaluate_with(form, {l: ev[l] for l in form.labels})
    return f


def audit_nqubit_ghz(n_range: Sequence[int] = range(2, 7)) -> list[AuditReport]:
    """The built-in N-qubit GHZ correlator form against the analytic GHZ value."""
    reports = []
    for n in n_range:
        if not 2 <= n <= 6:
            raise PreconditionError(f"N must lie in [2, 6], got {n}")
        form = builtin_form("nqubit_ghz", n=n)
        grid = ghz_grid(n)
        states = [ghz_state(n, a0, a1) for a0, a1 in grid]
        ens = Ensemble((2,) * n, "ghz-grid", len(states), 0, states)
        f = np.array([evaluate_form(form, s) for s in states])
        r = np.array([ghz_n_c2_analytic(a0, a1, n) for a0, a1 in grid])
        k, residual = fit_constant(f, r)
        verdict = classify(k, residual)
        examples = [{"a0": [a0.real, a0.imag], "a1": [a1.real, a1.imag],
                     "formula": float(fv), "reference": float(rv)}
                    for (a0, a1), fv, rv in zip(grid, f, r) if abs(fv - rv) > EXACT_TOL]
        reports.append(AuditReport(
            f"nqubit_ghz_n{n}", "ghz_analytic", f"N={n} GHZ Z-correlator form", ens.describe(),
            k, residual, verdict,
            notes=form.metadata["index_reading"], counterexamples=examples))
    return reports


def audit_projector_claim() -> AuditReport:
    """``16 P(++) P(--)`` against the two-qubit amplitude formula on Schmidt states."""
    points = [(1.0, 0.0), (2**-0.5, 2**-0.5), (0.6, 0.8), (0.8, 0.6), (0.6, 0.8j),
              (2**-0.5, -(2**-0.5)), (0.6, -0.8), (1.0, 1j)]
    points += [(complex(np.cos(t)), complex(np.exp(1j * p) * np.sin(t)))
               for t in np.linspace(0, np.pi / 2, 7) for p in (0.0, np.pi / 2)]
    states = [schmidt_state(a0, a1) for a0, a1 in points]
    ens = Ensemble((2, 2), "schmidt-grid", len(states), 0, states)
    f = np.array([schmidt_projector_estimate(s) for s in states])
    r = np.array([two_qubit_c2(s) for s in states])
    k, residual = fit_constant(f, r)
    verdict = classify(k, residual)
    examples, agree = [], []
    for s, fv, rv in zip(states, f, r):
        a0, a1 = complex(s.amps[0]), complex(s.amps[3])
        rec = {"a0": [a0.real, a0.imag], "a1": [a1.real, a1.imag], "formula": float(fv), "reference": float(rv)}
        (examples if abs(fv - rv) > EXACT_TOL else agree).append(rec)
    notes = ("agreement points: " + "; ".join(f"a0={d['a0']}, a1={d['a1']}" for d in agree)
             if agree else "no agreement points")
    return AuditReport("projector_product", "two_qubit_amplitude", "16 P(++) P(--) on Schmidt states",
                       ens.describe(), k, residual, verdict, notes=notes, counterexamples=examples)


DECOMPOSED_DIMS = ((2, 2), (2, 2, 2), (2, 2, 2, 2), (2, 3), (3, 3))


def run_all(seed: int = DEFAULT_SEED, n_haar: int = 1000, n_family: int = 200,
            n_decomposed: int = 200) -> list[AuditReport]:
    """All audits in a fixed order."""
    reports = []
    h2 = haar_ensemble((2, 2), n_haar, seed)
    h3 = haar_ensemble((2, 2, 2), n_haar, seed)
    reports.append(audit_formula("two_qubit_amplitude", two_qubit_c2, "purity_c2", concurrence_purity_squared,
                                 h2, "4|a00 a11 - a01 a10|^2"))
    reports.append(audit_formula("two_qubit_general", _form_eval("two_qubit_general"),
                                 "two_qubit_amplitude", two_qubit_c2, h2, "two-qubit general form"))
    reports.append(audit_formula("two_qubit_general_standard_y", _standard_y_eval("two_qubit_general"),
                                 "two_qubit_amplitude", two_qubit_c2, h2,
                                 "two-qubit general form with Y = [[0,-i],[i,0]]"))
    reports.append(audit_formula("two_qubit_symmetric", _form_eval("two_qubit_symmetric"),
                                 "two_qubit_amplitude", two_qubit_c2, h2, "qubit-exchange symmetric variant"))
    reports.append(audit_formula("two_qubit_schmidt", _form_eval("two_qubit_schmidt"),
                                 "two_qubit_amplitude", two_qubit_c2, schmidt_ensemble(n_family, seed),
                                 "Schmidt-form expression on a0|00>+a1|11>"))
    reports.append(audit_projector_claim())
    reports.append(audit_formula("three_qubit_amplitude", three_qubit_c2, "purity_c2", concurrence_purity_squared,
                                 h3, "three-qubit amplitude expression"))
    reports.append(audit_formula("three_qubit_general", _form_eval("three_qubit_general"),
                                 "three_qubit_amplitude", three_qubit_c2, h3, "three-qubit general form"))
    reports.append(audit_formula("three_qubit_ghzw", _form_eval("three_qubit_ghzw"),
                                 "three_qubit_amplitude", three_qubit_c2, ghz_w_ensemble(n_family, seed),
                                 "GHZ/W form on generalized GHZ and W states"))
    for n in (2, 3, 4):
        ens = h2 if n == 2 else h3 if n == 3 else haar_ensemble((2,) * n, n_family, seed)
        reports.append(audit_formula(f"minor_sum_n{n}", minor_sum, "purity_c2", concurrence_purity_squared,
                                     ens, f"minor sum, {n} qubits (expected constant 2^(4-N))"))
    for dims in ((2, 3), (3, 3), (2, 2, 3)):
        reports.append(audit_formula("minor_sum_" + "x".join(map(str, dims)), minor_sum,
                                     "purity_c2", concurrence_purity_squared,
                                     haar_ensemble(dims, n_family, seed), f"minor sum, dims {dims}"))
    reports.append(audit_formula(
        "ghz_analytic_n3", lambda s: ghz_n_c2_analytic(s.amps[0], s.amps[-1], 3),
        "purity_c2", concurrence_purity_squared,
        ghz_ensemble(3, n_family, seed),
        "analytic GHZ value"))
    for dims in DECOMPOSED_DIMS:
        form = decompose_c2(dims)
        rep = audit_formula("decomposed_" + "x".join(map(str, dims)), lambda s, f=form: evaluate_form(f, s),
                            "minor_sum", minor_sum, haar_ensemble(dims, n_decomposed, seed),
                            f"generated form, {len(form.terms)} terms")
        rep.notes = f"max imaginary residue {form.metadata['max_imag_residue']:.3g}"
        reports.append(rep)
    reports.extend(audit_nqubit_ghz())
    return reports


AUDIT_IDS = ("all", "nqubit_ghz", "projector_product")


def run_audit(which: str = "all", seed: int = DEFAULT_SEED) -> list[AuditReport]:
    if which == "all":
        return run_all(seed)
    if which == "nqubit_ghz":
        return audit_nqubit_ghz()
    if which == "projector_product":
        return [audit_projector_claim()]
    reports = [r for r in run_all(seed) if r.formula_id == which]
    if not reports:
        raise PreconditionError(f"unknown audit {which!r}")
    return reports


# --- ledger ------------------------------------------------------------------

LEDGER_COLUMNS = ["formula", "reference", "constant", "verdict", "max_residual", "ensemble", "seed", "description"]


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def calibration_table(reports: Sequence[AuditReport]) -> list[dict]:
    rows = []
    for r in reports:
        ens = r.ensemble
        rows.append({
            "formula": r.formula_id,
            "reference": r.reference_id,
            "constant": "-" if r.verdict == "mismatch" else _fmt(r.fitted_constant),
            "verdict": r.verdict,
            "max_residual": f"{r.max_abs_residual:.2e}",
            "ensemble": f"{ens['family']}{tuple(ens['dims'])}x{ens['size']}",
            "seed": str(ens["seed"]),
            "description": r.description,
        })
    return rows


def ledger_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=LEDGER_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def render_table(rows: Sequence[dict]) -> str:
    cols = ["formula", "reference", "constant", "verdict", "max_residual"]
    widths = {c: max(len(c), *(len(r[c]) for r in rows)) for c in cols}
    lines = ["  ".join(c.ljust(widths[c]) for c in cols), "  ".join("-" * widths[c] for c in cols)]
    lines += ["  ".join(r[c].ljust(widths[c]) for c in cols) for r in rows]
    return "\n".join(lines) + "\n"


def results_dir(default: str | os.PathLike = "results") -> Path:
    return Path(os.environ.get(RESULTS_ENV, default))


def write_reports(reports: Sequence[AuditReport], seed: int, out_dir: str | os.PathLike | None = None) -> Path:
    """Write ``ledger.csv``, ``ledger.txt`` and one JSON per audit; return the directory."""
    out = Path(out_dir) if out_dir is not None else results_dir()
    out.mkdir(parents=True, exist_ok=True)
    rows = calibration_table(reports)
    (out / "ledger.csv").write_text(ledger_csv(rows), encoding="utf-8")
    (out / "ledger.txt").write_text(render_table(rows), encoding="utf-8")
    for r in reports:
        path = out / f"{r.formula_id}_seed{seed}.json"
        path.write_text(json.dumps(r.to_json(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return out
