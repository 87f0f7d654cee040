"""Finite-shot, single-copy local measurement simulation.

A setting assigns one qubit observable (1, 2 or 3) per site; 0 marks a free
site, which is read out in the Z basis and only ever marginalized. Each shot
returns one outcome bit per site, 0 for eigenvalue +1 and 1 for -1. Outcomes
are drawn from the exact joint distribution, obtained by rotating the state
into the product eigenbasis of the setting.

Random streams are keyed on ``(seed, setting index)`` so that results do not
depend on evaluation order. Shots of a setting are drawn as two halves; the
split-half estimator multiplies means from different halves, which removes
the ``var/shots`` bias of squared sample means.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from math import prod
from typing import Sequence

import numpy as np

from .concurrence import xstate_concurrence
from .errors import DimensionError, PreconditionError
from .genbasis import Label, basis_for
from .quadform import QuadraticForm, Setting, builtin_form, covers, validate_setting
from .statevec import DensityMatrix, PureState, coherence_loss_mixture

ESTIMATORS = ("plugin", "split-half")
N_BOOTSTRAP = 200
_BOOTSTRAP_STREAM = 0xB0075


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])


@dataclass(frozen=True)
class ShotPlan:
    settings: tuple[Setting, ...]
    shots_per_setting: int
    seed: int
    estimator: str = "plugin"
    n_bootstrap: int = N_BOOTSTRAP

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(tuple(int(x) for x in s) for s in self.settings))
        if self.estimator not in ESTIMATORS:
            raise PreconditionError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.shots_per_setting < 1:
            raise PreconditionError("shots_per_setting must be positive")
        if self.estimator == "split-half" and self.shots_per_setting < 2:
            raise PreconditionError("split-half estimation needs at least 2 shots per setting")
        if not self.settings:
            raise PreconditionError("a plan needs at least one setting")


@dataclass
class EstimateReport:
    label_means: dict[Label, float]
    label_std_errors: dict[Label, float]
    c2_estimate: float
    c2_std_error: float
    settings_used: int
    shots_total: int
    estimator: str = "plugin"
    convention: str = ""
    settings: list[Setting] = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        d["label_means"] = {json.dumps(list(k)): v for k, v in self.label_means.items()}
        d["label_std_errors"] = {json.dumps(list(k)): v for k, v in self.label_std_errors.items()}
        d["settings"] = [list(s) for s in self.settings]
        return d


def _eigenbasis_rotation(index: int) -> np.ndarray:
    """Rows are eigenvectors (conjugated) of a qubit observable, +1 first."""
    op = basis_for(2).ops[index if index else 3]
    w, v = np.linalg.eigh(op)
    v = v[:, np.argsort(-w)]
    return v.conj().T


def outcome_probabilities(source: PureState | DensityMatrix, setting: Sequence[int]) -> np.ndarray:
    """Joint outcome distribution, indexed by outcome bits with site 0 most significant."""
    if any(d != 2 for d in source.dims):
        raise DimensionError("shot simulation is only defined for qubit sites")
    setting = validate_setting(setting, len(source.dims))
    rots = [_eigenbasis_rotation(s) for s in setting]
    n = len(setting)
    if isinstance(source, PureState):
        t = source.tensor()
        for k, u in enumerate(rots):
            t = np.moveaxis(np.tensordot(u, t, axes=([1], [k])), 0, k)
        p = np.abs(t.ravel()) ** 2
    else:
        t = source.entries.reshape(source.dims + source.dims)
        for k, u in enumerate(rots):
            t = np.moveaxis(np.tensordot(u, t, axes=([1], [k])), 0, k)
            t = np.moveaxis(np.tensordot(u.conj(), t, axes=([1], [n + k])), 0, n + k)
        p = np.real(np.diagonal(t.reshape(2**n, 2**n)))
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _draw_halves(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    first = shots // 2
    return np.stack([rng.multinomial(first, probs), rng.multinomial(shots - first, probs)])


def _counts_to_map(counts: np.ndarray, n_sites: int) -> dict[tuple[int, ...], int]:
    return {tuple(int(b) for b in np.binary_repr(i, n_sites)): int(c)
            for i, c in enumerate(counts) if c}


def _map_to_counts(counts: dict, n_sites: int) -> np.ndarray:
    arr = np.zeros(2**n_sites, dtype=np.int64)
    for outcome, c in counts.items():
        if len(outcome) != n_sites:
            raise DimensionError(f"outcome {outcome} does not have {n_sites} sites")
        arr[int("".join(str(int(b)) for b in outcome), 2)] += int(c)
    return arr


def sample_setting(source: PureState | DensityMatrix, setting: Sequence[int], shots: int,
                   seed: int, setting_index: int = 0) -> dict[tuple[int, ...], int]:
    """Outcome counts for ``shots`` single-copy measurements in one setting."""
    if shots < 1:
        raise PreconditionError("shots must be positive")
    probs = outcome_probabilities(source, setting)
    halves = _draw_halves(probs, shots, _stream(seed, setting_index))
    return _counts_to_map(halves.sum(axis=0), len(source.dims))


def _sign_vector(label: Sequence[int], n_sites: int) -> np.ndarray:
    """Product of +-1 eigenvalues at the label's non-identity sites, per outcome."""
    idx = np.arange(2**n_sites)
    sign = np.ones(2**n_sites)
    for k, l in enumerate(label):
        if l:
            sign *= 1 - 2 * ((idx >> (n_sites - 1 - k)) & 1)
    return sign


def _check_label(setting, label):
    if len(label) != len(setting):
        raise DimensionError(f"label {tuple(label)} and setting {tuple(setting)} differ in length")
    if not covers(setting, label):
        raise PreconditionError(f"label {tuple(label)} cannot be read from setting {tuple(setting)}")


def estimate_labels(counts: dict, setting: Sequence[int], labels: Sequence[Sequence[int]]
                    ) -> dict[Label, tuple[float, float]]:
    """Sample mean and standard error (sample sd / sqrt(shots)) for each label."""
    n = len(setting)
    arr = _map_to_counts(counts, n)
    shots = int(arr.sum())
    out = {}
    for label in labels:
        label = tuple(int(l) for l in label)
        _check_label(setting, label)
        mean = float(arr @ _sign_vector(label, n)) / shots
        var = max(1.0 - mean * mean, 0.0) * shots / (shots - 1) if shots > 1 else 0.0
        out[label] = (mean, float(np.sqrt(var / shots)))
    return out


def _assign_settings(form: QuadraticForm, settings) -> dict[Label, int]:
    """First plan setting (in plan order) that yields each label."""
    assigned = {}
    for label in form.labels:
        for k, s in enumerate(settings):
            if covers(s, label):
                assigned[label] = k
                break
        else:
            raise PreconditionError(f"no setting in the plan yields label {label}")
    return assigned


def _c2_from_means(form: QuadraticForm, index: dict, first: np.ndarray, second: np.ndarray | None):
    """Vectorized form evaluation; means arrays have a trailing label axis."""
    ident = (0,) * len(form.dims)
    total = np.full(first.shape[:-1], form.constant)
    for li, lj, c in form.terms:
        def col(arr, l):
            return 1.0 if l == ident else arr[..., index[l]]
        if second is None:
            total = total + c * col(first, li) * col(first, lj)
        else:
            total = total + c * 0.5 * (col(first, li) * col(second, lj) + col(second, li) * col(first, lj))
    return total


def estimate_c2(form: QuadraticForm, source: PureState | DensityMatrix, plan: ShotPlan) -> EstimateReport:
    if tuple(source.dims) != form.dims:
        raise DimensionError(f"form dims {form.dims} do not match source dims {tuple(source.dims)}")
    n = len(form.dims)
    settings = [validate_setting(s, n) for s in plan.settings]
    assigned = _assign_settings(form, settings)
    labels = form.labels
    index = {l: i for i, l in enumerate(labels)}
    signs = np.array([_sign_vector(l, n) for l in labels]).T if labels else np.zeros((2**n, 0))

    halves = [_draw_halves(outcome_probabilities(source, s), plan.shots_per_setting, _stream(plan.seed, k))
              for k, s in enumerate(settings)]
    half_sizes = np.array([plan.shots_per_setting // 2, plan.shots_per_setting - plan.shots_per_setting // 2])

    def label_means(per_setting_counts, sizes):
        # per_setting_counts[k]: (..., 2**n) counts for setting k
        out = np.empty(per_setting_counts[0].shape[:-1] + (len(labels),))
        for l, i in index.items():
            out[..., i] = per_setting_counts[assigned[l]] @ signs[:, i] / sizes
        return out

    full = [h.sum(axis=0) for h in halves]
    means = label_means(full, plan.shots_per_setting)
    first = label_means([h[0] for h in halves], half_sizes[0])
    second = label_means([h[1] for h in halves], half_sizes[1])

    if plan.estimator == "plugin":
        c2 = float(_c2_from_means(form, index, means, None))
    else:
        c2 = float(_c2_from_means(form, index, first, second))

    c2_se = 0.0
    if plan.n_bootstrap > 0:
        rng = _stream(plan.seed, _BOOTSTRAP_STREAM)
        b = plan.n_bootstrap
        if plan.estimator == "plugin":
            boot = [rng.multinomial(plan.shots_per_setting, f / f.sum(), size=b) for f in full]
            c2_boot = _c2_from_means(form, index, label_means(boot, plan.shots_per_setting), None)
        else:
            boot_a = [rng.multinomial(half_sizes[0], h[0] / max(h[0].sum(), 1), size=b) for h in halves]
            boot_b = [rng.multinomial(half_sizes[1], h[1] / max(h[1].sum(), 1), size=b) for h in halves]
            c2_boot = _c2_from_means(form, index, label_means(boot_a, half_sizes[0]),
                                     label_means(boot_b, half_sizes[1]))
        c2_se = float(np.std(c2_boot, ddof=1))

    shots = plan.shots_per_setting
    std_errors = {}
    for l in labels:
        m = means[index[l]]
        var = max(1.0 - m * m, 0.0) * shots / (shots - 1) if shots > 1 else 0.0
        std_errors[l] = float(np.sqrt(var / shots))
    return EstimateReport(
        label_means={l: float(means[index[l]]) for l in labels},
        label_std_errors=std_errors,
        c2_estimate=c2,
        c2_std_error=c2_se,
        settings_used=len(settings),
        shots_total=len(settings) * shots,
        estimator=plan.estimator,
        convention=str(form.metadata.get("convention", form.metadata.get("name", ""))),
        settings=settings,
    )


# --- coherence-loss scan -----------------------------------------------------

# the two-qubit Schmidt form returns |a0 a1|^2, a quarter of the canonical C^2
SCHMIDT_CALIBRATION = 4.0


@dataclass(frozen=True)
class NoiseScanRow:
    eps: float
    c_formula: float
    c_actual: float
    rel_err: float
    rel_err_std: float

    @property
    def c2_est(self) -> float:
        return self.c_formula**2

    @property
    def c2_actual(self) -> float:
        return self.c_actual**2

    @property
    def expected_rel_err(self) -> float:
        return self.eps / (1 - self.eps)


def _row_seed(seed: int, row: int) -> int:
    """Independent per-row seed; ``seed + row`` would make neighbouring scans share streams."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, row])
    return int(ss.generate_state(1, np.uint64)[0])


def noise_scan(alpha: complex, beta: complex, eps_grid: Sequence[float], plan: ShotPlan,
               form: QuadraticForm | None = None) -> list[NoiseScanRow]:
    """Measure coherence-loss mixtures with a pure-state formula and compare to the true concurrence.

    The formula estimate ignores the lost coherence, so the relative error is
    ``eps / (1 - eps)``. Concurrences use the canonical convention, in which
    ``alpha|00> + beta|11>`` has ``C = 2|alpha beta|``.
    """
    if abs(alpha * beta) < 1e-12:
        raise PreconditionError("alpha*beta = 0: the relative error is undefined")
    form = form or builtin_form("two_qubit_schmidt")
    calibration = SCHMIDT_CALIBRATION if form.metadata.get("name") == "two_qubit_schmidt" else 1.0
    rows = []
    for k, eps in enumerate(eps_grid):
        if not 0.0 <= eps < 1.0:
            raise PreconditionError(f"eps must lie in [0, 1), got {eps}")
        rho = coherence_loss_mixture(alpha, beta, eps)
        step = ShotPlan(plan.settings, plan.shots_per_setting, _row_seed(plan.seed, k),
                        plan.estimator, plan.n_bootstrap)
        rep = estimate_c2(form, rho, step)
        c2 = calibration * rep.c2_estimate
        c_formula = float(np.sqrt(max(c2, 0.0)))
        c_actual = xstate_concurrence(rho)
        # delta method: dC = dC^2 / (2C)
        c_se = calibration * rep.c2_std_error / (2 * c_formula) if c_formula > 0 else float("inf")
        rows.append(NoiseScanRow(float(eps), c_formula, c_actual,
                                 (c_formula - c_actual) / c_actual, c_se / c_actual))
    return rows


def first_order_coefficient(rows: Sequence[NoiseScanRow]) -> float:
    """Linear coefficient of a quadratic fit through the origin of rel_err against eps."""
    eps = np.array([r.eps for r in rows])
    y = np.array([r.rel_err for r in rows])
    coef, *_ = np.linalg.lstsq(np.column_stack([eps, eps**2]), y, rcond=None)
    return float(coef[0])


def write_noise_csv(rows: Sequence[NoiseScanRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "c2_est", "c2_actual", "rel_err"])
        for r in rows:
            w.writerow([repr(r.eps), repr(r.c2_est), repr(r.c2_actual), repr(r.rel_err)])


def write_histogram_csv(counts_by_setting: dict[Setting, dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["setting", "outcome", "count"])
        for setting, counts in counts_by_setting.items():
            for outcome, c in sorted(counts.items()):
                w.writerow(["".join(map(str, setting)), "".join(map(str, outcome)), c])
