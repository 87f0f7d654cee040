"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data or precondition error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import audit as audit_mod
from .concurrence import (concurrence_purity, concurrence_purity_squared, enumerate_bipartitions,
                          minor_sum, three_qubit_c2, two_qubit_c2)
from .decomposer import decompose_c2
from .errors import ConcurrenceLabError
from .quadform import BUILTIN_FORMS, QuadraticForm, builtin_form, evaluate_form, settings_of_form
from .shotsim import (ShotPlan, estimate_c2, first_order_coefficient, noise_scan, sample_setting,
                      write_histogram_csv, write_noise_csv)
from .statevec import (bell_state, dump_json, ghz_state, load_state, partial_trace, product_state, purity,
                       random_haar_state, schmidt_state, w_state)

log = logging.getLogger("concurrence_lab")

EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    seed: int | None = None
    out: str | None = None
    json: bool = False
    shots: int | None = None
    ensemble_size: int | None = None

    def require_seed(self) -> int:
        if self.seed is None:
            raise UsageError(f"{self.subcommand}: --seed is required")
        return self.seed


def _dims(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}; expected e.g. 2,2,3")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",")]


def _complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def _emit(cfg: RunConfig, payload: dict, text: str) -> None:
    if cfg.out and cfg.subcommand not in ("audit",):
        Path(cfg.out).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    print(json.dumps(payload, indent=1) if cfg.json else text)


# --- subcommands -------------------------------------------------------------

def cmd_state(args, cfg: RunConfig) -> int:
    if args.action == "show":
        st = load_state(args.file)
        rows = []
        for s in enumerate_bipartitions(st.n_sites) if st.n_sites > 1 else []:
            rows.append({"sites": list(s), "purity": purity(partial_trace(st, s))})
        payload = {"dims": list(st.dims), "amps": st.to_json()["amps"], "purities": rows}
        lines = [f"dims {list(st.dims)}"]
        lines += ["  |" + "".join(map(str, np.unravel_index(i, st.dims))) + f">: {a.real:+.6f}{a.imag:+.6f}i"
                  for i, a in enumerate(st.amps) if abs(a) > 1e-12]
        lines += [f"purity of sites {r['sites']}: {r['purity']:.6g}" for r in rows]
        print(json.dumps(payload, indent=1) if cfg.json else "\n".join(lines))
        return 0

    fam = args.family
    if fam == "bell":
        st = bell_state()
    elif fam == "ghz":
        st = ghz_state(args.n, args.a0, args.a1) if args.a0 is not None else ghz_state(args.n)
    elif fam == "w":
        st = w_state(args.n)
    elif fam == "schmidt":
        st = schmidt_state(args.a0 if args.a0 is not None else 2**-0.5,
                           args.a1 if args.a1 is not None else 2**-0.5)
    elif fam == "product":
        st = product_state(args.dims or (2,) * args.n)
    elif fam == "haar":
        if not args.dims:
            raise UsageError("haar family needs --dims")
        st = random_haar_state(args.dims, cfg.require_seed())
    else:  # argparse restricts choices
        raise UsageError(f"unknown family {fam}")
    text = json.dumps(st.to_json())
    if cfg.out:
        dump_json(st, cfg.out)
        text = f"wrote {cfg.out}"
    print(text)
    return 0


ENGINES = {
    # name: (function returning C^2, convention tag)
    "purity": (concurrence_purity_squared, "purity-canonical"),
    "minors": (minor_sum, "minor-sum"),
    "two_qubit": (two_qubit_c2, "two-qubit-amplitude"),
    "three_qubit": (three_qubit_c2, "three-qubit-amplitude (2x canonical)"),
}


def cmd_concurrence(args, cfg: RunConfig) -> int:
    st = load_state(args.file)
    fn, tag = ENGINES[args.engine]
    c2 = fn(st)
    payload = {"engine": args.engine, "convention": tag, "c2": c2, "c": float(np.sqrt(max(c2, 0.0)))}
    if args.engine == "purity":
        payload["c"] = concurrence_purity(st)
    _emit(cfg, payload, f"C = {payload['c']:.10g}\nC^2 = {c2:.10g}  [{tag}]")
    return 0


def _load_form(name: str, n: int | None) -> QuadraticForm:
    if name.endswith(".json"):
        with open(name, encoding="utf-8") as fh:
            return QuadraticForm.from_json(json.load(fh))
    return builtin_form(name, n=n)


def cmd_formula(args, cfg: RunConfig) -> int:
    if args.action == "list":
        payload = {"forms": BUILTIN_FORMS}
        print(json.dumps(payload, indent=1) if cfg.json
              else "\n".join(f"{k:22s} {v}" for k, v in BUILTIN_FORMS.items()))
        return 0
    if not args.name:
        raise UsageError(f"formula {args.action} needs a form name")
    form = _load_form(args.name, args.n)
    if args.action == "settings":
        settings = settings_of_form(form)
        payload = {"form": args.name, "count": len(settings), "settings": [list(s) for s in settings]}
        text = "\n".join("".join(map(str, s)) for s in settings) + f"\n{len(settings)} settings"
        _emit(cfg, payload, text)
        return 0
    if not args.state:
        raise UsageError("formula eval needs a state file")
    value = evaluate_form(form, load_state(args.state))
    _emit(cfg, {"form": args.name, "value": value}, f"{value:.10g}")
    return 0


def cmd_decompose(args, cfg: RunConfig) -> int:
    form = decompose_c2(args.dims)
    out = cfg.out or "form_" + "x".join(map(str, args.dims)) + ".json"
    Path(out).write_text(form.dumps() + "\n", encoding="utf-8")
    payload = {"out": out, "terms": len(form.terms), "max_imag_residue": form.metadata["max_imag_residue"]}
    text = f"wrote {out}: {len(form.terms)} terms, imaginary residue {form.metadata['max_imag_residue']:.3g}"
    if args.eval:
        payload["value"] = evaluate_form(form, load_state(args.eval))
        text += f"\nvalue [minor-sum] = {payload['value']:.10g}"
    print(json.dumps(payload, indent=1) if cfg.json else text)
    return 0


def cmd_simulate(args, cfg: RunConfig) -> int:
    form = _load_form(args.form, args.n)
    st = load_state(args.state)
    settings = settings_of_form(form)
    plan = ShotPlan(settings, args.shots, cfg.require_seed(), args.estimator)
    report = estimate_c2(form, st, plan)
    payload = report.to_json()
    payload["exact_value"] = evaluate_form(form, st)
    if args.histograms:
        hist = {s: sample_setting(st, s, args.shots, plan.seed, k) for k, s in enumerate(settings)}
        write_histogram_csv(hist, args.histograms)
    text = (f"C^2 estimate = {report.c2_estimate:.6g} +- {report.c2_std_error:.2g} [{report.convention}] "
            f"({report.settings_used} settings, {report.shots_total} shots, {report.estimator})")
    _emit(cfg, payload, text)
    return 0


def cmd_noise_scan(args, cfg: RunConfig) -> int:
    plan = ShotPlan([(3, 3)], args.shots, cfg.require_seed(), args.estimator)
    rows = noise_scan(args.alpha, args.beta, args.eps, plan)
    if cfg.out:
        write_noise_csv(rows, cfg.out)
    payload = {"rows": [{"eps": r.eps, "c2_est": r.c2_est, "c2_actual": r.c2_actual, "rel_err": r.rel_err,
                         "rel_err_std": r.rel_err_std} for r in rows],
               "first_order_coefficient": first_order_coefficient(rows) if len(rows) >= 2 else None}
    text = "eps,c2_est,c2_actual,rel_err\n" + "\n".join(
        f"{r.eps},{r.c2_est:.8g},{r.c2_actual:.8g},{r.rel_err:.8g}" for r in rows)
    print(json.dumps(payload, indent=1) if cfg.json else text)
    return 0


def cmd_audit(args, cfg: RunConfig) -> int:
    seed = cfg.seed if cfg.seed is not None else audit_mod.DEFAULT_SEED
    reports = audit_mod.run_audit(args.which, seed)
    out = audit_mod.write_reports(reports, seed, cfg.out)
    rows = audit_mod.calibration_table(reports)
    if cfg.json:
        print(json.dumps([r.to_json() for r in reports], indent=1))
    else:
        print(audit_mod.render_table(rows), end="")
        for r in reports:
            for ex in r.counterexamples[:3]:
                print(f"  counterexample {r.formula_id}: {ex}")
        print(f"ledger written to {out / 'ledger.csv'}")
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="RNG seed (required for stochastic commands)")
    common.add_argument("--out", help="output path (directory for audit)")
    common.add_argument("--json", action="store_true", help="print JSON instead of text")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="concurrence-lab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("state", parents=[common], help="generate or inspect states")
    s.add_argument("action", choices=["gen", "show"])
    s.add_argument("file", nargs="?", help="state JSON (show)")
    s.add_argument("--family", choices=["bell", "ghz", "w", "haar", "schmidt", "product"], default="bell")
    s.add_argument("--n", type=int, default=3, help="number of qubits (ghz, w, product)")
    s.add_argument("--dims", type=_dims)
    s.add_argument("--a0", type=_complex)
    s.add_argument("--a1", type=_complex)
    s.set_defaults(func=cmd_state)

    c = sub.add_parser("concurrence", parents=[common], help="concurrence of a state file")
    c.add_argument("file")
    c.add_argument("--engine", choices=sorted(ENGINES), default="purity")
    c.set_defaults(func=cmd_concurrence)

    f = sub.add_parser("formula", parents=[common], help="built-in quadratic forms")
    f.add_argument("action", choices=["eval", "list", "settings"])
    f.add_argument("name", nargs="?", help="built-in form name or form JSON file")
    f.add_argument("state", nargs="?")
    f.add_argument("--n", type=int, help="qubit count for nqubit_ghz")
    f.set_defaults(func=cmd_formula)

    d = sub.add_parser("decompose", parents=[common], help="generate the minor-sum quadratic form")
    d.add_argument("--dims", type=_dims, required=True)
    d.add_argument("--eval", metavar="STATE", help="also evaluate on a state file")
    d.set_defaults(func=cmd_decompose)

    m = sub.add_parser("simulate", parents=[common], help="shot-noise estimate of a form")
    m.add_argument("--form", required=True)
    m.add_argument("--state", required=True)
    m.add_argument("--shots", type=int, default=100_000)
    m.add_argument("--estimator", choices=["plugin", "split-half"], default="plugin")
    m.add_argument("--n", type=int)
    m.add_argument("--histograms", metavar="CSV", help="write per-setting outcome counts")
    m.set_defaults(func=cmd_simulate)

    a = sub.add_parser("audit", parents=[common], help="run formula audits and write the ledger")
    a.add_argument("which", nargs="?", default="all")
    a.set_defaults(func=cmd_audit)

    n = sub.add_parser("noise-scan", parents=[common], help="coherence-loss scan")
    n.add_argument("--alpha", type=_complex, default=2**-0.5)
    n.add_argument("--beta", type=_complex, default=2**-0.5)
    n.add_argument("--eps", type=_floats, default=[0.0, 0.05, 0.1, 0.15, 0.2])
    n.add_argument("--shots", type=int, default=1_000_000)
    n.add_argument("--estimator", choices=["plugin", "split-half"], default="plugin")
    n.set_defaults(func=cmd_noise_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    cfg = RunConfig(args.command, seed=args.seed, out=args.out, json=args.json,
                    shots=getattr(args, "shots", None))
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConcurrenceLabError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
