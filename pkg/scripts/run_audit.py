"""Regenerate the calibration ledger and per-audit JSON reports."""
import argparse

from concurrence_lab.audit import DEFAULT_SEED, calibration_table, render_table, run_all, write_reports

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default="results/audit")
    args = p.parse_args()
    reports = run_all(args.seed)
    out = write_reports(reports, args.seed, args.out)
    print(render_table(calibration_table(reports)), end="")
    print(f"wrote {out}")
