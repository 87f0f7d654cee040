"""Bias of plug-in vs split-half C^2 estimates on the Bell state."""
import argparse

import numpy as np

from concurrence_lab.quadform import builtin_form, settings_of_form
from concurrence_lab.shotsim import ShotPlan, estimate_c2
from concurrence_lab.statevec import bell_state

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--shots", type=int, nargs="+", default=[100, 1000, 10_000])
    args = p.parse_args()

    form = builtin_form("two_qubit_general")
    settings = settings_of_form(form)
    print(f"{'shots':>7} {'estimator':>10} {'bias':>11} {'+-':>9} {'-1/N':>9}")
    for n in args.shots:
        for est in ("plugin", "split-half"):
            vals = np.array([estimate_c2(form, bell_state(), ShotPlan(settings, n, s, est, 0)).c2_estimate
                             for s in range(args.runs)])
            print(f"{n:7d} {est:>10} {vals.mean() - 1:11.2e} {vals.std(ddof=1) / np.sqrt(args.runs):9.1e} "
                  f"{-1 / n:9.1e}")
