"""Standard error of a single-site Z mean on the Bell state against shot count."""
import argparse
import csv
from pathlib import Path

import numpy as np

from concurrence_lab.shotsim import estimate_labels, sample_setting
from concurrence_lab.statevec import bell_state

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--out", default="results/shot_scaling.csv")
    args = p.parse_args()

    shots = [10**k for k in range(2, 7)]
    rows = []
    for n in shots:
        est = [estimate_labels(sample_setting(bell_state(), (3, 3), n, s), (3, 3), [(3, 0)])[(3, 0)]
               for s in range(args.seeds)]
        rows.append((n, np.mean([se for _, se in est]), np.std([m for m, _ in est], ddof=1)))
        print(f"shots {n:>8}: reported SE {rows[-1][1]:.3e}, seed spread {rows[-1][2]:.3e}")
    x = np.log10(shots)
    print(f"log-log slope: reported {np.polyfit(x, np.log10([r[1] for r in rows]), 1)[0]:.4f}, "
          f"spread {np.polyfit(x, np.log10([r[2] for r in rows]), 1)[0]:.4f}")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["shots", "reported_se", "seed_spread"])
        w.writerows(rows)
