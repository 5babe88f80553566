"""Pilot oracle for the Figure 1 bands.

Runs the figure1 experiment on a seed range disjoint from the acceptance
test (master seed 1_000_003) and freezes the observed frequencies in
tests/golden/figure1_pilot.json. Eigenvalues come from numpy.linalg.eigvals
here, not from the package's LAPACK wrapper, so the two routes stay separate.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

from specrad.dist import EntryDistribution, normalize_to_unit_second_moment
from specrad.ensemble import sample_matrix
from specrad.experiments import trial_seed

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1_000_003)
    ap.add_argument("--out", default=str(ROOT / "tests" / "golden" / "figure1_pilot.json"))
    args = ap.parse_args()

    out = {"n": args.n, "trials": args.trials, "master_seed": args.seed}
    for alpha in (1.8, 2.2):
        d = EntryDistribution.pareto(alpha)
        if alpha > 2:
            _, d = normalize_to_unit_second_moment(d)
        within, outlier, ratios = 0, 0, []
        for i in range(args.trials):
            a = sample_matrix(d, args.n, trial_seed(args.seed, i)).dense
            m2 = float(np.mean(np.abs(a) ** 2)) if alpha < 2 else 1.0
            r = math.sqrt(m2 * args.n)
            mods = np.abs(np.linalg.eigvals(a))
            within += mods.max() <= 1.5 * r
            outlier += np.any(mods > r)
            ratios.append(float(mods.max() / r))
        out[f"alpha_{alpha}"] = {
            "frac_within_1p5_circle": within / args.trials,
            "frac_with_outlier": outlier / args.trials,
            "max_ratio": max(ratios),
            "mean_ratio": float(np.mean(ratios)),
        }
        print(alpha, out[f"alpha_{alpha}"])
    Path(args.out).write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
