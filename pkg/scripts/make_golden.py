"""Regenerate tests/golden/counts.json from the independent oracles in tests/oracles.py."""

import json
import math
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import (  # noqa: E402
    best_generating_paths,
    brute_generating_paths,
    brute_labeled_rooted,
    brute_tally,
)

FIG2_PATH = (1, 2, 3, 2, 4, 3, 1, 2, 3, 2, 4, 3, 1)

GRAPHS = {
    "doubled_loop": {(1, 1): 2},
    "quadrupled_loop": {(1, 1): 4},
    "doubled_2cycle": {(1, 2): 2, (2, 1): 2},
    "doubled_triangle": {(1, 2): 2, (2, 3): 2, (3, 1): 2},
    "loop_and_2cycle": {(1, 1): 2, (1, 2): 2, (2, 1): 2},
    "two_2cycles": {(1, 2): 2, (2, 1): 2, (2, 3): 2, (3, 2): 2},
    "fig2": {e: 2 for e in set(zip(FIG2_PATH, FIG2_PATH[1:]))},
}


def main() -> None:
    tallies, rooted = {}, {}
    for k in range(1, 5):
        for N in range(1, 7):
            if N ** (2 * k) > 2_000_000:
                continue
            tallies[f"{N},{k}"] = brute_tally(N, k)
            rooted[f"{N},{k}"] = brute_labeled_rooted(N, k)
    generating = {}
    for name, g in GRAPHS.items():
        best = best_generating_paths(g)
        if sum(g.values()) <= 8:
            assert brute_generating_paths(g) == best, name
        generating[name] = best
    out = {
        "even_closed_path_tally": tallies,
        "labeled_rooted_even_digraphs": rooted,
        "generating_paths": generating,
        "cycle_class_size": {f"{N},{m}": math.comb(N, m) * math.factorial(m - 1)
                             for N in range(1, 9) for m in range(1, N + 1)},
    }
    path = ROOT / "tests" / "golden" / "counts.json"
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
