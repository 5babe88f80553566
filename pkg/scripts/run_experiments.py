"""Run the experiment configs in scripts/configs (all of them, or the ones named).

    python3 scripts/run_experiments.py                 # everything
    python3 scripts/run_experiments.py toy_phase       # one config
    python3 scripts/run_experiments.py --out-root /tmp/r --workers 2
"""

import argparse
import json
import sys
from pathlib import Path

from specrad.experiments import ExperimentConfig, run

CONFIGS = Path(__file__).resolve().parent / "configs"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="*", help="config names without .json")
    ap.add_argument("--out-root", default=".", help="prefix for each config's output_dir")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    paths = [CONFIGS / f"{n}.json" for n in args.names] or sorted(CONFIGS.glob("*.json"))
    status = 0
    for p in paths:
        d = json.loads(p.read_text())
        d["output_dir"] = str(Path(args.out_root) / d["output_dir"])
        d["workers"] = args.workers
        res = run(ExperimentConfig.from_dict(d))
        print(f"{p.stem}: ok={res.ok} wall={res.manifest['wall_time_s']}s -> {d['output_dir']}")
        for row in res.summary:
            print("   ", json.dumps(row, default=str))
        status |= 0 if res.ok else 2
    return status


if __name__ == "__main__":
    sys.exit(main())
