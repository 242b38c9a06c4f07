"""Wall time to reach 1 - F < threshold, layered scheme against the MZI mesh.

Runtimes are hardware dependent; the ratio per n is printed as data.

    python scripts/bench.py --ns 3 4 5 6 7 8 --targets 10
"""
import argparse
from pathlib import Path

import numpy as np

from ums.experiments import runtime_bench, runtime_ratios
from ums.io import write_csv
from ums.linalg import RngSeed
from ums.optimizer import OptimizerConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ns", type=int, nargs="+", default=[3, 4, 5, 6, 7, 8])
    ap.add_argument("--targets", type=int, default=10)
    ap.add_argument("--threshold", type=float, default=1e-5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/bench"))
    args = ap.parse_args()

    rows = runtime_bench(args.ns, ("layered", "clements"), args.threshold, args.targets, OptimizerConfig(),
                         RngSeed(args.seed), args.jobs)
    write_csv(rows, "bench", args.out / "bench.csv")
    ratios = runtime_ratios(rows)
    for n in args.ns:
        for arch in ("layered", "clements"):
            recs = [r for r in rows if r.n == n and r.arch == arch]
            t = np.array([r.runtime_s for r in recs])
            ok = np.mean([r.threshold_met for r in recs])
            print(f"n={n} {arch:9s} mean {t.mean():7.3f} s  max {t.max():7.3f} s  converged {ok:.0%}")
        print(f"n={n} layered/clements runtime ratio {ratios.get(n, float('nan')):.2f}")


if __name__ == "__main__":
    main()
