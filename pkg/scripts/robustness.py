"""Infidelity against mixer perturbation strength alpha.

R = identity is the worst case (all mixers collapse to I at alpha = 1);
R = haar reproduces the random-block perturbation. Writes the summary CSV
and the raw per-target samples.

    python scripts/robustness.py --n 5 --targets 20 --r identity
"""
import argparse
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ums.experiments import robustness_sweep
from ums.io import write_csv, write_json
from ums.linalg import RngSeed
from ums.optimizer import OptimizerConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--targets", type=int, default=20)
    ap.add_argument("--r", choices=["identity", "haar"], default="identity")
    ap.add_argument("--alphas", type=json.loads, default=np.round(np.linspace(0, 1, 11), 2).tolist())
    ap.add_argument("--restarts", type=int, default=3)
    ap.add_argument("--hops", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/robustness"))
    args = ap.parse_args()

    cfg = OptimizerConfig(restarts=args.restarts, hops=args.hops)
    summary, samples = robustness_sweep(args.n, args.alphas, args.targets, args.r, cfg, RngSeed(args.seed), args.jobs)
    stem = f"{args.r}_n{args.n}"
    write_csv(summary, "robustness", args.out / f"{stem}.csv")
    write_json([asdict(s) for s in samples], args.out / f"{stem}_samples.json")
    for rec in summary:
        print(
            f"alpha={rec.parameter:.2f}  mean 1-F {rec.mean_infidelity:.2e}  "
            f"best10 {rec.best10_mean:.2e}  worst10 {rec.worst10_mean:.2e}  1-S {rec.mean_block_dissimilarity:.3f}"
        )


if __name__ == "__main__":
    main()
