"""Fidelity under finite phase-setting precision (direct evaluation, no re-optimization).

Compares the layered DFT scheme with the MZI mesh at the same size.

    python scripts/precision.py --n 10 --bits 4 6 8 10 12 --samples 200
"""
import argparse
from pathlib import Path

from ums.architectures import MZIMesh, make_variant
from ums.experiments import precision_sweep
from ums.io import write_csv
from ums.linalg import RngSeed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--bits", type=float, nargs="+", default=[4, 6, 8, 10, 12])
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/precision"))
    args = ap.parse_args()

    for k, (name, arch) in enumerate([("layered_dft", make_variant(args.n, "a", "dft")), ("clements", MZIMesh(args.n))]):
        rows = precision_sweep(arch, args.bits, args.samples, RngSeed(args.seed).spawn(k))
        write_csv(rows, "precision", args.out / f"{name}_n{args.n}.csv")
        for r in rows:
            print(f"{name} bits={r.bits:g}: mean F {r.mean_fid:.8f} (min {r.min_fid:.6f})")


if __name__ == "__main__":
    main()
