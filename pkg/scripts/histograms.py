"""Fidelity histograms for layered schemes (DFT and Haar mixing) and the MZI mesh.

Writes one CSV per configuration, ready for plotting. Layer counts from 2 up
to the full n + 1 show the transition to universality.

    python scripts/histograms.py --n 5 --targets 50 --out results/hist
"""
import argparse
from pathlib import Path

import numpy as np

from ums.experiments import LayeredFactory, MeshFactory, fidelity_histogram
from ums.io import write_csv
from ums.linalg import RngSeed
from ums.optimizer import OptimizerConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--targets", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/histograms"))
    args = ap.parse_args()

    cfg = OptimizerConfig()
    layers = list(range(2, args.n + 2))
    runs = {
        "layered_dft": (LayeredFactory(args.n, mixing="dft"), layers),
        "layered_haar": (LayeredFactory(args.n, mixing="haar"), layers),
        "clements": (MeshFactory(args.n), [None]),
        "clements_bias_I": (MeshFactory(args.n, "I", 20.0), [None]),
        "clements_bias_II": (MeshFactory(args.n, "II", 20.0), [None]),
        "clements_bias_III": (MeshFactory(args.n, "III", 20.0), [None]),
    }
    for k, (name, (factory, counts)) in enumerate(runs.items()):
        rows = fidelity_histogram(factory, args.targets, counts, cfg, RngSeed(args.seed).spawn(k), args.jobs)
        path = write_csv(rows, "histogram", args.out / f"{name}_n{args.n}.csv")
        for layers_used in sorted({r.phase_layers for r in rows}):
            inf = [r.infidelity for r in rows if r.phase_layers == layers_used]
            print(f"{name} layers={layers_used}: median 1-F {np.median(inf):.2e}, worst {max(inf):.2e}")
        print(f"  -> {path}")


if __name__ == "__main__":
    main()
